#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace rsmix {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed for an independent stream identified by (seed, components...):
//   h = splitmix64(seed)
//   for c in components: h = splitmix64(h ^ (c + 0x9E3779B97F4A7C15))
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> components) noexcept;

// A seeded random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; all distributions below are
// implemented here rather than taken from <random>, whose distribution
// algorithms are implementation-defined. Given the same seed, every method
// produces the same values on every conforming platform.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // One raw 64-bit draw.
  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1): top 53 bits of one draw times 2^-53.
  double uniform01();

  // lo + (hi - lo) * uniform01().
  double uniform(double lo, double hi);

  // Uniform index in [0, n) from exactly one draw: floor(u64 * n / 2^64).
  // Requires n > 0.
  std::size_t index_below(std::size_t n);

  // Standard normal via the basic Box-Muller transform; consumes two draws.
  double normal();

  // Gamma(shape, 1) by Marsaglia-Tsang; shape < 1 uses the
  // Gamma(shape + 1) * U^(1/shape) boost. Variable draw count.
  double gamma(double shape);

  // Beta(a, b) as X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b). Redraws
  // until the value lies strictly inside (0, 1).
  double beta(double a, double b);

  // Uniform subset of size `count` from `candidates` without replacement
  // (partial Fisher-Yates: for i < count swap slot i with slot
  // i + index_below(m - i)), returned in ascending order. Requires
  // count <= candidates.size().
  std::vector<std::uint32_t> sample_without_replacement(std::vector<std::uint32_t> candidates,
                                                        std::size_t count);

private:
  std::mt19937_64 engine_;
};

} // namespace rsmix
