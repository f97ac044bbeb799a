#include "rsmix/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rsmix/error.hpp"

namespace rsmix {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> components) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t c : components) {
    h = splitmix64(h ^ (c + 0x9E3779B97F4A7C15ULL));
  }
  return h;
}

double RandomStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

std::size_t RandomStream::index_below(std::size_t n) {
  if (n == 0) {
    throw Error(ErrorCode::InvalidArgument, "index_below: empty range");
  }
  const unsigned __int128 wide = static_cast<unsigned __int128>(engine_()) * n;
  return static_cast<std::size_t>(wide >> 64);
}

double RandomStream::normal() {
  const double u1 = 1.0 - uniform01(); // (0, 1]
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RandomStream::gamma(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw Error(ErrorCode::InvalidArgument, "gamma: shape must be positive");
  }
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    const double u = 1.0 - uniform01();
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = 1.0 - uniform01();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) {
      return d * v;
    }
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

double RandomStream::beta(double a, double b) {
  for (;;) {
    const double x = gamma(a);
    const double y = gamma(b);
    const double sum = x + y;
    if (!(sum > 0.0)) {
      continue;
    }
    const double value = x / sum;
    if (value > 0.0 && value < 1.0) {
      return value;
    }
  }
}

std::vector<std::uint32_t> RandomStream::sample_without_replacement(std::vector<std::uint32_t> candidates,
                                                                    std::size_t count) {
  const std::size_t m = candidates.size();
  if (count > m) {
    throw Error(ErrorCode::InvalidArgument, "sample_without_replacement: count exceeds population");
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + index_below(m - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(count);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

} // namespace rsmix
