#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rsmix {

// Probability vector over C classes. Construction validates the simplex
// constraint (entries >= 0, sum within 1e-9 of one).
class LabelVec {
public:
  static constexpr double kSumTolerance = 1e-9;

  LabelVec() = default;
  explicit LabelVec(std::vector<double> probabilities);

  // Labels read back from 32-bit storage only sum to one within float
  // rounding; this accepts |sum - 1| <= kStoredSumTolerance.
  static constexpr double kStoredSumTolerance = 1e-5;
  static LabelVec from_stored(std::vector<double> probabilities);

  static LabelVec one_hot(std::size_t num_classes, std::size_t cls);

  std::size_t num_classes() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probabilities() const { return probs_; }

  friend bool operator==(const LabelVec&, const LabelVec&) = default;

private:
  LabelVec(std::vector<double> probabilities, double tolerance);

  std::vector<double> probs_;
};

} // namespace rsmix
