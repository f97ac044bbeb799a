#include "rsmix/geometry.hpp"

#include <numeric>

#include "rsmix/error.hpp"
#include "rsmix/label.hpp"

namespace rsmix {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::EmptyInput:
    return "empty input";
  case ErrorCode::InvalidArgument:
    return "invalid argument";
  case ErrorCode::Parse:
    return "parse error";
  case ErrorCode::Io:
    return "i/o error";
  case ErrorCode::Config:
    return "config error";
  }
  return "error";
}

void require_valid_cloud(std::span<const Point3> points) {
  if (points.empty()) {
    throw Error(ErrorCode::EmptyInput, "empty input");
  }
  for (const Point3& p : points) {
    if (!p.finite()) {
      throw Error(ErrorCode::InvalidArgument, "non-finite coordinate in point cloud");
    }
  }
}

Point3 centroid(std::span<const Point3> points) {
  Point3 sum;
  for (const Point3& p : points) {
    sum = sum + p;
  }
  return (1.0 / static_cast<double>(points.size())) * sum;
}

LabelVec::LabelVec(std::vector<double> probabilities) : LabelVec(std::move(probabilities), kSumTolerance) {}

LabelVec LabelVec::from_stored(std::vector<double> probabilities) {
  return LabelVec(std::move(probabilities), kStoredSumTolerance);
}

LabelVec::LabelVec(std::vector<double> probabilities, double tolerance) : probs_(std::move(probabilities)) {
  if (probs_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "label vector has no classes");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::InvalidArgument, "label probabilities must be finite and non-negative");
    }
    sum += p;
  }
  if (!(std::abs(sum - 1.0) <= tolerance)) {
    throw Error(ErrorCode::InvalidArgument, "label probabilities must sum to 1");
  }
}

LabelVec LabelVec::one_hot(std::size_t num_classes, std::size_t cls) {
  if (cls >= num_classes) {
    throw Error(ErrorCode::InvalidArgument, "class index out of range");
  }
  std::vector<double> probs(num_classes, 0.0);
  probs[cls] = 1.0;
  return LabelVec(std::move(probs));
}

} // namespace rsmix
