#include "rsmix/convda.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rsmix/error.hpp"

namespace rsmix {

namespace {

PointCloud make_cloud(std::vector<Point3> points) {
  PointCloud out;
  out.points = std::move(points);
  return out;
}

} // namespace

void ConvDAConfig::validate() const {
  if (!(jitter_sigma >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "jitter_sigma must be >= 0");
  }
  if (!(jitter_clip >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "jitter_clip must be >= 0");
  }
  if (!(scale_lo > 0.0 && scale_lo <= scale_hi) || !std::isfinite(scale_hi)) {
    throw Error(ErrorCode::InvalidArgument, "scale range must satisfy 0 < scale_lo <= scale_hi");
  }
  if (!(shift_range >= 0.0) || !std::isfinite(shift_range)) {
    throw Error(ErrorCode::InvalidArgument, "shift_range must be >= 0");
  }
  if (!(drop_max_ratio >= 0.0 && drop_max_ratio < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "drop_max_ratio must be in [0, 1)");
  }
}

PointCloud jitter(const PointCloud& cloud, double sigma, double clip, RandomStream& rng) {
  if (!(sigma >= 0.0) || !(clip >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "jitter sigma and clip must be >= 0");
  }
  std::vector<Point3> out = cloud.points;
  if (sigma == 0.0) {
    return make_cloud(std::move(out));
  }
  // Rounding in v + e can overshoot the clip by an ulp; step back toward v.
  auto perturb = [&](double& v) {
    const double e = std::clamp(sigma * rng.normal(), -clip, clip);
    double moved = v + e;
    while (std::abs(moved - v) > clip) {
      moved = std::nextafter(moved, v);
    }
    v = moved;
  };
  for (Point3& p : out) {
    perturb(p.x);
    perturb(p.y);
    perturb(p.z);
  }
  return make_cloud(std::move(out));
}

PointCloud scale(const PointCloud& cloud, double factor) {
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const Point3& p : cloud.points) {
    out.push_back(factor * p);
  }
  return make_cloud(std::move(out));
}

ScaledCloud random_scale(const PointCloud& cloud, double lo, double hi, RandomStream& rng) {
  if (!(lo > 0.0 && lo <= hi) || !std::isfinite(hi)) {
    throw Error(ErrorCode::InvalidArgument, "scale range must satisfy 0 < lo <= hi");
  }
  const double s = rng.uniform(lo, hi);
  return {scale(cloud, s), s};
}

PointCloud rotate_axis(const PointCloud& cloud, Axis axis, double angle) {
  if (!std::isfinite(angle)) {
    throw Error(ErrorCode::InvalidArgument, "rotation angle must be finite");
  }
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  std::vector<Point3> out;
  out.reserve(cloud.size());
  for (const Point3& p : cloud.points) {
    switch (axis) {
    case Axis::X:
      out.push_back({p.x, c * p.y - s * p.z, s * p.y + c * p.z});
      break;
    case Axis::Y:
      out.push_back({c * p.x + s * p.z, p.y, -s * p.x + c * p.z});
      break;
    case Axis::Z:
      out.push_back({c * p.x - s * p.y, s * p.x + c * p.y, p.z});
      break;
    }
  }
  return make_cloud(std::move(out));
}

PointCloud rotate_y(const PointCloud& cloud, double angle) { return rotate_axis(cloud, Axis::Y, angle); }

PointCloud random_rotate_y(const PointCloud& cloud, RandomStream& rng) {
  return rotate_y(cloud, 2.0 * std::numbers::pi * rng.uniform01());
}

PointCloud random_shift(const PointCloud& cloud, double range, RandomStream& rng) {
  if (!(range >= 0.0) || !std::isfinite(range)) {
    throw Error(ErrorCode::InvalidArgument, "shift range must be >= 0");
  }
  const double dx = rng.uniform(-range, range);
  const double dy = rng.uniform(-range, range);
  const double dz = rng.uniform(-range, range);
  std::vector<Point3> out = cloud.points;
  if (range == 0.0) {
    return make_cloud(std::move(out));
  }
  for (Point3& p : out) {
    p = p + Point3{dx, dy, dz};
  }
  return make_cloud(std::move(out));
}

std::vector<std::uint32_t> drop_mapping(std::size_t n, double ratio, RandomStream& rng) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "drop ratio must be in [0, 1)");
  }
  if (n == 0) {
    throw Error(ErrorCode::EmptyInput, "empty input");
  }
  std::vector<std::uint32_t> mapping(n);
  std::iota(mapping.begin(), mapping.end(), 0U);
  const auto dropped_count = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  if (dropped_count == 0) {
    return mapping;
  }
  const std::vector<std::uint32_t> dropped = rng.sample_without_replacement(mapping, dropped_count);

  // Both lists ascending: the first survivor is the first gap in `dropped`.
  std::uint32_t first_survivor = 0;
  while (first_survivor < dropped.size() && dropped[first_survivor] == first_survivor) {
    ++first_survivor;
  }
  for (std::uint32_t i : dropped) {
    mapping[i] = first_survivor;
  }
  return mapping;
}

PointCloud drop_points(const PointCloud& cloud, double ratio, RandomStream& rng) {
  const std::vector<std::uint32_t> mapping = drop_mapping(cloud.size(), ratio, rng);
  std::vector<Point3> out;
  out.reserve(mapping.size());
  for (std::uint32_t i : mapping) {
    out.push_back(cloud[i]);
  }
  return make_cloud(std::move(out));
}

PointCloud random_drop(const PointCloud& cloud, double max_ratio, RandomStream& rng) {
  if (!(max_ratio >= 0.0 && max_ratio < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "drop max_ratio must be in [0, 1)");
  }
  const double ratio = rng.uniform(0.0, max_ratio);
  return drop_points(cloud, ratio, rng);
}

} // namespace rsmix
