#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "rsmix/geometry.hpp"
#include "rsmix/random.hpp"

namespace rsmix {

// Conventional augmentations. Defaults follow the PointNet++ training
// setup: jitter std 0.01 clipped to 0.05, scale in [0.8, 1.25], a random
// rotation about the vertical (y) axis, shift in [-0.1, 0.1]^3, and
// random point dropout up to 87.5%.
struct ConvDAConfig {
  double jitter_sigma = 0.01;
  double jitter_clip = 0.05;
  double scale_lo = 0.8;
  double scale_hi = 1.25;
  bool rotate_y = true;
  double shift_range = 0.1;
  double drop_max_ratio = 0.875;

  void validate() const;
};

enum class Axis { X, Y, Z };

// Per-coordinate clip(sigma * N(0,1), -clip, clip); x, y, z order per point.
PointCloud jitter(const PointCloud& cloud, double sigma, double clip, RandomStream& rng);

struct ScaledCloud {
  PointCloud cloud;
  double factor = 1.0;
};

// One factor s ~ U[lo, hi] applied to every point.
ScaledCloud random_scale(const PointCloud& cloud, double lo, double hi, RandomStream& rng);
PointCloud scale(const PointCloud& cloud, double factor);

// Right-handed rotation, counterclockwise for positive angles when looking
// down the axis toward the origin. About y, (1,0,0) at +pi/2 maps to (0,0,-1).
PointCloud rotate_axis(const PointCloud& cloud, Axis axis, double angle);
PointCloud rotate_y(const PointCloud& cloud, double angle);

// Angle ~ U[0, 2*pi).
PointCloud random_rotate_y(const PointCloud& cloud, RandomStream& rng);

// One offset ~ U[-range, range]^3 added to every point.
PointCloud random_shift(const PointCloud& cloud, double range, RandomStream& rng);

// Output position i takes input point mapping[i]. floor(ratio * n) positions
// chosen uniformly without replacement are redirected to the lowest-index
// surviving point, so the count stays n. Requires 0 <= ratio < 1.
std::vector<std::uint32_t> drop_mapping(std::size_t n, double ratio, RandomStream& rng);

PointCloud drop_points(const PointCloud& cloud, double ratio, RandomStream& rng);

// d ~ U[0, max_ratio] followed by drop_points(cloud, d).
PointCloud random_drop(const PointCloud& cloud, double max_ratio, RandomStream& rng);

} // namespace rsmix
