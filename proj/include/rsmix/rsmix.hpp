#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rsmix/geometry.hpp"
#include "rsmix/label.hpp"
#include "rsmix/random.hpp"
#include "rsmix/spatial_index.hpp"

namespace rsmix {

enum class NeighborMode { Ball, Knn };

// paper: emit |P_a| - |S_a| + |S_b| points. fixed_n: pad the mixed cloud back
// to |P_a| by duplicating uniformly chosen mixed points.
enum class SizePolicy { Paper, FixedN };

enum class SubsetRole { Alpha, Beta };

struct MixParams {
  NeighborMode neighbor_mode = NeighborMode::Ball;
  double theta = 1.0;         // Beta(theta, theta) shape for the neighbor scale
  double nmax_fraction = 0.5; // |S_b| <= floor(nmax_fraction * n)
  double apply_prob = 0.5;
  SizePolicy size_policy = SizePolicy::Paper;

  // Throws Error(InvalidArgument) naming the offending field.
  void validate() const;
};

// Index set into a source cloud grouped around a query point.
struct RigidSubset {
  const PointCloud* source = nullptr;
  std::vector<std::uint32_t> indices; // ascending
  std::uint32_t query_index = 0;
  std::size_t unclamped_size = 0; // before any beta-role clamp

  std::size_t size() const { return indices.size(); }
};

enum class Provenance : std::uint8_t { FromAlpha, FromBetaTranslated };

enum class MixStatus {
  Mixed,          // (P_a - S_a) U T(S_b) emitted
  Skipped,        // apply-probability coin said no
  DegenerateSkip, // S_a covered all of P_a; cloud_a returned unchanged
};

struct MixResult {
  PointCloud mixed;
  double lambda = 0.0;
  LabelVec label;
  std::vector<Provenance> provenance; // one per mixed point
  // Index of each mixed point in its source cloud (alpha or beta per tag).
  std::vector<std::uint32_t> origin;
  MixStatus status = MixStatus::Skipped;

  // Trace of the draws, empty/zero for Skipped.
  std::uint32_t query_alpha = 0;
  std::uint32_t query_beta = 0;
  double scale = 0.0; // Beta(theta, theta) draw shared by both subsets
  std::vector<std::uint32_t> subset_alpha;
  std::vector<std::uint32_t> subset_beta; // after clamp and size matching
  std::size_t subset_beta_unclamped = 0;
};

// Centers on the centroid and scales so the farthest point has norm 1. A
// cloud whose points all coincide maps every point to the origin.
PointCloud normalize_unit_sphere(const PointCloud& cloud);

// Uniform index into the cloud; consumes exactly one draw.
std::size_t select_query(const PointCloud& cloud, RandomStream& rng);

// r_rigid ~ Beta(theta, theta), in (0, 1).
double sample_radius(double theta, RandomStream& rng);

// floor(nmax_fraction * n).
std::size_t max_beta_subset(std::size_t n, double nmax_fraction);

// k for the KNN neighborhood given a scale draw u in (0, 1):
// max(1, floor(u * max_beta_subset(n))).
std::size_t knn_count(double scale, std::size_t n, double nmax_fraction);

// Neighborhood of the query point at an already drawn scale. Ball mode
// queries radius `scale`, KNN mode queries knn_count(scale, n) points. For
// the beta role the result is clamped to max_beta_subset(n) by uniform
// subsampling without replacement (draws from rng only when clamping).
RigidSubset neighbor_subset_at_scale(const KdTree& index, const PointCloud& cloud, std::uint32_t query_index,
                                     double scale, const MixParams& params, SubsetRole role,
                                     RandomStream& rng);

// As above, drawing the scale first with sample_radius(params.theta).
RigidSubset neighbor_subset(const PointCloud& cloud, std::uint32_t query_index, const MixParams& params,
                            RandomStream& rng, SubsetRole role);

// p + (q_alpha - q_beta) for each subset point, in subset order.
std::vector<Point3> translate_subset(const RigidSubset& subset, const Point3& q_alpha, const Point3& q_beta);

// Mixture ratio: 0 when nothing of alpha remains or the beta subset is
// empty, otherwise n_beta / (n_alpha_remaining + n_beta).
double mixture_ratio(std::size_t n_alpha_remaining, std::size_t n_beta_subset);

// (1 - lambda) * y_alpha + lambda * y_beta.
LabelVec mix_labels(const LabelVec& y_alpha, const LabelVec& y_beta, double lambda);

// One RSMix draw. Random draws happen in this order: apply coin, q_alpha,
// q_beta, the shared scale, the beta clamp subsample, the ball-mode size
// matching subsample, fixed-n padding.
MixResult mix_pair(const PointCloud& cloud_a, const LabelVec& y_a, const PointCloud& cloud_b,
                   const LabelVec& y_b, const MixParams& params, RandomStream& rng);

} // namespace rsmix
