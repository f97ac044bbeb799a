#include "rsmix/rsmix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rsmix/error.hpp"

namespace rsmix {

namespace {

MixResult pass_through(const PointCloud& cloud_a, const LabelVec& y_a, MixStatus status) {
  MixResult result;
  result.mixed = cloud_a;
  result.lambda = 0.0;
  result.label = y_a;
  result.provenance.assign(cloud_a.size(), Provenance::FromAlpha);
  result.origin.resize(cloud_a.size());
  std::iota(result.origin.begin(), result.origin.end(), 0U);
  result.status = status;
  return result;
}

} // namespace

void MixParams::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorCode::InvalidArgument, "theta must be positive");
  }
  if (!(nmax_fraction > 0.0 && nmax_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "nmax_fraction must be in (0, 1]");
  }
  if (!(apply_prob >= 0.0 && apply_prob <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "apply_prob must be in [0, 1]");
  }
}

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
  require_valid_cloud(cloud.points);
  const Point3 center = centroid(cloud.points);

  PointCloud out;
  out.normalized = true;
  out.points.reserve(cloud.size());
  double max_norm = 0.0;
  for (const Point3& p : cloud.points) {
    out.points.push_back(p - center);
    max_norm = std::max(max_norm, norm(out.points.back()));
  }
  if (max_norm > 0.0) {
    for (Point3& p : out.points) {
      p = {p.x / max_norm, p.y / max_norm, p.z / max_norm};
    }
  }
  return out;
}

std::size_t select_query(const PointCloud& cloud, RandomStream& rng) {
  if (cloud.empty()) {
    throw Error(ErrorCode::EmptyInput, "empty input");
  }
  return rng.index_below(cloud.size());
}

double sample_radius(double theta, RandomStream& rng) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorCode::InvalidArgument, "theta must be positive");
  }
  return rng.beta(theta, theta);
}

std::size_t max_beta_subset(std::size_t n, double nmax_fraction) {
  return static_cast<std::size_t>(std::floor(nmax_fraction * static_cast<double>(n)));
}

std::size_t knn_count(double scale, std::size_t n, double nmax_fraction) {
  const auto nmax = static_cast<double>(max_beta_subset(n, nmax_fraction));
  const auto k = static_cast<std::size_t>(std::floor(scale * nmax));
  return std::clamp<std::size_t>(k, 1, n);
}

RigidSubset neighbor_subset_at_scale(const KdTree& index, const PointCloud& cloud, std::uint32_t query_index,
                                     double scale, const MixParams& params, SubsetRole role,
                                     RandomStream& rng) {
  if (query_index >= cloud.size()) {
    throw Error(ErrorCode::InvalidArgument, "query index out of range");
  }
  RigidSubset subset;
  subset.source = &cloud;
  subset.query_index = query_index;

  const Point3& q = cloud[query_index];
  if (params.neighbor_mode == NeighborMode::Ball) {
    subset.indices = index.query_radius(q, scale);
  } else {
    subset.indices = index.query_knn(q, knn_count(scale, cloud.size(), params.nmax_fraction));
    std::sort(subset.indices.begin(), subset.indices.end());
  }

  subset.unclamped_size = subset.indices.size();
  if (role == SubsetRole::Beta) {
    const std::size_t limit = max_beta_subset(cloud.size(), params.nmax_fraction);
    if (subset.indices.size() > limit) {
      subset.indices = rng.sample_without_replacement(std::move(subset.indices), limit);
    }
  }
  return subset;
}

RigidSubset neighbor_subset(const PointCloud& cloud, std::uint32_t query_index, const MixParams& params,
                            RandomStream& rng, SubsetRole role) {
  params.validate();
  const KdTree index(cloud);
  const double scale = sample_radius(params.theta, rng);
  return neighbor_subset_at_scale(index, cloud, query_index, scale, params, role, rng);
}

std::vector<Point3> translate_subset(const RigidSubset& subset, const Point3& q_alpha, const Point3& q_beta) {
  if (!q_alpha.finite() || !q_beta.finite()) {
    throw Error(ErrorCode::InvalidArgument, "non-finite query point");
  }
  const Point3 offset = q_alpha - q_beta;
  std::vector<Point3> out;
  out.reserve(subset.size());
  for (std::uint32_t i : subset.indices) {
    out.push_back((*subset.source)[i] + offset);
  }
  return out;
}

double mixture_ratio(std::size_t n_alpha_remaining, std::size_t n_beta_subset) {
  if (n_alpha_remaining == 0 || n_beta_subset == 0) {
    return 0.0;
  }
  return static_cast<double>(n_beta_subset) / static_cast<double>(n_alpha_remaining + n_beta_subset);
}

LabelVec mix_labels(const LabelVec& y_alpha, const LabelVec& y_beta, double lambda) {
  if (y_alpha.num_classes() != y_beta.num_classes()) {
    throw Error(ErrorCode::InvalidArgument,
                "label dimension mismatch: " + std::to_string(y_alpha.num_classes()) + " vs " +
                    std::to_string(y_beta.num_classes()));
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be in [0, 1]");
  }
  std::vector<double> mixed(y_alpha.num_classes());
  for (std::size_t c = 0; c < mixed.size(); ++c) {
    mixed[c] = (1.0 - lambda) * y_alpha[c] + lambda * y_beta[c];
  }
  return LabelVec(std::move(mixed));
}

MixResult mix_pair(const PointCloud& cloud_a, const LabelVec& y_a, const PointCloud& cloud_b,
                   const LabelVec& y_b, const MixParams& params, RandomStream& rng) {
  params.validate();
  require_valid_cloud(cloud_a.points);
  require_valid_cloud(cloud_b.points);
  if (y_a.num_classes() != y_b.num_classes()) {
    throw Error(ErrorCode::InvalidArgument, "label dimension mismatch");
  }

  if (rng.uniform01() >= params.apply_prob) {
    return pass_through(cloud_a, y_a, MixStatus::Skipped);
  }

  const auto query_a = static_cast<std::uint32_t>(select_query(cloud_a, rng));
  const auto query_b = static_cast<std::uint32_t>(select_query(cloud_b, rng));
  const double scale = sample_radius(params.theta, rng);

  const KdTree index_a(cloud_a);
  const KdTree index_b(cloud_b);
  const RigidSubset subset_a =
      neighbor_subset_at_scale(index_a, cloud_a, query_a, scale, params, SubsetRole::Alpha, rng);
  RigidSubset subset_b =
      neighbor_subset_at_scale(index_b, cloud_b, query_b, scale, params, SubsetRole::Beta, rng);
  const std::size_t unclamped_b = subset_b.unclamped_size;

  if (params.neighbor_mode == NeighborMode::Ball && subset_b.size() > subset_a.size()) {
    subset_b.indices = rng.sample_without_replacement(std::move(subset_b.indices), subset_a.size());
  }

  const std::size_t remaining_a = cloud_a.size() - subset_a.size();
  MixResult result;
  if (remaining_a == 0) {
    result = pass_through(cloud_a, y_a, MixStatus::DegenerateSkip);
  } else {
    result.status = MixStatus::Mixed;
    result.lambda = mixture_ratio(remaining_a, subset_b.size());
    result.label = mix_labels(y_a, y_b, result.lambda);

    const std::size_t total = remaining_a + subset_b.size();
    result.mixed.points.reserve(total);
    result.provenance.reserve(total);
    result.origin.reserve(total);

    std::size_t s = 0;
    for (std::uint32_t i = 0; i < cloud_a.size(); ++i) {
      if (s < subset_a.indices.size() && subset_a.indices[s] == i) {
        ++s;
        continue;
      }
      result.mixed.points.push_back(cloud_a[i]);
      result.provenance.push_back(Provenance::FromAlpha);
      result.origin.push_back(i);
    }
    const std::vector<Point3> moved = translate_subset(subset_b, cloud_a[query_a], cloud_b[query_b]);
    for (std::size_t j = 0; j < moved.size(); ++j) {
      result.mixed.points.push_back(moved[j]);
      result.provenance.push_back(Provenance::FromBetaTranslated);
      result.origin.push_back(subset_b.indices[j]);
    }

    if (params.size_policy == SizePolicy::FixedN) {
      const std::size_t m = result.mixed.size();
      result.mixed.points.reserve(cloud_a.size());
      result.provenance.reserve(cloud_a.size());
      result.origin.reserve(cloud_a.size());
      while (result.mixed.size() < cloud_a.size()) {
        const std::size_t pick = rng.index_below(m);
        result.mixed.points.push_back(result.mixed.points[pick]);
        result.provenance.push_back(result.provenance[pick]);
        result.origin.push_back(result.origin[pick]);
      }
    }
  }

  result.query_alpha = query_a;
  result.query_beta = query_b;
  result.scale = scale;
  result.subset_alpha = subset_a.indices;
  result.subset_beta = std::move(subset_b.indices);
  result.subset_beta_unclamped = unclamped_b;
  return result;
}

} // namespace rsmix
