#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rsmix/geometry.hpp"

namespace rsmix {

// Exact kd-tree over an immutable point array. The tree refers to the
// points without owning them; the cloud must outlive the index. Queries are
// const and safe to run concurrently.
//
// Nodes split on the axis of widest spread at the median (ties in the
// coordinate ordered by point index), so construction is deterministic and
// depth stays logarithmic even for collinear or duplicated input. A range
// whose points all coincide becomes a leaf regardless of size.
class KdTree {
public:
  static constexpr std::size_t kLeafSize = 8;

  struct Node {
    std::uint32_t begin = 0; // range into permutation()
    std::uint32_t end = 0;
    std::int32_t left = -1; // -1 on leaves
    std::int32_t right = -1;
    int axis = -1;
    double split = 0.0; // left coords <= split <= right coords

    bool is_leaf() const { return left < 0; }
  };

  explicit KdTree(const PointCloud& cloud);
  explicit KdTree(std::span<const Point3> points);
  KdTree(PointCloud&&) = delete;

  std::size_t size() const { return points_.size(); }
  std::span<const Point3> points() const { return points_; }

  // The k nearest points, ordered by (squared distance, index). Ties at the
  // k-th distance go to the lower index. Throws "invalid k" unless
  // 1 <= k <= size().
  std::vector<std::uint32_t> query_knn(const Point3& q, std::size_t k) const;

  // Every index with squared_distance(p, q) <= r*r, ascending. Throws
  // "invalid radius" for negative or NaN r.
  std::vector<std::uint32_t> query_radius(const Point3& q, double r) const;

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const std::uint32_t> permutation() const { return perm_; }

private:
  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::span<const Point3> points_;
  std::vector<std::uint32_t> perm_;
  std::vector<Node> nodes_;
};

inline KdTree build_index(const PointCloud& cloud) { return KdTree(cloud); }

} // namespace rsmix
