#include "rsmix/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>

#include "rsmix/error.hpp"

namespace rsmix {

namespace {

using Candidate = std::pair<double, std::uint32_t>; // (squared distance, index)

struct KnnState {
  std::span<const Point3> points;
  std::span<const std::uint32_t> perm;
  std::span<const KdTree::Node> nodes;
  Point3 query;
  std::size_t k = 0;
  std::priority_queue<Candidate> heap; // max-heap on (distance, index)

  bool full() const { return heap.size() == k; }

  void offer(std::uint32_t index) {
    const Candidate c{squared_distance(points[index], query), index};
    if (!full()) {
      heap.push(c);
    } else if (c < heap.top()) {
      heap.pop();
      heap.push(c);
    }
  }

  void visit(std::int32_t node_id) {
    const KdTree::Node& node = nodes[node_id];
    if (node.is_leaf()) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        offer(perm[i]);
      }
      return;
    }
    const double diff = query[node.axis] - node.split;
    const std::int32_t near = diff <= 0.0 ? node.left : node.right;
    const std::int32_t far = diff <= 0.0 ? node.right : node.left;
    visit(near);
    // Equal bounds are still visited: a tie at the worst distance may carry
    // a lower index.
    if (!full() || diff * diff <= heap.top().first) {
      visit(far);
    }
  }
};

struct RadiusState {
  std::span<const Point3> points;
  std::span<const std::uint32_t> perm;
  std::span<const KdTree::Node> nodes;
  Point3 query;
  double r2 = 0.0;
  std::vector<std::uint32_t> out;

  void visit(std::int32_t node_id) {
    const KdTree::Node& node = nodes[node_id];
    if (node.is_leaf()) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t index = perm[i];
        if (squared_distance(points[index], query) <= r2) {
          out.push_back(index);
        }
      }
      return;
    }
    const double diff = query[node.axis] - node.split;
    const std::int32_t near = diff <= 0.0 ? node.left : node.right;
    const std::int32_t far = diff <= 0.0 ? node.right : node.left;
    visit(near);
    if (diff * diff <= r2) {
      visit(far);
    }
  }
};

} // namespace

KdTree::KdTree(const PointCloud& cloud) : KdTree(std::span<const Point3>(cloud.points)) {}

KdTree::KdTree(std::span<const Point3> points) : points_(points) {
  require_valid_cloud(points_);
  if (points_.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidArgument, "point cloud too large for index");
  }
  perm_.resize(points_.size());
  std::iota(perm_.begin(), perm_.end(), 0U);
  nodes_.reserve(2 * (points_.size() / kLeafSize) + 1);
  build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});

  if (end - begin <= kLeafSize) {
    return id;
  }

  Point3 lo = points_[perm_[begin]];
  Point3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    const Point3& p = points_[perm_[i]];
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  int axis = 0;
  double spread = hi.x - lo.x;
  if (hi.y - lo.y > spread) {
    axis = 1;
    spread = hi.y - lo.y;
  }
  if (hi.z - lo.z > spread) {
    axis = 2;
    spread = hi.z - lo.z;
  }
  if (spread <= 0.0) {
    return id; // all points coincide
  }

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis];
                     const double cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = points_[perm_[mid]][axis];

  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.left = left;
  node.right = right;
  node.axis = axis;
  node.split = split;
  return id;
}

std::vector<std::uint32_t> KdTree::query_knn(const Point3& q, std::size_t k) const {
  if (k == 0 || k > points_.size()) {
    throw Error(ErrorCode::InvalidArgument, "invalid k");
  }
  if (!q.finite()) {
    throw Error(ErrorCode::InvalidArgument, "non-finite query point");
  }
  KnnState state{points_, perm_, nodes_, q, k, {}};
  state.visit(0);

  std::vector<std::uint32_t> out(state.heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = state.heap.top().second;
    state.heap.pop();
  }
  return out;
}

std::vector<std::uint32_t> KdTree::query_radius(const Point3& q, double r) const {
  if (!(r >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid radius");
  }
  if (!q.finite()) {
    throw Error(ErrorCode::InvalidArgument, "non-finite query point");
  }
  RadiusState state{points_, perm_, nodes_, q, r * r, {}};
  state.visit(0);
  std::sort(state.out.begin(), state.out.end());
  return std::move(state.out);
}

} // namespace rsmix
