#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "sharp/errors.hpp"
#include "sharp/point.hpp"

namespace sharp {

/// Static 3-d tree over a borrowed point array.
///
/// All queries order candidates by (squared distance, index), so among
/// equidistant points the lowest index always wins. The tree stores indices
/// only; the referenced points must outlive it.
class KdTree3 {
 public:
  struct Neighbor {
    std::size_t index = 0;
    double sq_dist = std::numeric_limits<double>::infinity();
  };

  explicit KdTree3(std::span<const Point3> points) : points_(points) {
    order_.resize(points.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    if (!order_.empty()) {
      nodes_.reserve(2 * order_.size() / kLeafSize + 2);
      build(0, order_.size());
    }
  }

  std::size_t size() const { return points_.size(); }

  Neighbor nearest(const Point3& q) const {
    if (points_.empty()) throw DomainError("nearest-neighbour query on an empty point set");
    Neighbor best;
    nearest_rec(0, q, best);
    return best;
  }

  /// The k nearest points, sorted by (distance, index).
  std::vector<Neighbor> knn(const Point3& q, std::size_t k) const {
    k = std::min(k, points_.size());
    std::vector<Neighbor> out;
    if (k == 0) return out;
    std::priority_queue<Neighbor, std::vector<Neighbor>, Worse> heap;
    knn_rec(0, q, k, heap);
    out.resize(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = heap.top();
      heap.pop();
    }
    return out;
  }

  /// Indices of all points with squared distance <= radius^2, ascending by index.
  std::vector<std::size_t> radius_search(const Point3& q, double radius) const {
    std::vector<std::size_t> out;
    if (!points_.empty()) radius_rec(0, q, radius * radius, out);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static constexpr std::size_t kLeafSize = 12;

  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::int64_t left = -1;
    std::int64_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  struct Worse {
    bool operator()(const Neighbor& a, const Neighbor& b) const {
      return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.index < b.index);
    }
  };

  static bool better(const Neighbor& a, const Neighbor& b) { return Worse{}(a, b); }

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back(Node{begin, end});
    if (end - begin <= kLeafSize) return id;

    Point3 lo = points_[order_[begin]], hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      const Point3& p = points_[order_[i]];
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    const Point3 ext = hi - lo;
    int axis = 0;
    if (ext.y > ext[axis]) axis = 1;
    if (ext.z > ext[axis]) axis = 2;

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
    const double split = points_[order_[mid]][axis];
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    const auto l = build(begin, mid);
    const auto r = build(mid, end);
    nodes_[id].left = static_cast<std::int64_t>(l);
    nodes_[id].right = static_cast<std::int64_t>(r);
    return id;
  }

  // Points left of `mid` have coordinate <= split, points right have >= split,
  // so a far child can only be skipped when its slab is strictly farther than
  // the current best.
  void nearest_rec(std::size_t id, const Point3& q, Neighbor& best) const {
    const Node& n = nodes_[id];
    if (n.left < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const Neighbor c{order_[i], squared_distance(q, points_[order_[i]])};
        if (better(c, best)) best = c;
      }
      return;
    }
    const double diff = q[static_cast<std::size_t>(n.axis)] - n.split;
    const auto near = static_cast<std::size_t>(diff <= 0 ? n.left : n.right);
    const auto far = static_cast<std::size_t>(diff <= 0 ? n.right : n.left);
    nearest_rec(near, q, best);
    if (diff * diff <= best.sq_dist) nearest_rec(far, q, best);
  }

  template <class Heap>
  void knn_rec(std::size_t id, const Point3& q, std::size_t k, Heap& heap) const {
    const Node& n = nodes_[id];
    if (n.left < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const Neighbor c{order_[i], squared_distance(q, points_[order_[i]])};
        if (heap.size() < k) {
          heap.push(c);
        } else if (better(c, heap.top())) {
          heap.pop();
          heap.push(c);
        }
      }
      return;
    }
    const double diff = q[static_cast<std::size_t>(n.axis)] - n.split;
    const auto near = static_cast<std::size_t>(diff <= 0 ? n.left : n.right);
    const auto far = static_cast<std::size_t>(diff <= 0 ? n.right : n.left);
    knn_rec(near, q, k, heap);
    if (heap.size() < k || diff * diff <= heap.top().sq_dist) knn_rec(far, q, k, heap);
  }

  void radius_rec(std::size_t id, const Point3& q, double r2, std::vector<std::size_t>& out) const {
    const Node& n = nodes_[id];
    if (n.left < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i)
        if (squared_distance(q, points_[order_[i]]) <= r2) out.push_back(order_[i]);
      return;
    }
    const double diff = q[static_cast<std::size_t>(n.axis)] - n.split;
    const auto near = static_cast<std::size_t>(diff <= 0 ? n.left : n.right);
    const auto far = static_cast<std::size_t>(diff <= 0 ? n.right : n.left);
    radius_rec(near, q, r2, out);
    if (diff * diff <= r2) radius_rec(far, q, r2, out);
  }

  std::span<const Point3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace sharp
