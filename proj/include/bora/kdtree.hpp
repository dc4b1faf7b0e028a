#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "bora/geometry.hpp"

namespace bora {

// Static 2-d tree over a fixed point set. NearestIterator yields point ids in
// nondecreasing distance from the query, ties broken by ascending id, so
// traversal order is reproducible across platforms.
class KdTree {
  struct Box {
    double xmin, ymin, xmax, ymax;
  };

  struct Node {
    Box box;
    int begin = 0, count = 0;  // leaf payload in ids_
    int left = -1, right = -1;
    int end_leaf() const { return begin + count; }
  };

  static constexpr int kLeafSize = 8;

  std::vector<Location> pts_;
  std::vector<int> ids_;
  std::vector<Node> nodes_;
  int root_ = -1;

  int build(int begin, int end) {
    Box tight{std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity()};
    for (int i = begin; i < end; ++i) {
      const Location& p = pts_[ids_[i]];
      tight.xmin = std::min(tight.xmin, p.x);
      tight.ymin = std::min(tight.ymin, p.y);
      tight.xmax = std::max(tight.xmax, p.x);
      tight.ymax = std::max(tight.ymax, p.y);
    }
    Node n;
    n.box = tight;
    const int idx = static_cast<int>(nodes_.size());
    nodes_.push_back(n);
    if (end - begin <= kLeafSize) {
      nodes_[idx].begin = begin;
      nodes_[idx].count = end - begin;
      std::sort(ids_.begin() + begin, ids_.begin() + end);
      return idx;
    }
    const bool split_x = (tight.xmax - tight.xmin) >= (tight.ymax - tight.ymin);
    const int mid = (begin + end) / 2;
    std::nth_element(ids_.begin() + begin, ids_.begin() + mid,
                     ids_.begin() + end, [&](int a, int b) {
                       const Location& pa = pts_[a];
                       const Location& pb = pts_[b];
                       if (split_x)
                         return pa.x != pb.x
                                    ? pa.x < pb.x
                                    : (pa.y != pb.y ? pa.y < pb.y : a < b);
                       return pa.y != pb.y
                                  ? pa.y < pb.y
                                  : (pa.x != pb.x ? pa.x < pb.x : a < b);
                     });
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[idx].left = l;
    nodes_[idx].right = r;
    return idx;
  }

 public:
  KdTree() = default;

  explicit KdTree(const std::vector<Location>& pts) : pts_(pts) {
    ids_.resize(pts_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) ids_[i] = static_cast<int>(i);
    nodes_.reserve(pts_.size() / 2 + 1);
    if (!pts_.empty()) root_ = build(0, static_cast<int>(pts_.size()));
  }

  std::size_t size() const { return pts_.size(); }

  class NearestIterator {
    struct Entry {
      double key;  // squared distance (exact for points, lower bound for boxes)
      int node;    // >= 0 when a subtree entry
      int point;   // >= 0 when a point entry
      // min-heap: smaller key first; boxes surface before points; then
      // smaller id, so the yield order is a strict (distance, id) sort
      bool operator<(const Entry& o) const {
        if (key != o.key) return key > o.key;
        const bool ap = point >= 0, bp = o.point >= 0;
        if (ap != bp) return ap;
        return point > o.point;
      }
    };

    const KdTree* tree_;
    Location q_;
    std::priority_queue<Entry> heap_;

    double box_d2(const Box& b) const {
      const double dx = q_.x < b.xmin   ? b.xmin - q_.x
                        : q_.x > b.xmax ? q_.x - b.xmax
                                        : 0.0;
      const double dy = q_.y < b.ymin   ? b.ymin - q_.y
                        : q_.y > b.ymax ? q_.y - b.ymax
                                        : 0.0;
      return dx * dx + dy * dy;
    }

   public:
    NearestIterator(const KdTree& tree, const Location& q)
        : tree_(&tree), q_(q) {
      if (tree.root_ >= 0) heap_.push({0.0, tree.root_, -1});
    }

    // Next point id in (distance, id) order, or -1 when exhausted.
    int next(double* dist_out = nullptr) {
      while (!heap_.empty()) {
        const Entry e = heap_.top();
        heap_.pop();
        if (e.point >= 0) {
          if (dist_out) *dist_out = std::sqrt(e.key);
          return e.point;
        }
        const Node& n = tree_->nodes_[e.node];
        for (int i = n.begin; i < n.end_leaf(); ++i) {
          const int id = tree_->ids_[i];
          const Location& p = tree_->pts_[id];
          const double dx = p.x - q_.x, dy = p.y - q_.y;
          heap_.push({dx * dx + dy * dy, -1, id});
        }
        if (n.left >= 0)
          heap_.push({box_d2(tree_->nodes_[n.left].box), n.left, -1});
        if (n.right >= 0)
          heap_.push({box_d2(tree_->nodes_[n.right].box), n.right, -1});
      }
      return -1;
    }
  };

  NearestIterator nearest(const Location& q) const {
    return NearestIterator(*this, q);
  }
};

}  // namespace bora
