#include "drgbt/kdtree.hpp"

#include "drgbt/errors.hpp"

#include <limits>

namespace drgbt {

std::size_t KdTree::insert(const Eigen::VectorXd& p) {
  if (p.size() != dim_) throw DimensionMismatch("KdTree::insert: dimension");
  const std::size_t idx = points_.size();
  points_.push_back(p);
  Node fresh;
  fresh.point = idx;
  if (nodes_.empty()) {
    nodes_.push_back(fresh);
    return idx;
  }
  int cur = 0;
  for (;;) {
    Node& n = nodes_[static_cast<std::size_t>(cur)];
    const bool go_left = p[n.axis] < points_[n.point][n.axis];
    const int next = go_left ? n.left : n.right;
    if (next >= 0) {
      cur = next;
      continue;
    }
    fresh.axis = (n.axis + 1) % dim_;
    const int child = static_cast<int>(nodes_.size());
    if (go_left) {
      n.left = child;
    } else {
      n.right = child;
    }
    nodes_.push_back(fresh);
    return idx;
  }
}

std::size_t KdTree::nearest(const Eigen::VectorXd& q) const {
  if (points_.empty()) throw Error("KdTree::nearest: empty tree");
  std::size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  if (points_.size() < brute_below_) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double d = (points_[i] - q).squaredNorm();
      if (d < best_sq) {
        best_sq = d;
        best = i;
      }
    }
    return best;
  }
  search(0, q, best, best_sq);
  return best;
}

void KdTree::search(int node, const Eigen::VectorXd& q, std::size_t& best, double& best_sq) const {
  if (node < 0) return;
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  const Eigen::VectorXd& p = points_[n.point];
  const double d = (p - q).squaredNorm();
  if (d < best_sq || (d == best_sq && n.point < best)) {
    best_sq = d;
    best = n.point;
  }
  const double diff = q[n.axis] - p[n.axis];
  const int near = diff < 0.0 ? n.left : n.right;
  const int far = diff < 0.0 ? n.right : n.left;
  search(near, q, best, best_sq);
  if (diff * diff <= best_sq) search(far, q, best, best_sq);
}

}  // namespace drgbt
