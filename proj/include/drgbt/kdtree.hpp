#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace drgbt {

/// Incremental k-d tree over points of fixed dimension. Points are inserted
/// by descending to a leaf (split axis cycles with depth); no rebalancing.
/// Queries fall back to a linear scan while the tree holds fewer than
/// `brute_force_below` points.
class KdTree {
 public:
  explicit KdTree(int dim, std::size_t brute_force_below = 64) : dim_(dim), brute_below_(brute_force_below) {}

  /// Returns the index of the inserted point.
  std::size_t insert(const Eigen::VectorXd& p);
  /// Index of the nearest stored point (Euclidean). The tree must be non-empty.
  std::size_t nearest(const Eigen::VectorXd& q) const;

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Eigen::VectorXd& point(std::size_t i) const { return points_[i]; }

 private:
  struct Node {
    std::size_t point{0};
    int axis{0};
    int left{-1};
    int right{-1};
  };

  void search(int node, const Eigen::VectorXd& q, std::size_t& best, double& best_sq) const;

  int dim_;
  std::size_t brute_below_;
  std::vector<Eigen::VectorXd> points_;
  std::vector<Node> nodes_;
};

}  // namespace drgbt
