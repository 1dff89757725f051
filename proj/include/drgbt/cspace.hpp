#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace drgbt::cspace {

/// Joint positions in radians.
using Configuration = Eigen::VectorXd;

/// Position, velocity and acceleration (derivative order m = 2).
struct ExtendedConfiguration {
  Eigen::VectorXd q;
  Eigen::VectorXd q_dot;
  Eigen::VectorXd q_ddot;

  static ExtendedConfiguration at_rest(const Configuration& q) {
    return {q, Eigen::VectorXd::Zero(q.size()), Eigen::VectorXd::Zero(q.size())};
  }
  int dof() const { return static_cast<int>(q.size()); }
};

struct JointLimits {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dof() const { return static_cast<int>(lower.size()); }
  bool contains(const Configuration& q, double tol = 1e-12) const;
  Configuration clamp(const Configuration& q) const { return q.cwiseMax(lower).cwiseMin(upper); }
};

/// Weighted Euclidean metric. Empty weights mean unit weights.
/// Throws DimensionMismatch on size mismatch.
double metric_rho(const Configuration& q1, const Configuration& q2,
                  const Eigen::VectorXd& weights = Eigen::VectorXd());

Configuration interpolate(const Configuration& q1, const Configuration& q2, double s);

/// Seeded random stream. One per planner instance; not shared across threads.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  /// Uniform in the joint-limit box.
  Configuration sample_uniform(const JointLimits& limits);

  /// Uniform in the metric ball of `radius` around `q`, intersected with the
  /// limits (rejection sampling, falling back to clamping).
  Configuration sample_neighborhood(const Configuration& q, double radius, const JointLimits& limits);

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  std::uint64_t next() { return rng_(); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace drgbt::cspace
