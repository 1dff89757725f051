#include "drgbt/cspace.hpp"

#include "drgbt/errors.hpp"

#include <cmath>

namespace drgbt::cspace {

bool JointLimits::contains(const Configuration& q, double tol) const {
  if (q.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (q[i] < lower[i] - tol || q[i] > upper[i] + tol) return false;
  }
  return true;
}

double metric_rho(const Configuration& q1, const Configuration& q2, const Eigen::VectorXd& weights) {
  if (q1.size() != q2.size()) throw DimensionMismatch("metric_rho: configurations differ in size");
  if (weights.size() == 0) return (q1 - q2).norm();
  if (weights.size() != q1.size()) throw DimensionMismatch("metric_rho: weight vector size");
  return (weights.cwiseSqrt().cwiseProduct(q1 - q2)).norm();
}

Configuration interpolate(const Configuration& q1, const Configuration& q2, double s) {
  return q1 + s * (q2 - q1);
}

Configuration Sampler::sample_uniform(const JointLimits& limits) {
  Configuration q(limits.dof());
  for (int i = 0; i < limits.dof(); ++i) q[i] = uniform(limits.lower[i], limits.upper[i]);
  return q;
}

Configuration Sampler::sample_neighborhood(const Configuration& q, double radius, const JointLimits& limits) {
  const auto n = q.size();
  if (radius <= 0.0) return q;
  constexpr int kMaxTries = 64;
  Configuration s(n);
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    Eigen::VectorXd dir(n);
    for (Eigen::Index i = 0; i < n; ++i) dir[i] = normal();
    const double norm = dir.norm();
    if (norm < 1e-12) continue;
    const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(n));
    s = q + (r / norm) * dir;
    if (limits.contains(s, 0.0)) return s;
  }
  return limits.clamp(s);
}

}  // namespace drgbt::cspace
