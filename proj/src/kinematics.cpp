#include "drgbt/kinematics.hpp"

#include "drgbt/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace drgbt::kinematics {

void ChainModel::validate() const {
  const auto n = joint_axes.size();
  if (n == 0) throw ConfigError("model '" + name + "': at least one joint required");
  if (joint_offsets.size() != n) throw ConfigError("model '" + name + "': joint_offsets size mismatch");
  if (static_cast<std::size_t>(link_radii.size()) != n) throw ConfigError("model '" + name + "': link radii size mismatch");
  if (static_cast<std::size_t>(joint_limits.lower.size()) != n || static_cast<std::size_t>(joint_limits.upper.size()) != n) {
    throw ConfigError("model '" + name + "': joint limit size mismatch");
  }
  if (self_gap < 2) throw ConfigError("model '" + name + "': self_gap must be at least 2");
  for (std::size_t i = 0; i < n; ++i) {
    if (joint_axes[i].norm() < 1e-12) throw ConfigError("model '" + name + "': zero joint axis");
    if (link_radii[static_cast<Eigen::Index>(i)] < 0.0) throw ConfigError("model '" + name + "': negative capsule radius");
    if (!(joint_limits.lower[static_cast<Eigen::Index>(i)] < joint_limits.upper[static_cast<Eigen::Index>(i)])) {
      throw ConfigError("model '" + name + "': joint limits require lower < upper");
    }
  }
}

double EnclosingRadii::rho_bar(int i, const Eigen::VectorXd& dq) const {
  double s = 0.0;
  for (int j = 0; j <= i; ++j) s += r(i, j) * std::abs(dq[j]);
  return s;
}

double EnclosingRadii::rho_relative(int a, int b, const Eigen::VectorXd& dq) const {
  double s = 0.0;
  for (int j = a + 1; j <= b; ++j) s += r(b, j) * std::abs(dq[j]);
  return s;
}

RobotPose forward_kinematics_unchecked(const ChainModel& model, const Configuration& q) {
  const int n = model.dof();
  if (q.size() != n) throw DimensionMismatch("forward_kinematics: configuration size");
  RobotPose pose;
  pose.q = q;
  pose.self_gap = model.self_gap;
  pose.skeleton.reserve(static_cast<std::size_t>(n + 1));
  pose.axes.reserve(static_cast<std::size_t>(n));
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  Vec3 p = model.base_position;
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    p += rot * model.joint_offsets[ui];
    pose.skeleton.push_back(p);
    const Vec3 axis = model.joint_axes[ui].normalized();
    pose.axes.push_back(rot * axis);
    rot = rot * Eigen::AngleAxisd(q[i], axis).toRotationMatrix();
  }
  pose.skeleton.push_back(p + rot * model.tool_offset);
  pose.link_capsules.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    pose.link_capsules.push_back({pose.skeleton[ui], pose.skeleton[ui + 1], model.link_radii[i]});
  }
  return pose;
}

RobotPose forward_kinematics(const ChainModel& model, const Configuration& q) {
  if (q.size() != model.dof()) throw DimensionMismatch("forward_kinematics: configuration size");
  if (!model.joint_limits.contains(q, 1e-9)) throw JointLimitViolation("forward_kinematics: q outside joint limits");
  return forward_kinematics_unchecked(model, q);
}

namespace {

double distance_to_axis(const Vec3& p, const Vec3& origin, const Vec3& axis) {
  const Vec3 rel = p - origin;
  return (rel - rel.dot(axis) * axis).norm();
}

}  // namespace

EnclosingRadii enclosing_radii(const RobotPose& pose) {
  const int n = pose.dof();
  EnclosingRadii out;
  out.r = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const Vec3& origin = pose.skeleton[static_cast<std::size_t>(j)];
    const Vec3& axis = pose.axes[static_cast<std::size_t>(j)];
    double running = 0.0;
    for (int i = j; i < n; ++i) {
      const auto& cap = pose.link_capsules[static_cast<std::size_t>(i)];
      const double reach = std::max(distance_to_axis(cap.a, origin, axis), distance_to_axis(cap.b, origin, axis));
      running = std::max(running, reach + cap.radius);
      out.r(i, j) = running;
    }
  }
  return out;
}

bool self_collision(const RobotPose& pose) {
  const auto& caps = pose.link_capsules;
  for (std::size_t a = 0; a < caps.size(); ++a) {
    for (std::size_t b = a + static_cast<std::size_t>(pose.self_gap); b < caps.size(); ++b) {
      if (geometry::distance_capsule_capsule(caps[a], caps[b]) <= 0.0) return true;
    }
  }
  return false;
}

ChainModel planar_chain(const std::vector<double>& link_lengths, double capsule_radius, double z0) {
  const int n = static_cast<int>(link_lengths.size());
  ChainModel m;
  m.name = "planar" + std::to_string(n);
  m.base_position = Vec3(0.0, 0.0, z0);
  for (int i = 0; i < n; ++i) {
    m.joint_offsets.push_back(i == 0 ? Vec3::Zero() : Vec3(link_lengths[static_cast<std::size_t>(i - 1)], 0.0, 0.0));
    m.joint_axes.push_back(Vec3::UnitZ());
  }
  m.tool_offset = Vec3(link_lengths.back(), 0.0, 0.0);
  m.link_radii = Eigen::VectorXd::Constant(n, capsule_radius);
  m.joint_limits.lower = Eigen::VectorXd::Constant(n, -std::numbers::pi);
  m.joint_limits.upper = Eigen::VectorXd::Constant(n, std::numbers::pi);
  m.base_radius = capsule_radius;
  return m;
}

ChainModel xarm6_like() {
  ChainModel m;
  m.name = "xarm6";
  // Pedestal below joint 1 is part of the fixed base; the shoulder (joint 2)
  // sits at the base top point (0, 0, 0.267).
  m.base_position = Vec3(0.0, 0.0, 0.10);
  m.joint_offsets = {Vec3(0.0, 0.0, 0.0),    Vec3(0.0, 0.0, 0.167), Vec3(0.0, 0.0, 0.289),
                     Vec3(0.3425, 0.0, 0.0), Vec3(0.10, 0.0, 0.0),  Vec3(0.097, 0.0, 0.0)};
  m.joint_axes = {Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitY(), Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitX()};
  m.tool_offset = Vec3(0.06, 0.0, 0.0);
  m.link_radii.resize(6);
  m.link_radii << 0.06, 0.05, 0.045, 0.035, 0.035, 0.03;
  m.joint_limits.lower.resize(6);
  m.joint_limits.upper.resize(6);
  m.joint_limits.lower << -std::numbers::pi, -2.0, -3.0, -std::numbers::pi, -1.7, -std::numbers::pi;
  m.joint_limits.upper << std::numbers::pi, 2.0, 0.2, std::numbers::pi, 1.7, std::numbers::pi;
  m.base_radius = 0.08;
  // Wrist links are shorter than the sum of neighbouring radii, so pairs two
  // apart always touch.
  m.self_gap = 3;
  return m;
}

}  // namespace drgbt::kinematics
