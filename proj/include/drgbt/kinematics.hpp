#pragma once

#include "drgbt/cspace.hpp"
#include "drgbt/geometry.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace drgbt::kinematics {

using cspace::Configuration;
using geometry::Vec3;

/// Serial chain of revolute joints.
///
/// Frame 0 sits at `base_position` with identity orientation. Joint i origin is
/// `joint_offsets[i]` expressed in the previous joint frame (after that joint's
/// rotation); the tip is `tool_offset` in the last joint frame. Link i is the
/// segment from joint i to joint i+1 (or the tip), wrapped in a capsule.
struct ChainModel {
  std::string name;
  Vec3 base_position{Vec3::Zero()};
  std::vector<Vec3> joint_offsets;
  std::vector<Vec3> joint_axes;
  Vec3 tool_offset{Vec3::Zero()};
  Eigen::VectorXd link_radii;
  cspace::JointLimits joint_limits;
  double base_radius{0.0};
  /// Self-collision is checked for link pairs (a, b) with b >= a + self_gap.
  int self_gap{2};

  int dof() const { return static_cast<int>(joint_axes.size()); }
  /// Throws ConfigError when sizes disagree or values are out of range.
  void validate() const;
};

/// Wired model of the manipulator at one configuration.
struct RobotPose {
  Configuration q;
  std::vector<Vec3> skeleton;  // n+1 points, skeleton[0] is joint 1
  std::vector<Vec3> axes;      // world direction of each joint axis
  std::vector<geometry::Capsule> link_capsules;
  int self_gap{2};

  int dof() const { return static_cast<int>(axes.size()); }
  const Vec3& tip() const { return skeleton.back(); }
};

/// r(i, j), j <= i: radius of the cylinder around joint j's axis that encloses
/// links j..i including capsule radii. Entries above the diagonal are zero.
struct EnclosingRadii {
  Eigen::MatrixXd r;

  int dof() const { return static_cast<int>(r.rows()); }
  /// Upper bound on the displacement of links 0..i for a joint step `dq`.
  double rho_bar(int i, const Eigen::VectorXd& dq) const;
  /// Upper bound on the displacement of link b relative to link a (a < b).
  double rho_relative(int a, int b, const Eigen::VectorXd& dq) const;
};

/// Throws JointLimitViolation when `q` is outside the joint limits.
RobotPose forward_kinematics(const ChainModel& model, const Configuration& q);

/// Same as forward_kinematics without the limit check (for oracles and
/// intermediate points that are known to be inside the limits).
RobotPose forward_kinematics_unchecked(const ChainModel& model, const Configuration& q);

EnclosingRadii enclosing_radii(const RobotPose& pose);

/// True iff any pair of links that do not share a joint overlaps.
bool self_collision(const RobotPose& pose);

/// Planar chain in the xy-plane with all axes along z.
ChainModel planar_chain(const std::vector<double>& link_lengths, double capsule_radius, double z0 = 0.0);

/// 6-DoF spatial arm with xArm6-like proportions, base on a table top at z = 0.
ChainModel xarm6_like();

}  // namespace drgbt::kinematics
