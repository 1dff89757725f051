#pragma once

#include "drgbt/kinematics.hpp"
#include "drgbt/trajectory.hpp"

namespace drgbt {

/// Chain geometry plus the kinematic limits of its joints.
struct RobotModel {
  kinematics::ChainModel chain;
  trajectory::KinematicLimits limits;

  int dof() const { return chain.dof(); }
  void validate() const {
    chain.validate();
    limits.validate(chain.dof());
  }
  /// Copy whose capsules are inflated by `margin`.
  RobotModel inflated(double margin) const {
    RobotModel m = *this;
    m.chain.link_radii.array() += margin;
    return m;
  }
};

/// Planar chain with unit-scale defaults (omega = pi, alpha = 20, jerk = 500).
RobotModel planar_robot(const std::vector<double>& link_lengths, double capsule_radius);

/// 6-DoF spatial preset with datasheet-like limits.
RobotModel xarm6_robot();

}  // namespace drgbt
