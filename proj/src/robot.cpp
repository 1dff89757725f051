#include "drgbt/robot.hpp"

#include <numbers>

namespace drgbt {

RobotModel planar_robot(const std::vector<double>& link_lengths, double capsule_radius) {
  RobotModel m;
  m.chain = kinematics::planar_chain(link_lengths, capsule_radius);
  m.limits = trajectory::KinematicLimits::uniform(m.chain.dof(), std::numbers::pi, 20.0, 500.0);
  return m;
}

RobotModel xarm6_robot() {
  RobotModel m;
  m.chain = kinematics::xarm6_like();
  m.limits = trajectory::KinematicLimits::uniform(6, std::numbers::pi, 20.0, 500.0);
  return m;
}

}  // namespace drgbt
