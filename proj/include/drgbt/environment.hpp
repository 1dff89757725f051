#pragma once

#include "drgbt/cspace.hpp"
#include "drgbt/geometry.hpp"
#include "drgbt/kinematics.hpp"
#include "drgbt/trajectory.hpp"

#include <random>
#include <vector>

namespace drgbt::sim {

using geometry::Box;
using geometry::Vec3;

/// Moving boxes inside a spherical workspace, kept out of a ball around the
/// robot base. In planar mode everything lives in the plane z = workspace_center.z.
struct Environment {
  std::vector<Box> obstacles;
  std::vector<Box> fixtures;  // static, e.g. a table
  Vec3 workspace_center{Vec3::Zero()};
  double workspace_radius{1.5};
  Vec3 base_center{Vec3::Zero()};
  double base_exclusion{0.0};
  double v_obs{0.0};
  bool planar{false};
};

struct ObstacleParams {
  int n_obs{0};
  double size{0.01};             // cube side
  bool uniform_speed{false};     // speed uniform in (0, v_obs] instead of exactly v_obs
};

/// Uniform centers in the workspace ball (disk when planar) at least
/// `base_exclusion` from the base, random directions. Throws
/// ScenarioGenerationFailed when the free region cannot be hit.
std::vector<Box> spawn_random_obstacles(const Environment& env, const ObstacleParams& params, std::mt19937_64& rng);

/// Constant-velocity motion with specular reflection on the workspace sphere
/// and on the base exclusion ball; the travelled arc length is exactly |v|*dt.
Environment advance_obstacles(const Environment& env, double dt);

/// Robot-environment contact or self-collision at one pose.
bool in_collision(const kinematics::RobotPose& pose, const Environment& env);

enum class MotionCheck { Valid, CollisionMoving, CollisionStopped };

struct MotionResult {
  MotionCheck status{MotionCheck::Valid};
  double t_contact{0.0};
};

/// Samples spline times [t_begin, t_end] (clamped to the spline domain, holding
/// the final state afterwards) on a grid of step dt_check while advancing the
/// obstacles from `env` (taken at t_begin). A contact with joint speed norm
/// above 1e-6 is a moving-robot collision.
MotionResult check_motion(const trajectory::Spline& spline, double t_begin, double t_end, const Environment& env,
                          const kinematics::ChainModel& chain, double dt_check);

/// True iff check_motion finds no contact.
bool is_valid_motion(const trajectory::Spline& spline, double t_begin, double t_end, const Environment& env,
                     const kinematics::ChainModel& chain, double dt_check);

}  // namespace drgbt::sim
