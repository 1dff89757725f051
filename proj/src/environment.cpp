#include "drgbt/environment.hpp"

#include "drgbt/errors.hpp"

#include <cmath>
#include <limits>

namespace drgbt::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// First s >= 0 at which p + v*s leaves the ball |x| <= r (p inside).
double exit_time(const Vec3& p, const Vec3& v, double r) {
  const double a = v.squaredNorm();
  const double b = p.dot(v);
  const double c = p.squaredNorm() - r * r;
  if (c >= 0.0) return b > 0.0 ? 0.0 : kInf;
  return (-b + std::sqrt(b * b - a * c)) / a;
}

// First s >= 0 at which p + v*s enters the ball |x| <= r (p outside).
double entry_time(const Vec3& p, const Vec3& v, double r) {
  const double a = v.squaredNorm();
  const double b = p.dot(v);
  const double c = p.squaredNorm() - r * r;
  if (c <= 0.0) return b < 0.0 ? 0.0 : kInf;
  if (b >= 0.0) return kInf;
  const double disc = b * b - a * c;
  if (disc < 0.0) return kInf;
  return (-b - std::sqrt(disc)) / a;
}

Vec3 reflect(const Vec3& v, const Vec3& n) { return v - 2.0 * v.dot(n) * n; }

void advance_box(Box& box, const Environment& env, double dt) {
  double remaining = dt;
  for (int bounce = 0; bounce < 64 && remaining > 0.0; ++bounce) {
    const Vec3& v = box.velocity;
    if (v.squaredNorm() == 0.0) return;
    const double s_out = exit_time(box.center - env.workspace_center, v, env.workspace_radius);
    const double s_in =
        env.base_exclusion > 0.0 ? entry_time(box.center - env.base_center, v, env.base_exclusion) : kInf;
    const double s = std::min(s_out, s_in);
    if (s >= remaining) {
      box.center += remaining * v;
      return;
    }
    box.center += s * v;
    remaining -= s;
    if (s_out <= s_in) {
      const Vec3 n = (box.center - env.workspace_center).normalized();
      if (box.velocity.dot(n) > 0.0) box.velocity = reflect(box.velocity, n);
    } else {
      const Vec3 n = (box.center - env.base_center).normalized();
      if (box.velocity.dot(n) < 0.0) box.velocity = reflect(box.velocity, n);
    }
  }
  box.center += remaining * box.velocity;
}

}  // namespace

std::vector<Box> spawn_random_obstacles(const Environment& env, const ObstacleParams& params, std::mt19937_64& rng) {
  std::vector<Box> out;
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double r = env.workspace_radius;
  for (int k = 0; k < params.n_obs; ++k) {
    Box box;
    box.half_extents = Vec3::Constant(0.5 * params.size);
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      Vec3 off(uni(rng), uni(rng), env.planar ? 0.0 : uni(rng));
      if (off.norm() > 1.0) continue;
      const Vec3 c = env.workspace_center + r * off;
      if ((c - env.base_center).norm() < env.base_exclusion) continue;
      box.center = c;
      placed = true;
    }
    if (!placed) throw ScenarioGenerationFailed("spawn_random_obstacles: no free spot for an obstacle");
    Vec3 dir;
    do {
      dir = Vec3(gauss(rng), gauss(rng), env.planar ? 0.0 : gauss(rng));
    } while (dir.norm() < 1e-9);
    double speed = env.v_obs;
    if (params.uniform_speed) speed *= 1.0 - unit(rng);  // (0, v_obs]
    box.velocity = speed * dir.normalized();
    out.push_back(box);
  }
  return out;
}

Environment advance_obstacles(const Environment& env, double dt) {
  Environment out = env;
  if (dt <= 0.0) return out;
  for (auto& box : out.obstacles) advance_box(box, env, dt);
  return out;
}

bool in_collision(const kinematics::RobotPose& pose, const Environment& env) {
  for (const auto& cap : pose.link_capsules) {
    for (const auto& box : env.obstacles) {
      if (geometry::distance_capsule_box(cap, box).distance <= 0.0) return true;
    }
    for (const auto& box : env.fixtures) {
      if (geometry::distance_capsule_box(cap, box).distance <= 0.0) return true;
    }
  }
  return kinematics::self_collision(pose);
}

MotionResult check_motion(const trajectory::Spline& spline, double t_begin, double t_end, const Environment& env,
                          const kinematics::ChainModel& chain, double dt_check) {
  if (!(dt_check > 0.0)) throw Error("check_motion: dt_check must be positive");
  Environment e = env;
  const auto steps = static_cast<long>(std::ceil((t_end - t_begin) / dt_check - 1e-9));
  double t_prev = t_begin;
  for (long k = 0; k <= steps; ++k) {
    const double t = std::min(t_begin + static_cast<double>(k) * dt_check, t_end);
    e = advance_obstacles(e, t - t_prev);
    t_prev = t;
    const trajectory::SplineSample s = spline.evaluate_clamped(t);
    const kinematics::RobotPose pose = kinematics::forward_kinematics_unchecked(chain, s.x.q);
    if (in_collision(pose, e)) {
      const bool moving = s.x.q_dot.norm() > 1e-6;
      return {moving ? MotionCheck::CollisionMoving : MotionCheck::CollisionStopped, t};
    }
  }
  return {};
}

bool is_valid_motion(const trajectory::Spline& spline, double t_begin, double t_end, const Environment& env,
                     const kinematics::ChainModel& chain, double dt_check) {
  return check_motion(spline, t_begin, t_end, env, chain, dt_check).status == MotionCheck::Valid;
}

}  // namespace drgbt::sim
