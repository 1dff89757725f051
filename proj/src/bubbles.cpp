#include "drgbt/bubbles.hpp"

#include "drgbt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drgbt::bubbles {

bool DynamicExpandedBubble::nonempty() const {
  if (d.size() == 0) return false;
  if ((d.d.array() <= 0.0).any()) return false;
  if (d.has_fixed() && (d.d_fixed.array() <= 0.0).any()) return false;
  for (const auto& s : d.self) {
    if (s.distance <= 0.0) return false;
  }
  return true;
}

bool deb_contains(const DynamicExpandedBubble& deb, const Configuration& y, double t) {
  const Eigen::VectorXd dq = y - deb.root;
  const int n = deb.radii.dof();
  const double shrink = deb.v_obs * t;
  for (int i = 0; i < n; ++i) {
    const double rho = deb.radii.rho_bar(i, dq);
    if (rho + shrink > deb.d.d[i]) return false;
    if (deb.d.has_fixed() && rho > deb.d.d_fixed[i]) return false;
  }
  for (const auto& s : deb.d.self) {
    if (deb.radii.rho_relative(s.a, s.b, dq) > s.distance) return false;
  }
  return true;
}

std::vector<double> bur_times(const trajectory::Spline& traj, double dt) {
  if (!(dt > 0.0)) throw Error("bur_times: dt must be positive");
  const double t0 = traj.t0();
  const double tf = traj.tf();
  std::vector<double> times;
  const auto steps = static_cast<long>(std::floor((tf - t0) / dt));
  times.reserve(static_cast<std::size_t>(steps) + 4);
  for (long k = 0; k <= steps; ++k) times.push_back(t0 + static_cast<double>(k) * dt);
  for (double tj : traj.junctions()) times.push_back(tj);
  times.push_back(tf);
  std::sort(times.begin(), times.end());
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    if (t > tf) continue;
    if (!out.empty() && t - out.back() <= 1e-12) {
      // Keep junctions and the final time exact.
      if (t == tf) out.back() = tf;
      continue;
    }
    out.push_back(t);
  }
  return out;
}

namespace {

// Accepts nodes times[from..] while they stay inside `deb` rooted at times[from].
std::vector<BurNode> walk(const trajectory::Spline& traj, const std::vector<double>& times, std::size_t from,
                          const DynamicExpandedBubble& deb) {
  std::vector<BurNode> accepted;
  const double t_root = times[from];
  const double v = deb.v_obs;
  const double d_min = deb.d.d.size() > 0 ? deb.d.d.minCoeff() : std::numeric_limits<double>::infinity();
  if (!deb.nonempty()) return accepted;
  for (std::size_t k = from; k < times.size(); ++k) {
    const double elapsed = times[k] - t_root;
    if (!(v * elapsed < d_min)) break;
    Configuration q = traj.position(times[k]);
    if (!deb_contains(deb, q, elapsed)) break;
    accepted.push_back({std::move(q), times[k]});
  }
  return accepted;
}

}  // namespace

DynamicBur compute_dbur(const trajectory::Spline& traj, double dt, const DistanceProfile& d0,
                        const EnclosingRadii& radii, double v_obs) {
  const std::vector<double> times = bur_times(traj, dt);
  DynamicBur bur;
  bur.bubble = {traj.position(traj.t0()), d0, radii, v_obs};
  bur.t_root = traj.t0();
  bur.spines = walk(traj, times, 0, bur.bubble);
  return bur;
}

DynamicGeneralizedBur compute_dgbur(const trajectory::Spline& traj, const DistanceProfile& d0, const PlaneSet& planes0,
                                    const PoseFn& pose_fn, double v_obs, const DgburOptions& opt) {
  if (opt.max_layers < 1) throw Error("compute_dgbur: at least one layer required");
  const std::vector<double> times = bur_times(traj, opt.dt);
  DynamicGeneralizedBur out;

  Configuration q_root = traj.position(times.front());
  kinematics::RobotPose pose = pose_fn(q_root);
  DistanceProfile d = d0;
  PlaneSet planes = planes0;
  std::size_t from = 0;
  double t_prev = times.front();

  for (int layer = 0; layer < opt.max_layers; ++layer) {
    DynamicBur bur;
    bur.bubble = {q_root, d, kinematics::enclosing_radii(pose), v_obs};
    bur.t_root = times[from];
    bur.first_index = from;
    bur.spines = walk(traj, times, from, bur.bubble);
    if (bur.spines.empty()) break;
    const std::size_t last = from + bur.spines.size() - 1;
    out.covered_time = times[last];
    const bool progressed = last > from;
    out.burs.push_back(std::move(bur));
    if (last + 1 == times.size()) {
      out.complete = true;
      break;
    }
    if (!progressed) break;

    const double t_m = times[last];
    q_root = out.burs.back().spines.back().q;
    planes = geometry::update_planes(planes, t_m - t_prev, v_obs);
    pose = pose_fn(q_root);
    d = geometry::distance_to_planes(pose.link_capsules, planes, opt.d_max, pose.self_gap);
    t_prev = t_m;
    from = last;
  }
  return out;
}

SpineResult extend_spine(const Configuration& q, const Eigen::VectorXd& direction, const DistanceProfile& d,
                         const EnclosingRadii& radii, const std::optional<Configuration>& target) {
  const double norm = direction.norm();
  if (!(norm > 1e-12)) throw ZeroDirection("extend_spine: zero direction");
  const Eigen::VectorXd e = direction / norm;
  const Eigen::VectorXd abs_e = e.cwiseAbs();
  const int n = radii.dof();

  double step = std::numeric_limits<double>::infinity();
  const auto bound = [&step](double clearance, double rate) {
    if (clearance <= 0.0) {
      step = 0.0;
    } else if (rate > 0.0) {
      step = std::min(step, clearance / rate);
    }
  };
  for (int i = 0; i < n; ++i) {
    const double rate = radii.rho_bar(i, abs_e);
    bound(d.d[i], rate);
    if (d.has_fixed()) bound(d.d_fixed[i], rate);
  }
  for (const auto& s : d.self) bound(s.distance, radii.rho_relative(s.a, s.b, abs_e));

  if (target) {
    const double to_target = (*target - q).norm();
    if (step >= to_target) return {*target, to_target};
  }
  if (!std::isfinite(step)) throw Error("extend_spine: unbounded step without a target");
  return {q + step * e, step};
}

GeneralizedSpine extend_generalized_spine(const Configuration& q, const Configuration& target,
                                          const DistanceProfile& d_root, const EnclosingRadii& radii_root,
                                          const PlaneSet& planes, const PoseFn& pose_fn, int max_layers,
                                          double d_max) {
  GeneralizedSpine out;
  out.q_reached = q;
  out.d_end = d_root;
  if ((target - q).norm() <= 1e-12) {
    out.reached_target = true;
    return out;
  }
  const Eigen::VectorXd dir = target - q;
  DistanceProfile d = d_root;
  EnclosingRadii radii = radii_root;
  for (int layer = 0; layer < max_layers; ++layer) {
    const SpineResult sr = extend_spine(out.q_reached, dir, d, radii, target);
    const bool at_target = sr.q_reached == target;
    if (sr.step <= 1e-9 && !at_target) break;
    out.q_reached = sr.q_reached;
    out.length += sr.step;
    out.layers = layer + 1;
    const kinematics::RobotPose pose = pose_fn(out.q_reached);
    d = geometry::distance_to_planes(pose.link_capsules, planes, d_max, pose.self_gap);
    out.d_end = d;
    if (at_target || (target - out.q_reached).norm() <= 1e-12) {
      out.reached_target = true;
      break;
    }
    radii = kinematics::enclosing_radii(pose);
  }
  return out;
}

std::vector<SliceSample> deb_slice(const DynamicExpandedBubble& deb, int axis_a, int axis_b, double lo_a,
                                   double hi_a, double lo_b, double hi_b, int resolution,
                                   const std::vector<double>& velocities,
                                   const std::function<double(const Configuration&)>& time_of) {
  std::vector<SliceSample> out;
  out.reserve(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution) * velocities.size());
  DynamicExpandedBubble b = deb;
  const auto coord = [resolution](double lo, double hi, int k) {
    return resolution == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(resolution - 1);
  };
  for (double v : velocities) {
    b.v_obs = v;
    for (int ia = 0; ia < resolution; ++ia) {
      for (int ib = 0; ib < resolution; ++ib) {
        Configuration y = deb.root;
        y[axis_a] = coord(lo_a, hi_a, ia);
        y[axis_b] = coord(lo_b, hi_b, ib);
        out.push_back({y[axis_a], y[axis_b], v, deb_contains(b, y, time_of(y))});
      }
    }
  }
  return out;
}

}  // namespace drgbt::bubbles
