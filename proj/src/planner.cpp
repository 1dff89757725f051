#include "drgbt/planner.hpp"

#include "drgbt/errors.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace drgbt::planner {

namespace {

constexpr double kZeroSpine = 1e-12;

bool same_config(const Configuration& a, const Configuration& b, double tol) { return (a - b).norm() <= tol; }

// A zero-length spine is bad unless the robot already sits on the node.
void classify(HorizonNode& node, const DrgbtParams& p) {
  if (node.d_c_local < p.d_crit) {
    node.state = NodeState::Critical;
  } else if (node.spine_length <= kZeroSpine && !same_config(node.reached, node.target, kZeroSpine)) {
    node.state = NodeState::Bad;
  } else {
    node.state = NodeState::Regular;
  }
}

HorizonNode random_node(const Configuration& q, cspace::Sampler& rng, const cspace::JointLimits& limits, double radius) {
  HorizonNode n;
  n.target = rng.sample_neighborhood(q, radius, limits);
  n.kind = NodeKind::Random;
  return n;
}

}  // namespace

const char* to_string(PlannerStatus s) {
  switch (s) {
    case PlannerStatus::Reached: return "reached";
    case PlannerStatus::Advanced: return "advanced";
    case PlannerStatus::Trapped: return "trapped";
  }
  return "?";
}

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Path: return "path";
    case NodeKind::Random: return "random";
    case NodeKind::Lateral: return "lateral";
  }
  return "?";
}

const char* to_string(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Advanced: return "advanced";
    case OutcomeKind::ReachedGoal: return "reached_goal";
    case OutcomeKind::CollisionI: return "collision_I";
    case OutcomeKind::CollisionII: return "collision_II";
    case OutcomeKind::Trapped: return "trapped";
  }
  return "?";
}

int Horizon::count(NodeKind k) const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [k](const HorizonNode& n) { return n.kind == k; }));
}

std::vector<double> Horizon::weights() const {
  std::vector<double> w;
  w.reserve(nodes.size());
  for (const auto& n : nodes) w.push_back(n.weight);
  return w;
}

LocalView compute_local_view(const kinematics::ChainModel& chain, const Configuration& q, const sim::Environment& env,
                             double d_max) {
  LocalView v;
  v.q = q;
  v.pose = kinematics::forward_kinematics_unchecked(chain, q);
  geometry::ProfileResult pr =
      geometry::compute_distance_profile(v.pose.link_capsules, env.obstacles, env.fixtures, d_max, nullptr,
                                         v.pose.self_gap);
  v.d = std::move(pr.profile);
  v.planes = std::move(pr.planes);
  v.radii = kinematics::enclosing_radii(v.pose);
  return v;
}

int horizon_size(double d_c, int N_h0, int n, double d_crit) {
  const int cap = n * N_h0;
  if (!(d_c > 0.0)) return cap;
  const double grown = std::floor(N_h0 * (1.0 + d_crit / d_c));
  return grown >= cap ? cap : static_cast<int>(grown);
}

Horizon generate_horizon(const Configuration& center, const Path& path, std::size_t marker, int N_h,
                         cspace::Sampler& rng, const cspace::JointLimits& limits, double radius) {
  Horizon h;
  h.N_h = N_h;
  for (std::size_t i = marker; i < path.size() && static_cast<int>(h.nodes.size()) < N_h; ++i) {
    HorizonNode n;
    n.target = path[i];
    n.kind = NodeKind::Path;
    h.nodes.push_back(std::move(n));
  }
  while (static_cast<int>(h.nodes.size()) < N_h) h.nodes.push_back(random_node(center, rng, limits, radius));
  return h;
}

std::vector<Configuration> lateral_targets(const Configuration& q_curr, const Eigen::VectorXd& direction, double spacing,
                                           cspace::Sampler& rng, const cspace::JointLimits& limits) {
  std::vector<Configuration> out;
  const Eigen::Index n = q_curr.size();
  if (n < 2 || direction.norm() <= 1e-12) return out;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(direction);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    out.push_back(limits.clamp(q_curr + sign * spacing * Q.col(k)));
  }
  return out;
}

void extend_node(HorizonNode& node, const LocalView& view, const bubbles::PoseFn& pose_fn, const DrgbtParams& p) {
  const bubbles::GeneralizedSpine gs = bubbles::extend_generalized_spine(view.q, node.target, view.d, view.radii,
                                                                         view.planes, pose_fn, p.spine_layers, p.d_max);
  node.reached = gs.q_reached;
  node.spine_length = (gs.q_reached - view.q).norm();
  node.d_c_local = gs.d_end.size() > 0 ? gs.d_end.d.minCoeff() : p.d_max;
  node.extended = true;
}

void update_horizon(Horizon& h, const LocalView& view, const std::optional<Configuration>& q_next_prev,
                    const bubbles::PoseFn& pose_fn, const DrgbtParams& p, const RobotModel& model,
                    cspace::Sampler& rng) {
  const int n = model.dof();
  const auto& limits = model.chain.joint_limits;
  const int N_h = horizon_size(view.d.d_c, p.N_h0, n, p.d_crit);
  // Random nodes are drawn around the previous target node when there is one.
  const Configuration& center = q_next_prev ? *q_next_prev : view.q;

  std::erase_if(h.nodes, [](const HorizonNode& node) { return node.kind == NodeKind::Lateral; });

  // Replace nodes found bad or critical in the previous iteration.
  for (auto& node : h.nodes) {
    if (!node.extended || node.state == NodeState::Regular) continue;
    HorizonNode cand;
    for (int attempt = 0; attempt < p.max_modify_attempts; ++attempt) {
      cand = random_node(center, rng, limits, p.neighborhood_radius);
      extend_node(cand, view, pose_fn, p);
      classify(cand, p);
      if (cand.state == NodeState::Regular) break;
    }
    node = std::move(cand);
  }

  while (h.non_lateral() < N_h) h.nodes.push_back(random_node(center, rng, limits, p.neighborhood_radius));
  while (h.non_lateral() > N_h) {
    auto victim = h.nodes.end();
    for (auto it = h.nodes.begin(); it != h.nodes.end(); ++it) {
      if (it->kind != NodeKind::Random) continue;
      if (victim == h.nodes.end() || it->weight < victim->weight) victim = it;
    }
    if (victim == h.nodes.end()) victim = std::prev(h.nodes.end());
    h.nodes.erase(victim);
  }

  Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
  if (q_next_prev) dir = *q_next_prev - view.q;
  if (dir.norm() <= 1e-12 && !h.nodes.empty()) dir = h.nodes.front().target - view.q;
  const double spacing = model.limits.omega_max.norm() * p.T;
  for (auto& t : lateral_targets(view.q, dir, spacing, rng, limits)) {
    HorizonNode node;
    node.target = std::move(t);
    node.kind = NodeKind::Lateral;
    h.nodes.push_back(std::move(node));
  }
  h.N_h = N_h;
}

double generate_gbur(Horizon& h, const LocalView& view, const bubbles::PoseFn& pose_fn, const DrgbtParams& p,
                     scheduler::BudgetClock& clock) {
  using Clock = std::chrono::steady_clock;
  double max_spine = 0.0;
  std::size_t done = 0;
  for (auto& node : h.nodes) {
    if (done > 0 && clock.expired()) break;
    clock.checkpoint();
    const auto start = Clock::now();
    extend_node(node, view, pose_fn, p);
    max_spine = std::max(max_spine, std::chrono::duration<double>(Clock::now() - start).count());
    ++done;
  }
  h.nodes.resize(done);
  return max_spine;
}

double node_weight(HorizonNode& node, const Configuration& q_curr, const Configuration& goal, const DrgbtParams& p) {
  classify(node, p);
  if (node.state != NodeState::Regular) {
    node.weight = 0.0;
    return 0.0;
  }
  const double p_dist = std::min(node.d_c_local / p.D_ref, 1.0);
  const double prev = node.d_c_prev.value_or(node.d_c_local);
  const double p_rate = 0.5 * (1.0 + std::tanh((node.d_c_local - prev) / p.d_crit));
  // Progress toward the goal relative to what one neighborhood step can achieve.
  const double to_goal = cspace::metric_rho(q_curr, goal);
  const double scale = std::min(to_goal, p.neighborhood_radius);
  const double progress = to_goal - cspace::metric_rho(node.reached, goal);
  const double p_goal = scale > 0.0 ? std::clamp(0.5 * (1.0 + progress / scale), 0.0, 1.0) : 1.0;
  node.weight = std::clamp(0.5 * p_dist + 0.25 * p_rate + 0.25 * p_goal, 0.0, 1.0);
  if (node.weight == 0.0) node.state = NodeState::Bad;
  return node.weight;
}

void compute_node_weights(Horizon& h, const Configuration& q_curr, const Configuration& goal, const DrgbtParams& p) {
  for (auto& node : h.nodes) node_weight(node, q_curr, goal, p);
}

NextState get_next_state(const Horizon& h, const Configuration& q_curr, const Configuration& goal) {
  NextState out;
  double best_w = 0.0;
  double best_goal = 0.0;
  for (std::size_t i = 0; i < h.nodes.size(); ++i) {
    const auto& node = h.nodes[i];
    if (!(node.weight > 0.0)) continue;
    const double to_goal = cspace::metric_rho(node.reached, goal);
    if (out.index < 0 || node.weight > best_w || (node.weight == best_w && to_goal < best_goal)) {
      out.index = static_cast<int>(i);
      best_w = node.weight;
      best_goal = to_goal;
    }
  }
  if (out.index < 0) {
    out.q_next = q_curr;
    out.status = PlannerStatus::Trapped;
  } else {
    out.q_next = h.nodes[static_cast<std::size_t>(out.index)].reached;
    out.status = PlannerStatus::Advanced;
  }
  return out;
}

bool whether_to_replan(const std::vector<double>& weights, const DrgbtParams& p) {
  if (weights.empty()) return true;
  const double w_max = *std::max_element(weights.begin(), weights.end());
  const double w_mean = std::accumulate(weights.begin(), weights.end(), 0.0) / static_cast<double>(weights.size());
  return w_max < p.w_min || w_mean < p.w_mean_min;
}

Path update_path(const Path& q_new, const Configuration& q_curr, double max_spacing) {
  if (!(max_spacing > 0.0)) throw Error("update_path: spacing must be positive");
  Path pts;
  pts.reserve(q_new.size() + 1);
  if (q_new.empty() || !same_config(q_new.front(), q_curr, 1e-12)) pts.push_back(q_curr);
  for (const auto& q : q_new) pts.push_back(q);
  pts.front() = q_curr;

  Path out{pts.front()};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Configuration& a = out.back();
    const Configuration& b = pts[i];
    const double len = (b - a).norm();
    if (len <= 1e-12) continue;
    const auto pieces = static_cast<int>(std::max(1.0, std::ceil(len / max_spacing - 1e-12)));
    const Configuration start = a;
    for (int k = 1; k <= pieces; ++k) {
      out.push_back(k == pieces ? b : cspace::interpolate(start, b, static_cast<double>(k) / pieces));
    }
  }
  return out;
}

StateUpdate update_curr_state(const ExtendedConfiguration& x_curr, const NextState& next, const Configuration& goal,
                              const RobotModel& model, const DrgbtParams& p, const LocalView& view,
                              const bubbles::PoseFn& pose_fn) {
  const auto& lim = model.limits;
  const trajectory::FitOptions fit{p.dt};
  const bool trapped = next.status == PlannerStatus::Trapped;
  const bool to_goal = same_config(next.q_next, goal, p.goal_tolerance);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(x_curr.dof());
  StateUpdate out;
  out.target = next.q_next;

  if (!p.safe_on) {
    Eigen::VectorXd vf = (trapped || to_goal) ? zero : trajectory::estimate_final_velocity(x_curr, next.q_next, lim, p.T);
    try {
      out.spline = trajectory::fit_quintic(x_curr, next.q_next, vf, lim, fit);
      if (out.spline.tf() <= p.T && !vf.isZero(0.0)) {
        // Arriving within the period: stop at q_next instead of overshooting.
        out.spline = trajectory::fit_quintic(x_curr, next.q_next, zero, lim, fit);
      }
    } catch (const Infeasible&) {
      out.spline = trajectory::fit_emergency_quartic(x_curr, lim, fit);
      out.status = PlannerStatus::Trapped;
      return out;
    }
    out.status = trapped ? PlannerStatus::Trapped
                         : (out.spline.tf() <= p.T ? PlannerStatus::Reached : PlannerStatus::Advanced);
    return out;
  }

  const double t_new = p.T + p.e1;
  const bubbles::DgburOptions opt{p.dt, p.dgbur_layers, p.d_max};
  const auto certify = [&](const trajectory::Spline& s) {
    return bubbles::compute_dgbur(s, view.d, view.planes, pose_fn, p.v_obs, opt).complete;
  };

  if (!trapped) {
    Configuration target = next.q_next;
    for (int iter = 0; iter <= p.max_bisection_iters; ++iter) {
      try {
        const trajectory::Spline head = trajectory::fit_quintic(x_curr, target, zero, lim, fit);
        trajectory::Spline comp = trajectory::make_composite(head, t_new, lim, fit);
        if (certify(comp)) {
          out.certified = true;
          out.spline = std::move(comp);
          out.target = target;
          out.status = (iter == 0 && head.tf() <= p.T) ? PlannerStatus::Reached : PlannerStatus::Advanced;
          return out;
        }
      } catch (const Infeasible&) {
      }
      if (iter == p.max_bisection_iters) break;
      target = cspace::interpolate(x_curr.q, target, 0.5);
      ++out.bisections;
    }
  }

  // Stop as soon as possible.
  out.status = PlannerStatus::Trapped;
  out.target = x_curr.q;
  try {
    trajectory::Spline stop = trajectory::fit_emergency_quartic(x_curr, lim, fit);
    if (certify(stop)) {
      out.certified = true;
      out.spline = std::move(stop);
    }
  } catch (const Infeasible&) {
  }
  return out;
}

Planner::Planner(const RobotModel& model, const DrgbtParams& params, const Configuration& start,
                 const Configuration& goal, std::uint64_t seed)
    : model_(model), planning_(model.inflated(params.planning_margin)), params_(params), goal_(goal), rng_(seed) {
  if (start.size() != model.dof() || goal.size() != model.dof()) throw DimensionMismatch("Planner: start/goal size");
  pose_fn_ = [chain = planning_.chain](const Configuration& q) {
    return kinematics::forward_kinematics_unchecked(chain, q);
  };
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(start.size());
  active_ = trajectory::quintic_with_duration(ExtendedConfiguration::at_rest(start), start, zero, zero, params_.dt);
  traversed_.push_back(start);
}

ExtendedConfiguration Planner::state() const { return active_.evaluate_clamped(offset_).x; }

void Planner::adopt(trajectory::Spline s) {
  active_ = std::move(s);
  offset_ = 0.0;
  if (record_) recorded_.push_back(active_);
}

void Planner::install_path(const Path& raw) {
  const double spacing = model_.limits.omega_max.norm() * params_.T;
  path_ = update_path(raw, state().q, spacing);
  marker_ = std::min<std::size_t>(1, path_.size() - 1);
  horizon_stale_ = true;
}

IterationOutcome Planner::step(const sim::Environment& env, scheduler::BudgetClock& clock,
                               scheduler::IterationTiming& timing) {
  using scheduler::ScopedTimer;
  IterationOutcome out;
  const ExtendedConfiguration x = state();
  const auto& limits = planning_.chain.joint_limits;

  LocalView view;
  {
    ScopedTimer t(timing.compute_distances);
    view = compute_local_view(planning_.chain, x.q, env, params_.d_max);
  }
  out.d_c = view.d.d_c;
  {
    ScopedTimer t(timing.generate_horizon);
    if (horizon_stale_ || status_ != PlannerStatus::Advanced) {
      const int N_h = horizon_size(view.d.d_c, params_.N_h0, model_.dof(), params_.d_crit);
      horizon_ = generate_horizon(q_next_prev_ ? *q_next_prev_ : x.q, path_, marker_, N_h, rng_, limits,
                                  params_.neighborhood_radius);
      horizon_stale_ = false;
    }
  }
  {
    ScopedTimer t(timing.update_horizon);
    update_horizon(horizon_, view, q_next_prev_, pose_fn_, params_, planning_, rng_);
  }
  out.N_h = horizon_.N_h;
  {
    ScopedTimer t(timing.generate_gbur);
    timing.max_spine = std::max(timing.max_spine, generate_gbur(horizon_, view, pose_fn_, params_, clock));
  }
  out.horizon_nodes = static_cast<int>(horizon_.nodes.size());

  NextState next;
  {
    ScopedTimer t(timing.weights_next_state);
    compute_node_weights(horizon_, x.q, goal_, params_);
    next = get_next_state(horizon_, x.q, goal_);
  }
  const std::vector<double> w = horizon_.weights();
  if (!w.empty()) {
    out.weight_max = *std::max_element(w.begin(), w.end());
    out.weight_mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
  }

  StateUpdate su;
  {
    ScopedTimer t(timing.update_curr_state);
    su = update_curr_state(x, next, goal_, model_, params_, view, pose_fn_);
  }
  out.bisections = su.bisections;
  if (params_.safe_on && !su.certified) {
    out.fallback = true;
    status_ = PlannerStatus::Trapped;
  } else {
    adopt(std::move(su.spline));
    status_ = su.status;
  }
  q_next_prev_ = next.q_next;

  sim::MotionResult motion;
  {
    ScopedTimer t(timing.is_valid);
    motion = sim::check_motion(active_, offset_, offset_ + params_.T, env, model_.chain, params_.dt_check);
  }
  offset_ += params_.T;
  const ExtendedConfiguration x_end = state();
  traversed_.push_back(x_end.q);

  for (auto& node : horizon_.nodes) node.d_c_prev = node.d_c_local;

  if (!path_.empty()) {
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < path_.size(); ++i) {
      const double d = (path_[i] - x_end.q).norm();
      if (d < best) {
        best = d;
        nearest = i;
      }
    }
    const std::size_t m = std::max(marker_, std::min(nearest + 1, path_.size() - 1));
    // Path nodes in the horizon are behind the robot once the marker moves.
    if (m != marker_) horizon_stale_ = true;
    marker_ = m;
  }

  if (whether_to_replan(w, params_) || status_ == PlannerStatus::Trapped) replanning_ = true;
  out.replan_requested = replanning_;
  out.status = status_;

  const bool at_goal = same_config(x_end.q, goal_, params_.goal_tolerance) && x_end.q_dot.norm() <= 1e-9;
  if (motion.status == sim::MotionCheck::CollisionMoving) {
    out.kind = OutcomeKind::CollisionI;
  } else if (motion.status == sim::MotionCheck::CollisionStopped) {
    out.kind = OutcomeKind::CollisionII;
  } else if ((status_ == PlannerStatus::Reached && same_config(su.target, goal_, params_.goal_tolerance)) || at_goal) {
    out.kind = OutcomeKind::ReachedGoal;
  } else if (status_ == PlannerStatus::Trapped) {
    out.kind = OutcomeKind::Trapped;
  } else {
    out.kind = OutcomeKind::Advanced;
  }
  return out;
}

}  // namespace drgbt::planner
