#include "drgbt/errors.hpp"
#include "drgbt/planner.hpp"
#include "drgbt/robot.hpp"
#include "drgbt/sim.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace drgbt;
using namespace drgbt::planner;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

cspace::JointLimits wide(int n) {
  return {Eigen::VectorXd::Constant(n, -std::numbers::pi), Eigen::VectorXd::Constant(n, std::numbers::pi)};
}

Path line_path(int nodes) {
  Path p;
  for (int i = 0; i < nodes; ++i) p.push_back(vec({0.1 * i, 0.0}));
  return p;
}

bubbles::PoseFn pose_fn_of(const RobotModel& m) {
  return [chain = m.chain](const Configuration& q) { return kinematics::forward_kinematics_unchecked(chain, q); };
}

geometry::Box box_at(double x, double y, double half) {
  geometry::Box b;
  b.center = {x, y, 0};
  b.half_extents = geometry::Vec3::Constant(half);
  return b;
}

}  // namespace

TEST(HorizonSize, Examples) {
  EXPECT_EQ(horizon_size(0.1, 10, 6, 0.05), 15);
  EXPECT_EQ(horizon_size(10.0, 10, 6, 0.05), 10);
  EXPECT_EQ(horizon_size(0.01, 10, 6, 0.05), 60);
  EXPECT_EQ(horizon_size(0.0, 10, 6, 0.05), 60);
  EXPECT_EQ(horizon_size(-0.2, 10, 6, 0.05), 60);
}

TEST(HorizonSize, MatchesOracle) {
  oracle::Gen g(101);
  for (int k = 0; k < 1000; ++k) {
    const double d_c = g.coin(0.1) ? g.uniform(-0.1, 0.0) : g.uniform(1e-4, 2.0);
    const int N_h0 = g.integer(1, 30), n = g.integer(1, 7);
    ASSERT_EQ(horizon_size(d_c, N_h0, n, 0.05), oracle::horizon_size(d_c, N_h0, n, 0.05L)) << d_c;
  }
}

TEST(GenerateHorizon, Examples) {
  cspace::Sampler rng(1);
  const Path path = line_path(20);
  Horizon h = generate_horizon(vec({0, 0}), path, 2, 10, rng, wide(2), 1.0);
  ASSERT_EQ(h.nodes.size(), 10u);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(h.nodes[static_cast<std::size_t>(i)].kind, NodeKind::Path);
    EXPECT_EQ(h.nodes[static_cast<std::size_t>(i)].target, path[static_cast<std::size_t>(i + 2)]);
  }
  h = generate_horizon(vec({0, 0}), path, 15, 10, rng, wide(2), 1.0);
  EXPECT_EQ(h.count(NodeKind::Path), 5);
  EXPECT_EQ(h.count(NodeKind::Random), 5);
  h = generate_horizon(vec({0, 0}), path, 14, 10, rng, wide(2), 1.0);
  EXPECT_EQ(h.count(NodeKind::Path), 6);
  EXPECT_EQ(h.count(NodeKind::Random), 4);
  h = generate_horizon(vec({0.5, 0.5}), {}, 0, 10, rng, wide(2), 0.3);
  EXPECT_EQ(h.count(NodeKind::Random), 10);
  for (const auto& n : h.nodes) EXPECT_LE((n.target - vec({0.5, 0.5})).norm(), 0.3 + 1e-12);
}

TEST(LateralTargets, OrthogonalAtSpacing) {
  cspace::Sampler rng(3);
  oracle::Gen g(5);
  for (int k = 0; k < 200; ++k) {
    const int n = g.integer(2, 6);
    const Eigen::VectorXd q = g.vec(n, -0.5, 0.5), dir = g.vec(n, -1, 1);
    const auto t = lateral_targets(q, dir, 0.2, rng, wide(n));
    ASSERT_EQ(static_cast<int>(t.size()), n - 1);
    for (std::size_t a = 0; a < t.size(); ++a) {
      ASSERT_NEAR((t[a] - q).norm(), 0.2, 1e-12);
      ASSERT_NEAR((t[a] - q).dot(dir), 0.0, 1e-12);
      for (std::size_t b = a + 1; b < t.size(); ++b) ASSERT_NEAR((t[a] - q).dot(t[b] - q), 0.0, 1e-12);
    }
  }
  EXPECT_TRUE(lateral_targets(vec({0}), vec({1}), 0.2, rng, wide(1)).empty());
}

TEST(GenerateGbur, BudgetAndClamping) {
  const auto model = planar_robot({1.0, 1.0}, 0.05);
  sim::Environment env;
  env.obstacles.push_back(box_at(0.0, 1.6, 0.1));
  const auto view = compute_local_view(model.chain, vec({0, 0}), env, 10.0);
  const auto pf = pose_fn_of(model);
  DrgbtParams p;
  cspace::Sampler rng(2);
  Horizon h = generate_horizon(view.q, {}, 0, 8, rng, model.chain.joint_limits, 1.0);
  h.nodes[0].target = vec({0.01, -0.01});  // well inside the first bubble
  auto unlimited = scheduler::BudgetClock::unlimited();
  Horizon all = h;
  generate_gbur(all, view, pf, p, unlimited);
  ASSERT_EQ(all.nodes.size(), 8u);
  for (const auto& n : all.nodes) EXPECT_TRUE(n.extended);
  EXPECT_EQ(all.nodes[0].reached, all.nodes[0].target);
  auto three = scheduler::BudgetClock::virtual_units(3);
  generate_gbur(h, view, pf, p, three);
  EXPECT_EQ(h.nodes.size(), 3u);
  // At least one spine even with no budget.
  Horizon one = generate_horizon(view.q, {}, 0, 4, rng, model.chain.joint_limits, 1.0);
  auto none = scheduler::BudgetClock::virtual_units(0);
  generate_gbur(one, view, pf, p, none);
  EXPECT_EQ(one.nodes.size(), 1u);
}

TEST(NodeWeight, Examples) {
  DrgbtParams p;
  HorizonNode crit;
  crit.d_c_local = 0.01;
  crit.spine_length = 0.3;
  crit.reached = vec({1, 0});
  EXPECT_EQ(node_weight(crit, vec({0, 0}), vec({1, 0}), p), 0.0);
  EXPECT_EQ(crit.state, NodeState::Critical);

  for (double d : {0.1, 0.25, 0.4, 2.0}) {
    HorizonNode n;
    n.d_c_local = d;
    n.d_c_prev = d;
    n.spine_length = 0.5;
    n.reached = vec({0.5, 0});  // on the straight line, covers the goal distance
    const double w = node_weight(n, vec({0, 0}), vec({0.5, 0}), p);
    EXPECT_NEAR(w, 0.5 * std::min(d / p.D_ref, 1.0) + 0.375, 1e-12);
    EXPECT_EQ(n.state, NodeState::Regular);
  }

  HorizonNode zero;
  zero.d_c_local = 1.0;
  zero.spine_length = 0.0;
  zero.reached = vec({0, 0});
  zero.target = vec({0.5, 0});
  EXPECT_EQ(node_weight(zero, vec({0, 0}), vec({1, 0}), p), 0.0);
  EXPECT_EQ(zero.state, NodeState::Bad);

  // Already on the goal node: usable, full goal term.
  HorizonNode there;
  there.d_c_local = 1.0;
  there.d_c_prev = 1.0;
  there.spine_length = 0.0;
  there.reached = vec({1, 0});
  there.target = vec({1, 0});
  EXPECT_NEAR(node_weight(there, vec({1, 0}), vec({1, 0}), p), 0.875, 1e-12);
  EXPECT_EQ(there.state, NodeState::Regular);
}

TEST(NodeWeight, InUnitInterval) {
  oracle::Gen g(7);
  DrgbtParams p;
  for (int k = 0; k < 2000; ++k) {
    HorizonNode n;
    n.d_c_local = g.uniform(-0.5, 3.0);
    if (g.coin()) n.d_c_prev = g.uniform(-0.5, 3.0);
    n.spine_length = g.coin(0.1) ? 0.0 : g.uniform(0, 2);
    n.reached = g.vec(3, -3, 3);
    n.target = g.coin(0.1) ? n.reached : g.vec(3, -3, 3);
    const double w = node_weight(n, g.vec(3, -3, 3), g.vec(3, -3, 3), p);
    ASSERT_GE(w, 0.0);
    ASSERT_LE(w, 1.0);
    if (n.state != NodeState::Regular) ASSERT_EQ(w, 0.0);
  }
}

TEST(NextState, Examples) {
  Horizon h;
  for (int i = 0; i < 3; ++i) {
    HorizonNode n;
    n.reached = vec({double(i), 0});
    h.nodes.push_back(n);
  }
  h.nodes[0].weight = 0.2;
  h.nodes[1].weight = 0.7;
  h.nodes[2].weight = 0.4;
  auto next = get_next_state(h, vec({0, 0}), vec({5, 0}));
  EXPECT_EQ(next.index, 1);
  EXPECT_EQ(next.status, PlannerStatus::Advanced);
  h.nodes[2].weight = 0.7;
  EXPECT_EQ(get_next_state(h, vec({0, 0}), vec({5, 0})).index, 2);
  EXPECT_EQ(get_next_state(h, vec({0, 0}), vec({-5, 0})).index, 1);
  for (auto& n : h.nodes) n.weight = 0.0;
  next = get_next_state(h, vec({0.3, 0.1}), vec({5, 0}));
  EXPECT_EQ(next.status, PlannerStatus::Trapped);
  EXPECT_EQ(next.q_next, vec({0.3, 0.1}));
  EXPECT_EQ(get_next_state(Horizon{}, vec({0, 0}), vec({1, 1})).status, PlannerStatus::Trapped);
}

// The chosen node always carries the maximum weight.
TEST(NextState, PicksArgmax) {
  oracle::Gen g(9);
  for (int k = 0; k < 500; ++k) {
    Horizon h;
    const int m = g.integer(1, 12);
    for (int i = 0; i < m; ++i) {
      HorizonNode n;
      n.reached = g.vec(2, -1, 1);
      n.weight = g.coin(0.2) ? 0.0 : std::round(g.uniform(0, 1) * 4) / 4;
      h.nodes.push_back(n);
    }
    const auto w = h.weights();
    const double w_max = *std::max_element(w.begin(), w.end());
    const auto next = get_next_state(h, vec({0, 0}), vec({1, 1}));
    if (w_max == 0.0) {
      ASSERT_EQ(next.status, PlannerStatus::Trapped);
    } else {
      ASSERT_EQ(h.nodes[static_cast<std::size_t>(next.index)].weight, w_max);
      ASSERT_EQ(next.q_next, h.nodes[static_cast<std::size_t>(next.index)].reached);
    }
  }
}

TEST(WhetherToReplan, Examples) {
  DrgbtParams p;
  EXPECT_FALSE(whether_to_replan({0.6, 0.6, 0.6}, p));
  EXPECT_TRUE(whether_to_replan({0.2, 0.2, 0.2}, p));
  EXPECT_TRUE(whether_to_replan({0.9, 0.0, 0.0}, p));
  EXPECT_TRUE(whether_to_replan({}, p));
}

TEST(UpdatePath, Subdivision) {
  const Path out = update_path({vec({0}), vec({2})}, vec({0}), 0.385);
  ASSERT_EQ(out.size(), 7u);
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_LE((out[i] - out[i - 1]).norm(), 0.385 + 1e-12);
  EXPECT_EQ(out.back(), vec({2}));
  const Path fine = update_path({vec({0, 0}), vec({0.1, 0}), vec({0.2, 0.1})}, vec({0, 0}), 0.5);
  ASSERT_EQ(fine.size(), 3u);
  EXPECT_EQ(fine[1], vec({0.1, 0}));
  EXPECT_THROW(update_path({vec({0})}, vec({0}), 0.0), Error);
}

TEST(UpdatePath, PreservesPolyline) {
  oracle::Gen g(13);
  for (int k = 0; k < 300; ++k) {
    const int n = g.integer(1, 6);
    Path raw;
    const int m = g.integer(1, 6);
    for (int i = 0; i < m; ++i) raw.push_back(g.vec(n, -2, 2));
    const Configuration q = raw.front();
    const double spacing = g.uniform(0.05, 1.0);
    const Path out = update_path(raw, q, spacing);
    double len_in = 0.0, len_out = 0.0;
    for (std::size_t i = 1; i < raw.size(); ++i) len_in += (raw[i] - raw[i - 1]).norm();
    for (std::size_t i = 1; i < out.size(); ++i) {
      len_out += (out[i] - out[i - 1]).norm();
      ASSERT_LE((out[i] - out[i - 1]).norm(), spacing + 1e-12);
    }
    ASSERT_NEAR(len_in, len_out, 1e-9);
    ASSERT_EQ(out.front(), q);
    ASSERT_EQ(out.back(), raw.back());
  }
}

TEST(UpdateCurrState, SafeFreeSpaceCertified) {
  const auto model = planar_robot({1.0, 1.0}, 0.05);
  sim::Environment env;
  const auto view = compute_local_view(model.chain, vec({0, 0}), env, 10.0);
  DrgbtParams p;
  p.safe_on = true;
  p.v_obs = 1.0;
  NextState next{vec({0.3, 0.2}), PlannerStatus::Advanced, 0};
  const auto su = update_curr_state(cspace::ExtendedConfiguration::at_rest(vec({0, 0})), next, vec({1, 1}), model, p,
                                    view, pose_fn_of(model));
  EXPECT_TRUE(su.certified);
  EXPECT_EQ(su.bisections, 0);
  EXPECT_NE(su.status, PlannerStatus::Trapped);
  EXPECT_TRUE(su.spline.evaluate(su.spline.tf()).x.q_dot.isZero(1e-9));
  EXPECT_TRUE(trajectory::check_limits(su.spline, model.limits, 1e-4));
}

TEST(UpdateCurrState, TrappedStops) {
  const auto model = planar_robot({1.0, 1.0}, 0.05);
  sim::Environment env;
  const cspace::ExtendedConfiguration x{vec({0, 0}), vec({1.0, -0.5}), vec({0, 0})};
  const auto view = compute_local_view(model.chain, x.q, env, 10.0);
  for (bool safe : {false, true}) {
    DrgbtParams p;
    p.safe_on = safe;
    const NextState next{x.q, PlannerStatus::Trapped, -1};
    const auto su = update_curr_state(x, next, vec({1, 1}), model, p, view, pose_fn_of(model));
    EXPECT_EQ(su.status, PlannerStatus::Trapped);
    EXPECT_TRUE(su.spline.evaluate(su.spline.tf()).x.q_dot.isZero(1e-9));
    EXPECT_TRUE(trajectory::check_limits(su.spline, model.limits, 1e-4));
  }
}

// Moving toward a box near link 2: the full step cannot be certified, a
// bisected one stops short of the box.
TEST(UpdateCurrState, SafeBisectionStopsBeforeWall) {
  const auto model = planar_robot({1.0, 1.0}, 0.05);
  sim::Environment env;
  env.obstacles.push_back(box_at(1.95, 0.5, 0.05));
  const cspace::ExtendedConfiguration x{vec({0, 0}), vec({1.5, 0}), vec({0, 0})};
  const auto view = compute_local_view(model.chain, x.q, env, 10.0);
  DrgbtParams p;
  p.safe_on = true;
  p.v_obs = 0.0;
  const NextState next{vec({1.2, 0}), PlannerStatus::Advanced, 0};
  const auto su = update_curr_state(x, next, vec({1.2, 0}), model, p, view, pose_fn_of(model));
  ASSERT_TRUE(su.certified);
  EXPECT_GT(su.bisections, 0);
  EXPECT_LT(su.target[0], 1.2);
  const auto boxes = oracle::all_boxes(env);
  for (double t = 0.0; t <= su.spline.tf(); t += 1e-3) {
    const auto pose = kinematics::forward_kinematics_unchecked(model.chain, su.spline.evaluate(t).x.q);
    ASSERT_GE(oracle::pose_clearance(pose, boxes).obstacles, 0.0) << t;
  }
}

TEST(Planner, FreeSpaceReachesGoal) {
  const auto model = planar_robot({1.0, 1.0}, 0.05);
  for (bool safe : {false, true}) {
    DrgbtParams p;
    p.safe_on = safe;
    const Configuration start = vec({-1.0, 0.5}), goal = vec({1.2, -0.7});
    Planner pl(model, p, start, goal, 11);
    pl.install_path({start, goal});
    sim::Environment env;
    bool reached = false;
    int iters = 0;
    const double step_bound = model.limits.omega_max.norm() * p.T + 1e-9;
    while (!reached && iters < 400) {
      auto clock = scheduler::BudgetClock::virtual_units(300);
      scheduler::IterationTiming timing;
      const auto out = pl.step(env, clock, timing);
      ++iters;
      ASSERT_NE(out.kind, OutcomeKind::CollisionI);
      ASSERT_NE(out.kind, OutcomeKind::CollisionII);
      reached = out.kind == OutcomeKind::ReachedGoal;
      const auto& tr = pl.traversed();
      ASSERT_LE((tr[tr.size() - 1] - tr[tr.size() - 2]).norm(), step_bound);
    }
    EXPECT_TRUE(reached) << "safe=" << safe;
    EXPECT_LT(iters, 400);
  }
}
