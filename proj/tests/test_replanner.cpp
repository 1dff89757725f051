#include "drgbt/replanner.hpp"
#include "drgbt/robot.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace drgbt;
using replanner::Replanner;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

geometry::Box box_at(double x, double y, double half) {
  geometry::Box b;
  b.center = {x, y, 0};
  b.half_extents = geometry::Vec3::Constant(half);
  return b;
}

// Two boxes leave a 0.6 m gap on the x axis; sweeping the straight arm from
// one side to the other hits them.
sim::Environment gap_env() {
  sim::Environment env;
  env.planar = true;
  env.obstacles.push_back(box_at(1.5, 0.6, 0.3));
  env.obstacles.push_back(box_at(1.5, -0.6, 0.3));
  return env;
}

void expect_endpoints(const planner::Path& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  ASSERT_GE(p.size(), 2u);
  EXPECT_LE((p.front() - a).norm(), 1e-12);
  EXPECT_LE((p.back() - b).norm(), 1e-12);
}

}  // namespace

TEST(Replanner, EmptyEnvironment) {
  const auto model = planar_robot({1.0, 1.0}, 0.05);
  Replanner rp(model, {}, 1);
  auto clock = scheduler::BudgetClock::virtual_units(1000);
  const auto path = rp.replan(vec({-1.0, 0.3}), vec({1.5, -0.4}), sim::Environment{}, clock);
  ASSERT_TRUE(path.has_value());
  expect_endpoints(*path, vec({-1.0, 0.3}), vec({1.5, -0.4}));
  EXPECT_TRUE(oracle::path_collision_free(model.chain, *path, sim::Environment{}, 1e-2));
  EXPECT_LE(rp.last_stats().iterations, 3);
}

TEST(Replanner, ZeroBudget) {
  const auto model = planar_robot({1.0, 1.0}, 0.05);
  Replanner rp(model, {}, 1);
  auto clock = scheduler::BudgetClock::virtual_units(0);
  EXPECT_FALSE(rp.replan(vec({-1.0, 0.3}), vec({1.5, -0.4}), sim::Environment{}, clock).has_value());
}

TEST(Replanner, EndpointInContact) {
  const auto model = planar_robot({1.0, 1.0}, 0.05);
  sim::Environment env;
  env.obstacles.push_back(box_at(2.0, 0.0, 0.2));
  Replanner rp(model, {}, 1);
  auto clock = scheduler::BudgetClock::unlimited();
  EXPECT_FALSE(rp.replan(vec({0.0, 0.0}), vec({1.5, -0.4}), env, clock).has_value());
}

TEST(Replanner, NarrowGapPassesOracle) {
  const auto model = planar_robot({1.0, 1.0}, 0.05);
  const auto env = gap_env();
  const Eigen::VectorXd a = vec({-1.0, 0.0}), b = vec({1.0, 0.0});
  ASSERT_FALSE(oracle::path_collision_free(model.chain, {a, b}, env, 1e-2));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Replanner rp(model, {}, seed);
    auto clock = scheduler::BudgetClock::virtual_units(20000);
    const auto path = rp.replan(a, b, env, clock);
    ASSERT_TRUE(path.has_value()) << "seed " << seed;
    expect_endpoints(*path, a, b);
    double worst = 0.0;
    EXPECT_TRUE(oracle::path_collision_free(model.chain, *path, env, 1e-3, &worst)) << "seed " << seed << " " << worst;
  }
}

TEST(Replanner, SpatialArmPassesOracle) {
  const auto model = xarm6_robot();
  sim::Environment env;
  env.obstacles.push_back(box_at(0.3, 0.0, 0.08));
  env.obstacles.back().center.z() = 0.4;
  const Eigen::VectorXd a = vec({-1.0, 0.2, -0.6, 0.0, 0.4, 0.0}), b = vec({1.0, 0.2, -0.6, 0.0, 0.4, 0.0});
  Replanner rp(model, {}, 3);
  auto clock = scheduler::BudgetClock::virtual_units(20000);
  const auto path = rp.replan(a, b, env, clock);
  ASSERT_TRUE(path.has_value());
  expect_endpoints(*path, a, b);
  EXPECT_TRUE(oracle::path_collision_free(model.chain, *path, env, 1e-2));
}

TEST(Replanner, DeterministicWithVirtualBudget) {
  const auto model = planar_robot({1.0, 1.0}, 0.05);
  const auto env = gap_env();
  Replanner r1(model, {}, 42), r2(model, {}, 42);
  auto c1 = scheduler::BudgetClock::virtual_units(5000), c2 = scheduler::BudgetClock::virtual_units(5000);
  const auto p1 = r1.replan(vec({-1.0, 0.0}), vec({1.0, 0.0}), env, c1);
  const auto p2 = r2.replan(vec({-1.0, 0.0}), vec({1.0, 0.0}), env, c2);
  ASSERT_EQ(p1.has_value(), p2.has_value());
  if (p1) {
    ASSERT_EQ(p1->size(), p2->size());
    for (std::size_t i = 0; i < p1->size(); ++i) EXPECT_EQ((*p1)[i], (*p2)[i]);
  }
  EXPECT_EQ(c1.checkpoints(), c2.checkpoints());
}
