#include "drgbt/cspace.hpp"
#include "drgbt/errors.hpp"
#include "drgbt/kinematics.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace drgbt;
using kinematics::forward_kinematics;
using oracle::Vec3;

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST(ForwardKinematics, PlanarExamples) {
  const auto chain = kinematics::planar_chain({1.0, 1.0}, 0.0, 0.3);
  EXPECT_NEAR((forward_kinematics(chain, vec({0, 0})).tip() - Vec3(2, 0, 0.3)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((forward_kinematics(chain, vec({kPi / 2, 0})).tip() - Vec3(0, 2, 0.3)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((forward_kinematics(chain, vec({kPi / 2, -kPi / 2})).tip() - Vec3(1, 1, 0.3)).norm(), 0.0, 1e-12);
}

TEST(ForwardKinematics, MatchesClosedFormPlanar) {
  const std::vector<double> lengths{0.7, 1.1, 0.4};
  const auto chain = kinematics::planar_chain(lengths, 0.05);
  oracle::Gen g(3);
  for (int k = 0; k < 500; ++k) {
    const Eigen::VectorXd q = g.vec(3, -kPi, kPi);
    const auto pose = forward_kinematics(chain, q);
    const auto ref = oracle::planar_fk(lengths, q);
    for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR((pose.skeleton[i] - ref[i]).norm(), 0.0, 1e-12);
  }
}

TEST(ForwardKinematics, LimitViolationThrows) {
  const auto chain = kinematics::planar_chain({1.0, 1.0}, 0.0);
  EXPECT_THROW(forward_kinematics(chain, vec({4.0, 0.0})), JointLimitViolation);
}

TEST(ForwardKinematics, Deterministic) {
  const auto chain = kinematics::xarm6_like();
  const Eigen::VectorXd q = vec({0.3, -0.2, -0.5, 1.0, -0.7, 0.1});
  const auto a = forward_kinematics(chain, q);
  const auto b = forward_kinematics(chain, q);
  for (std::size_t i = 0; i < a.skeleton.size(); ++i) EXPECT_EQ(a.skeleton[i], b.skeleton[i]);
}

TEST(EnclosingRadii, PlanarExamples) {
  const auto chain0 = kinematics::planar_chain({1.0, 1.0}, 0.0);
  auto r = kinematics::enclosing_radii(forward_kinematics(chain0, vec({0, 0}))).r;
  EXPECT_NEAR(r(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(r(1, 0), 2.0, 1e-12);
  EXPECT_NEAR(r(1, 1), 1.0, 1e-12);
  const auto chain1 = kinematics::planar_chain({1.0, 1.0}, 0.1);
  r = kinematics::enclosing_radii(forward_kinematics(chain1, vec({0, 0}))).r;
  EXPECT_NEAR(r(0, 0), 1.1, 1e-12);
  EXPECT_NEAR(r(1, 0), 2.1, 1e-12);
  EXPECT_NEAR(r(1, 1), 1.1, 1e-12);
  r = kinematics::enclosing_radii(forward_kinematics(chain0, vec({0, kPi / 2}))).r;
  EXPECT_NEAR(r(1, 0), std::sqrt(2.0), 1e-12);
}

TEST(EnclosingRadii, MatchesOracleOnSpatialArm) {
  const auto chain = kinematics::xarm6_like();
  oracle::Gen g(8);
  for (int k = 0; k < 200; ++k) {
    const Eigen::VectorXd q = chain.joint_limits.clamp(g.vec(6, -2.5, 2.5));
    const auto pose = forward_kinematics(chain, q);
    const Eigen::MatrixXd ref = oracle::enclosing_radii(pose.skeleton, pose.axes, chain.link_radii);
    ASSERT_LE((kinematics::enclosing_radii(pose).r - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
}

// Every body point of link i (sampled over the capsule) moves by at most
// sum_j r_ij |dq_j|.
TEST(EnclosingRadii, DisplacementBound) {
  const auto chain = kinematics::xarm6_like();
  oracle::Gen g(17);
  for (int k = 0; k < 1000; ++k) {
    const Eigen::VectorXd q = chain.joint_limits.clamp(g.vec(6, -2.5, 2.5));
    const Eigen::VectorXd q2 = chain.joint_limits.clamp(q + g.vec(6, -0.6, 0.6));
    const auto f1 = oracle::spatial_fk(chain, q);
    const auto f2 = oracle::spatial_fk(chain, q2);
    const auto radii = kinematics::enclosing_radii(forward_kinematics(chain, q));
    const Eigen::VectorXd dq = q2 - q;
    for (int i = 0; i < 6; ++i) {
      const double bound = radii.rho_bar(i, dq);
      const double rad = chain.link_radii[i];
      double worst = 0.0;
      for (int s = 0; s < 1000; ++s) {
        const Vec3 local = g.uniform(0.0, 1.0) * f1.local_segment[static_cast<std::size_t>(i)] + rad * g.unit3();
        const Vec3 x1 = f1.origin[static_cast<std::size_t>(i)] + f1.rotation[static_cast<std::size_t>(i)] * local;
        const Vec3 x2 = f2.origin[static_cast<std::size_t>(i)] + f2.rotation[static_cast<std::size_t>(i)] * local;
        worst = std::max(worst, (x2 - x1).norm());
      }
      ASSERT_LE(worst, bound + 1e-6) << "link " << i << " case " << k;
    }
  }
}

TEST(ForwardKinematics, MatchesSpatialOracle) {
  const auto chain = kinematics::xarm6_like();
  oracle::Gen g(19);
  for (int k = 0; k < 200; ++k) {
    const Eigen::VectorXd q = chain.joint_limits.clamp(g.vec(6, -2.5, 2.5));
    const auto f = oracle::spatial_fk(chain, q);
    const auto pose = forward_kinematics(chain, q);
    for (std::size_t i = 0; i < f.skeleton.size(); ++i) ASSERT_NEAR((pose.skeleton[i] - f.skeleton[i]).norm(), 0.0, 1e-12);
  }
}

TEST(SelfCollision, Examples) {
  const auto straight = kinematics::planar_chain({1.0, 1.0, 1.0}, 0.1);
  EXPECT_FALSE(kinematics::self_collision(forward_kinematics(straight, vec({0, 0, 0}))));
  // Folded back so link 3 runs over link 1.
  const auto pose = forward_kinematics(straight, vec({0, 3.0, 3.0}));
  const auto& c = pose.link_capsules;
  ASSERT_LT(oracle::segment_segment(c[0].a, c[0].b, c[2].a, c[2].b) - 0.2, 0.0);
  EXPECT_TRUE(kinematics::self_collision(pose));
  const auto two = kinematics::planar_chain({1.0, 1.0}, 0.1);
  oracle::Gen g(2);
  for (int k = 0; k < 100; ++k) EXPECT_FALSE(kinematics::self_collision(forward_kinematics(two, g.vec(2, -3.1, 3.1))));
}

TEST(ChainModel, Validation) {
  auto chain = kinematics::planar_chain({1.0, 1.0}, 0.1);
  EXPECT_NO_THROW(chain.validate());
  chain.link_radii.resize(1);
  EXPECT_THROW(chain.validate(), ConfigError);
}

TEST(Metric, Examples) {
  EXPECT_EQ(cspace::metric_rho(vec({1, 2}), vec({1, 2})), 0.0);
  EXPECT_DOUBLE_EQ(cspace::metric_rho(vec({0, 0}), vec({3, 4})), 5.0);
  EXPECT_THROW(cspace::metric_rho(vec({0, 0}), vec({1, 2, 3})), DimensionMismatch);
  EXPECT_DOUBLE_EQ(cspace::metric_rho(vec({0, 0}), vec({3, 4}), vec({4, 1})), std::sqrt(36.0 + 16.0));
}

TEST(Metric, Axioms) {
  oracle::Gen g(4);
  for (int k = 0; k < 1000; ++k) {
    const auto a = g.vec(4, -3, 3), b = g.vec(4, -3, 3), c = g.vec(4, -3, 3);
    ASSERT_DOUBLE_EQ(cspace::metric_rho(a, b), cspace::metric_rho(b, a));
    ASSERT_LE(cspace::metric_rho(a, c), cspace::metric_rho(a, b) + cspace::metric_rho(b, c) + 1e-12);
  }
}

TEST(Interpolate, Endpoints) {
  const auto a = vec({0, 1}), b = vec({2, 5});
  EXPECT_EQ(cspace::interpolate(a, b, 0.0), a);
  EXPECT_EQ(cspace::interpolate(a, b, 1.0), b);
  EXPECT_EQ(cspace::interpolate(a, b, 0.5), vec({1, 3}));
}

TEST(Sampler, NeighborhoodInBall) {
  cspace::Sampler s(9);
  cspace::JointLimits lim{Eigen::VectorXd::Constant(3, -kPi), Eigen::VectorXd::Constant(3, kPi)};
  const auto q = vec({0.5, -1.0, 3.0});
  for (int k = 0; k < 2000; ++k) {
    const auto y = s.sample_neighborhood(q, 0.7, lim);
    ASSERT_LE(cspace::metric_rho(q, y), 0.7 + 1e-12);
    ASSERT_TRUE(lim.contains(y));
  }
  EXPECT_LE(cspace::metric_rho(q, s.sample_neighborhood(q, 1e-12, lim)), 1e-12);
}

// Chi-square per joint over 10 bins; critical value for 9 dof at p = 0.01 is 21.67.
TEST(Sampler, UniformChiSquare) {
  cspace::Sampler s(1234);
  cspace::JointLimits lim{vec({-1, 0, -3}), vec({1, 2, 3})};
  const int N = 10000, bins = 10;
  std::vector<std::vector<int>> counts(3, std::vector<int>(bins, 0));
  for (int k = 0; k < N; ++k) {
    const auto q = s.sample_uniform(lim);
    for (int j = 0; j < 3; ++j) {
      const int b = std::min(bins - 1, static_cast<int>((q[j] - lim.lower[j]) / (lim.upper[j] - lim.lower[j]) * bins));
      ++counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(b)];
    }
  }
  for (int j = 0; j < 3; ++j) {
    double chi = 0.0;
    const double expected = double(N) / bins;
    for (int c : counts[static_cast<std::size_t>(j)]) chi += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi, 21.67) << "joint " << j;
  }
}

TEST(Sampler, SeedReproducible) {
  cspace::Sampler a(77), b(77);
  cspace::JointLimits lim{Eigen::VectorXd::Constant(2, -1), Eigen::VectorXd::Constant(2, 1)};
  for (int k = 0; k < 100; ++k) {
    ASSERT_EQ(a.sample_uniform(lim), b.sample_uniform(lim));
    ASSERT_EQ(a.sample_neighborhood(vec({0, 0}), 0.5, lim), b.sample_neighborhood(vec({0, 0}), 0.5, lim));
  }
}
