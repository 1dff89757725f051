#pragma once

#include "drgbt/bubbles.hpp"
#include "drgbt/budget.hpp"
#include "drgbt/cspace.hpp"
#include "drgbt/environment.hpp"
#include "drgbt/kdtree.hpp"
#include "drgbt/planner.hpp"
#include "drgbt/robot.hpp"

#include <cstdint>
#include <optional>

namespace drgbt::replanner {

using cspace::Configuration;
using planner::Path;

struct ReplannerParams {
  int spine_layers{5};
  double goal_bias{0.1};
  double d_max{10.0};
  std::size_t brute_force_below{64};
  bool shortcut{true};  // greedy shortcutting with the leftover budget
};

struct ReplanStats {
  long iterations{0};
  std::size_t start_tree{0};
  std::size_t goal_tree{0};
};

/// Bidirectional tree planner whose extension step is a static generalized
/// spine: every tree edge is a straight segment covered by a chain of bubbles
/// computed against the frozen snapshot.
class Replanner {
 public:
  Replanner(const RobotModel& planning_model, const ReplannerParams& params, std::uint64_t seed);

  /// Path from q_start to q_goal, or nullopt when the budget runs out (or an
  /// endpoint has no clearance). Checks the clock before every extension.
  std::optional<Path> replan(const Configuration& q_start, const Configuration& q_goal, const sim::Environment& snapshot,
                             scheduler::BudgetClock& clock);

  const ReplanStats& last_stats() const { return stats_; }

 private:
  struct Tree {
    explicit Tree(int dim, std::size_t brute) : kd(dim, brute) {}
    KdTree kd;
    std::vector<long> parent;
    std::vector<std::optional<planner::LocalView>> views;
  };

  std::size_t add(Tree& t, const Configuration& q, long parent);
  const planner::LocalView& view(Tree& t, std::size_t i, const sim::Environment& env);
  /// Replaces runs of nodes by single certified spines while budget remains.
  Path shortcut(const Path& path, const sim::Environment& snapshot, scheduler::BudgetClock& clock);
  bubbles::GeneralizedSpine extend(Tree& t, std::size_t i, const Configuration& target, const sim::Environment& env);

  RobotModel model_;
  ReplannerParams params_;
  cspace::Sampler rng_;
  bubbles::PoseFn pose_fn_;
  ReplanStats stats_;
};

}  // namespace drgbt::replanner
