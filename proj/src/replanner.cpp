#include "drgbt/replanner.hpp"

#include <algorithm>

namespace drgbt::replanner {

namespace {

constexpr double kMinProgress = 1e-9;

Path chain_to_root(const KdTree& kd, const std::vector<long>& parent, std::size_t i) {
  Path out;
  long cur = static_cast<long>(i);
  while (cur >= 0) {
    out.push_back(kd.point(static_cast<std::size_t>(cur)));
    cur = parent[static_cast<std::size_t>(cur)];
  }
  return out;
}

}  // namespace

Replanner::Replanner(const RobotModel& planning_model, const ReplannerParams& params, std::uint64_t seed)
    : model_(planning_model), params_(params), rng_(seed) {
  pose_fn_ = [chain = model_.chain](const Configuration& q) {
    return kinematics::forward_kinematics_unchecked(chain, q);
  };
}

std::size_t Replanner::add(Tree& t, const Configuration& q, long parent) {
  const std::size_t i = t.kd.insert(q);
  t.parent.push_back(parent);
  t.views.emplace_back();
  return i;
}

const planner::LocalView& Replanner::view(Tree& t, std::size_t i, const sim::Environment& env) {
  auto& slot = t.views[i];
  if (!slot) slot = planner::compute_local_view(model_.chain, t.kd.point(i), env, params_.d_max);
  return *slot;
}

bubbles::GeneralizedSpine Replanner::extend(Tree& t, std::size_t i, const Configuration& target,
                                            const sim::Environment& env) {
  const planner::LocalView& v = view(t, i, env);
  return bubbles::extend_generalized_spine(v.q, target, v.d, v.radii, v.planes, pose_fn_, params_.spine_layers,
                                           params_.d_max);
}

std::optional<Path> Replanner::replan(const Configuration& q_start, const Configuration& q_goal,
                                      const sim::Environment& snapshot, scheduler::BudgetClock& clock) {
  stats_ = {};
  const int n = model_.dof();
  Tree ta(n, params_.brute_force_below);
  Tree tb(n, params_.brute_force_below);
  add(ta, q_start, -1);
  add(tb, q_goal, -1);

  const auto blocked = [](const planner::LocalView& v) {
    const bubbles::DynamicExpandedBubble b{v.q, v.d, v.radii, 0.0};
    return !b.nonempty();
  };
  if (blocked(view(ta, 0, snapshot)) || blocked(view(tb, 0, snapshot))) return std::nullopt;

  Tree* a = &ta;
  Tree* b = &tb;
  const auto& limits = model_.chain.joint_limits;

  while (!clock.expired()) {
    clock.checkpoint();
    ++stats_.iterations;
    const Configuration q_rand =
        rng_.uniform() < params_.goal_bias ? b->kd.point(0) : rng_.sample_uniform(limits);
    const std::size_t near_a = a->kd.nearest(q_rand);
    const bubbles::GeneralizedSpine ga = extend(*a, near_a, q_rand, snapshot);
    if (ga.length > kMinProgress) {
      const std::size_t new_a = add(*a, ga.q_reached, static_cast<long>(near_a));
      const Configuration q_new = ga.q_reached;
      // Connect the other tree toward q_new.
      std::size_t cur_b = b->kd.nearest(q_new);
      for (;;) {
        const bubbles::GeneralizedSpine gb = extend(*b, cur_b, q_new, snapshot);
        if (gb.length <= kMinProgress) break;
        cur_b = add(*b, gb.q_reached, static_cast<long>(cur_b));
        if (gb.reached_target) {
          Path from_a = chain_to_root(a->kd, a->parent, new_a);
          Path from_b = chain_to_root(b->kd, b->parent, cur_b);
          std::reverse(from_a.begin(), from_a.end());
          // from_a ends at q_new, from_b starts at q_new.
          from_a.insert(from_a.end(), from_b.begin() + 1, from_b.end());
          if (a != &ta) std::reverse(from_a.begin(), from_a.end());
          stats_.start_tree = ta.kd.size();
          stats_.goal_tree = tb.kd.size();
          if (params_.shortcut) return shortcut(from_a, snapshot, clock);
          return from_a;
        }
        if (clock.expired()) break;
        clock.checkpoint();
      }
    }
    std::swap(a, b);
  }
  stats_.start_tree = ta.kd.size();
  stats_.goal_tree = tb.kd.size();
  return std::nullopt;
}

Path Replanner::shortcut(const Path& path, const sim::Environment& snapshot, scheduler::BudgetClock& clock) {
  if (path.size() < 3) return path;
  Path out{path.front()};
  std::size_t i = 0;
  const std::size_t last = path.size() - 1;
  while (i < last) {
    std::size_t next = i + 1;
    if (!clock.expired()) {
      const planner::LocalView v = planner::compute_local_view(model_.chain, path[i], snapshot, params_.d_max);
      for (std::size_t j = last; j > i + 1; --j) {
        if (clock.expired()) break;
        clock.checkpoint();
        const bubbles::GeneralizedSpine g = bubbles::extend_generalized_spine(
            v.q, path[j], v.d, v.radii, v.planes, pose_fn_, params_.spine_layers, params_.d_max);
        if (g.reached_target) {
          next = j;
          break;
        }
      }
    }
    out.push_back(path[next]);
    i = next;
  }
  return out;
}

}  // namespace drgbt::replanner
