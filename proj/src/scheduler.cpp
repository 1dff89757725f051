#include "drgbt/scheduler.hpp"

#include "drgbt/errors.hpp"

#include <algorithm>
#include <cmath>

namespace drgbt::scheduler {

BudgetMode parse_budget_mode(const std::string& s) {
  if (s == "wall") return BudgetMode::Wall;
  if (s == "virtual") return BudgetMode::Virtual;
  throw ConfigError("budget mode must be 'wall' or 'virtual', got '" + s + "'");
}

const char* to_string(BudgetMode m) { return m == BudgetMode::Wall ? "wall" : "virtual"; }

BudgetClock BudgetClock::wall(double budget_s) {
  BudgetClock c;
  c.mode_ = BudgetMode::Wall;
  c.budget_s_ = budget_s;
  return c;
}

BudgetClock BudgetClock::virtual_units(long units) {
  BudgetClock c;
  c.mode_ = BudgetMode::Virtual;
  c.budget_units_ = units;
  return c;
}

BudgetClock BudgetClock::unlimited() {
  BudgetClock c;
  c.unlimited_ = true;
  return c;
}

bool BudgetClock::expired() {
  if (expired_) return true;
  if (unlimited_) return false;
  if (mode_ == BudgetMode::Wall) {
    expired_ = elapsed() >= budget_s_;
  } else {
    expired_ = checkpoints_ >= budget_units_;
  }
  return expired_;
}

void BudgetClock::checkpoint() { ++checkpoints_; }

double BudgetClock::elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

TaskBudget TaskBudget::make(double T, double e1) {
  if (!(T > 0.0)) throw ConfigError("period T must be positive");
  if (!(e1 > 0.0) || e1 > T) throw ConfigError("e1 must lie in (0, T]");
  return {T, e1, T - e1, T, T};
}

double utilization(const std::vector<TaskSpec>& tasks) {
  double u = 0.0;
  for (const auto& t : tasks) {
    if (!(t.T > 0.0) || !(t.D > 0.0)) throw ConfigError("task periods and deadlines must be positive");
    u += t.e / std::min(t.D, t.T);
  }
  return u;
}

bool check_schedulability(const std::vector<TaskSpec>& tasks) { return utilization(tasks) <= 1.0 + 1e-12; }

std::vector<TaskSpec> tasks_of(const TaskBudget& b) { return {{b.e1, b.D1, b.T}, {b.e2, b.D2, b.T}}; }

long units_for(double seconds, const SchedulerOptions& opt) {
  return static_cast<long>(std::llround(std::max(0.0, seconds) * opt.units_per_second));
}

BudgetClock make_clock(double seconds, const SchedulerOptions& opt) {
  return opt.mode == BudgetMode::Wall ? BudgetClock::wall(seconds) : BudgetClock::virtual_units(units_for(seconds, opt));
}

IterationReport run_iteration(planner::Planner& planner, replanner::Replanner& replanner, const sim::Environment& env,
                              const TaskBudget& budget, const SchedulerOptions& opt) {
  IterationReport rep;
  const auto start = BudgetClock::Clock::now();
  BudgetClock c1 = make_clock(budget.e1, opt);
  rep.outcome = planner.step(env, c1, rep.timing);
  rep.t1_checkpoints = c1.checkpoints();
  rep.timing.t1_total = std::chrono::duration<double>(BudgetClock::Clock::now() - start).count();
  if (opt.mode == BudgetMode::Wall) {
    rep.deadline_overrun = rep.timing.t1_total > budget.e1 + rep.timing.max_spine;
  }

  const bool terminal = rep.outcome.kind == planner::OutcomeKind::ReachedGoal ||
                        rep.outcome.kind == planner::OutcomeKind::CollisionI ||
                        rep.outcome.kind == planner::OutcomeKind::CollisionII;
  if (planner.replanning() && !terminal) {
    BudgetClock c2 = opt.mode == BudgetMode::Wall
                         ? BudgetClock::wall(budget.T - rep.timing.t1_total)
                         : BudgetClock::virtual_units(units_for(budget.e2, opt) + c1.remaining_units());
    rep.replan_attempted = true;
    ScopedTimer t(rep.timing.replan);
    const auto path = replanner.replan(planner.state().q, planner.goal(), env, c2);
    if (path) {
      planner.install_path(*path);
      planner.clear_replanning();
      rep.replan_succeeded = true;
    }
  }
  rep.timing.total = std::chrono::duration<double>(BudgetClock::Clock::now() - start).count();
  return rep;
}

}  // namespace drgbt::scheduler
