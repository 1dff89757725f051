#pragma once

#include "drgbt/budget.hpp"
#include "drgbt/environment.hpp"
#include "drgbt/planner.hpp"
#include "drgbt/replanner.hpp"

#include <vector>

namespace drgbt::scheduler {

/// Budgets of the periodic planning task (e1) and the replanning task
/// (e2 = T - e1) sharing period T; both deadlines equal T.
struct TaskBudget {
  double T{0.05};
  double e1{0.03};
  double e2{0.02};
  double D1{0.05};
  double D2{0.05};

  /// Throws ConfigError unless 0 < e1 <= T.
  static TaskBudget make(double T, double e1);
};

struct TaskSpec {
  double e{0.0};
  double D{0.0};
  double T{0.0};
};

/// Sum of e / min(D, T).
double utilization(const std::vector<TaskSpec>& tasks);
/// EDF test: utilization <= 1 (with a 1e-12 rounding allowance).
bool check_schedulability(const std::vector<TaskSpec>& tasks);
std::vector<TaskSpec> tasks_of(const TaskBudget& b);

struct SchedulerOptions {
  BudgetMode mode{BudgetMode::Wall};
  double units_per_second{10000.0};  // virtual mode: checkpoints granted per second of budget
  bool realtime{false};              // sleep to the period boundary after each iteration
};

long units_for(double seconds, const SchedulerOptions& opt);
BudgetClock make_clock(double seconds, const SchedulerOptions& opt);

struct IterationReport {
  planner::IterationOutcome outcome;
  IterationTiming timing;
  bool deadline_overrun{false};
  bool replan_attempted{false};
  bool replan_succeeded{false};
  long t1_checkpoints{0};
};

/// One period: the planning step under an e1 clock, then, when replanning is
/// requested and the run goes on, the replanner under the remaining budget
/// (T minus the time T1 used in wall mode, e2 plus unused T1 units in virtual
/// mode). A successful replan installs the new path and clears the request.
IterationReport run_iteration(planner::Planner& planner, replanner::Replanner& replanner, const sim::Environment& env,
                              const TaskBudget& budget, const SchedulerOptions& opt);

}  // namespace drgbt::scheduler
