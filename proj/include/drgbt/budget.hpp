#pragma once

#include <chrono>
#include <string>

namespace drgbt::scheduler {

enum class BudgetMode { Wall, Virtual };

BudgetMode parse_budget_mode(const std::string& s);
const char* to_string(BudgetMode m);

/// Time slice of one task phase. Wall mode measures steady-clock time;
/// virtual mode counts checkpoints (one unit each) so that runs are
/// reproducible. Once expired() has returned true it keeps returning true.
class BudgetClock {
 public:
  using Clock = std::chrono::steady_clock;

  static BudgetClock wall(double budget_s);
  static BudgetClock virtual_units(long units);
  /// Never expires.
  static BudgetClock unlimited();

  bool expired();
  /// Marks one cooperative preemption point; consumes one unit in virtual mode.
  void checkpoint();

  BudgetMode mode() const { return mode_; }
  long checkpoints() const { return checkpoints_; }
  /// Seconds since the phase started (wall time in both modes).
  double elapsed() const;
  double budget_seconds() const { return budget_s_; }
  long budget_units() const { return budget_units_; }
  long remaining_units() const { return budget_units_ > checkpoints_ ? budget_units_ - checkpoints_ : 0; }

 private:
  BudgetMode mode_{BudgetMode::Wall};
  Clock::time_point start_{Clock::now()};
  double budget_s_{0.0};
  long budget_units_{0};
  long checkpoints_{0};
  bool unlimited_{false};
  bool expired_{false};
};

/// Wall-clock durations of the routines of one iteration, in seconds.
struct IterationTiming {
  double compute_distances{0.0};
  double generate_horizon{0.0};
  double update_horizon{0.0};
  double generate_gbur{0.0};
  double weights_next_state{0.0};
  double update_curr_state{0.0};
  double is_valid{0.0};
  double replan{0.0};
  double t1_total{0.0};
  double total{0.0};
  double max_spine{0.0};  // longest single spine inside generate_gbur

  double routine_sum() const {
    return compute_distances + generate_horizon + update_horizon + generate_gbur + weights_next_state +
           update_curr_state + is_valid + replan;
  }
};

/// Accumulates the wall time of a scope into a timing field.
class ScopedTimer {
 public:
  explicit ScopedTimer(double& sink) : sink_(sink), start_(BudgetClock::Clock::now()) {}
  ~ScopedTimer() { sink_ += std::chrono::duration<double>(BudgetClock::Clock::now() - start_).count(); }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  double& sink_;
  BudgetClock::Clock::time_point start_;
};

}  // namespace drgbt::scheduler
