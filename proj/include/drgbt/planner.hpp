#pragma once

#include "drgbt/bubbles.hpp"
#include "drgbt/budget.hpp"
#include "drgbt/cspace.hpp"
#include "drgbt/environment.hpp"
#include "drgbt/geometry.hpp"
#include "drgbt/kinematics.hpp"
#include "drgbt/robot.hpp"
#include "drgbt/trajectory.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace drgbt::planner {

using cspace::Configuration;
using cspace::ExtendedConfiguration;
using Path = std::vector<Configuration>;

enum class NodeKind { Path, Random, Lateral };
enum class NodeState { Regular, Bad, Critical };
enum class PlannerStatus { Reached, Advanced, Trapped };

const char* to_string(PlannerStatus s);
const char* to_string(NodeKind k);

struct HorizonNode {
  Configuration target;
  Configuration reached;  // spine endpoint, valid when `extended`
  NodeKind kind{NodeKind::Random};
  NodeState state{NodeState::Regular};
  double weight{0.0};
  double d_c_local{0.0};
  std::optional<double> d_c_prev;  // clearance at the previous iteration
  double spine_length{0.0};
  bool extended{false};
};

struct Horizon {
  std::vector<HorizonNode> nodes;
  int N_h{0};  // target count of non-lateral nodes

  int count(NodeKind k) const;
  int non_lateral() const { return static_cast<int>(nodes.size()) - count(NodeKind::Lateral); }
  std::vector<double> weights() const;
};

struct DrgbtParams {
  int N_h0{10};
  double d_crit{0.05};
  double w_min{0.5};
  double w_mean_min{0.5};
  int max_modify_attempts{10};
  bool safe_on{false};
  double T{0.05};
  double e1{0.03};
  double D_ref{0.5};                 // clearance at which the distance term saturates
  double neighborhood_radius{1.0};   // random horizon nodes, rad
  int spine_layers{5};               // layers of each horizon spine
  int dgbur_layers{5};               // layers when certifying a spline
  int max_bisection_iters{5};
  double dt{trajectory::kDefaultDt};
  double dt_check{trajectory::kDefaultDt / 10.0};
  double d_max{10.0};
  double v_obs{0.0};
  double planning_margin{0.0};       // capsule inflation used for planning only
  double goal_tolerance{1e-9};
};

/// Planning-side snapshot at the current configuration.
struct LocalView {
  Configuration q;
  kinematics::RobotPose pose;
  geometry::DistanceProfile d;
  geometry::PlaneSet planes;
  kinematics::EnclosingRadii radii;
};

LocalView compute_local_view(const kinematics::ChainModel& chain, const Configuration& q, const sim::Environment& env,
                             double d_max);

/// N_h = min(floor(N_h0 * (1 + d_crit / d_c)), n * N_h0); d_c <= 0 gives n * N_h0.
int horizon_size(double d_c, int N_h0, int n, double d_crit);

/// Path nodes path[marker .. marker + N_h - 1], padded with random nodes around `center`.
Horizon generate_horizon(const Configuration& center, const Path& path, std::size_t marker, int N_h,
                         cspace::Sampler& rng, const cspace::JointLimits& limits, double radius);

/// n - 1 targets at distance `spacing` from q_curr along an orthonormal basis
/// of the complement of `direction`, random signs, clamped to the limits.
std::vector<Configuration> lateral_targets(const Configuration& q_curr, const Eigen::VectorXd& direction, double spacing,
                                           cspace::Sampler& rng, const cspace::JointLimits& limits);

/// Extends the spine of one node from the view's configuration.
void extend_node(HorizonNode& node, const LocalView& view, const bubbles::PoseFn& pose_fn, const DrgbtParams& p);

/// Resizes to horizon_size(d_c), replaces bad and critical nodes and regenerates laterals
/// orthogonal to (q_next - q_curr).
void update_horizon(Horizon& h, const LocalView& view, const std::optional<Configuration>& q_next_prev,
                    const bubbles::PoseFn& pose_fn, const DrgbtParams& p, const RobotModel& model,
                    cspace::Sampler& rng);

/// Extends every node while budget remains (at least one). Unextended nodes
/// are dropped. Returns the longest single spine time in seconds.
double generate_gbur(Horizon& h, const LocalView& view, const bubbles::PoseFn& pose_fn, const DrgbtParams& p,
                     scheduler::BudgetClock& clock);

/// Weight in [0, 1]; sets node state. Zero for critical nodes and zero-length spines.
double node_weight(HorizonNode& node, const Configuration& q_curr, const Configuration& goal, const DrgbtParams& p);
void compute_node_weights(Horizon& h, const Configuration& q_curr, const Configuration& goal, const DrgbtParams& p);

struct NextState {
  Configuration q_next;
  PlannerStatus status{PlannerStatus::Advanced};
  int index{-1};
};

/// Highest weight, ties to the reached endpoint nearest the goal. Trapped when
/// no weight is positive.
NextState get_next_state(const Horizon& h, const Configuration& q_curr, const Configuration& goal);

bool whether_to_replan(const std::vector<double>& weights, const DrgbtParams& p);

/// Same polyline starting at q_curr, subdivided so consecutive nodes are at
/// most `max_spacing` apart.
Path update_path(const Path& q_new, const Configuration& q_curr, double max_spacing);

struct StateUpdate {
  trajectory::Spline spline;  // starts at local time 0
  PlannerStatus status{PlannerStatus::Advanced};
  bool certified{false};       // safe mode: spline covered by a complete chain of burs
  int bisections{0};
  Configuration target;        // configuration the head spline aims at
};

/// Regular mode: quintic toward q_next with estimated final velocity. Safe
/// mode: composite spline certified by dynamic generalized burs, bisecting the
/// target toward q_curr on failure. `certified == false` in safe mode means no
/// safe spline was found and the caller keeps its previous one.
StateUpdate update_curr_state(const ExtendedConfiguration& x_curr, const NextState& next, const Configuration& goal,
                              const RobotModel& model, const DrgbtParams& p, const LocalView& view,
                              const bubbles::PoseFn& pose_fn);

enum class OutcomeKind { Advanced, ReachedGoal, CollisionI, CollisionII, Trapped };
const char* to_string(OutcomeKind k);

struct IterationOutcome {
  OutcomeKind kind{OutcomeKind::Advanced};
  PlannerStatus status{PlannerStatus::Advanced};
  bool replan_requested{false};
  double d_c{0.0};
  int N_h{0};
  int horizon_nodes{0};
  double weight_max{0.0};
  double weight_mean{0.0};
  bool fallback{false};  // safe mode kept the previous certified spline
  int bisections{0};
};

/// One DRGBT instance. Owns the robot state, horizon, path and random stream.
class Planner {
 public:
  Planner(const RobotModel& model, const DrgbtParams& params, const Configuration& start, const Configuration& goal,
          std::uint64_t seed);

  /// Body of the periodic task for one period starting now, with `env` the
  /// obstacle state at the period start.
  IterationOutcome step(const sim::Environment& env, scheduler::BudgetClock& clock, scheduler::IterationTiming& timing);

  /// Installs a new predefined path (re-spaced from the current position).
  void install_path(const Path& raw);

  const Configuration& goal() const { return goal_; }
  /// Robot state at the start of the coming period.
  ExtendedConfiguration state() const;
  bool replanning() const { return replanning_; }
  void clear_replanning() { replanning_ = false; }
  void request_replanning() { replanning_ = true; }
  const Path& path() const { return path_; }
  std::size_t marker() const { return marker_; }
  const Horizon& horizon() const { return horizon_; }
  const Path& traversed() const { return traversed_; }
  const trajectory::Spline& active_spline() const { return active_; }
  double active_offset() const { return offset_; }
  const DrgbtParams& params() const { return params_; }
  const RobotModel& model() const { return model_; }
  const RobotModel& planning_model() const { return planning_; }
  /// Every spline adopted so far (for kinematic audits), when recording is on.
  void record_splines(bool on) { record_ = on; }
  const std::vector<trajectory::Spline>& recorded_splines() const { return recorded_; }

 private:
  void adopt(trajectory::Spline s);

  RobotModel model_;
  RobotModel planning_;
  DrgbtParams params_;
  Configuration goal_;
  cspace::Sampler rng_;
  bubbles::PoseFn pose_fn_;

  trajectory::Spline active_;
  double offset_{0.0};
  Horizon horizon_;
  bool horizon_stale_{true};
  PlannerStatus status_{PlannerStatus::Trapped};
  std::optional<Configuration> q_next_prev_;
  Path path_;
  std::size_t marker_{0};
  bool replanning_{false};
  Path traversed_;
  bool record_{false};
  std::vector<trajectory::Spline> recorded_;
};

}  // namespace drgbt::planner
