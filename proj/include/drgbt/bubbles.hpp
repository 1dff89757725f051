#pragma once

#include "drgbt/cspace.hpp"
#include "drgbt/geometry.hpp"
#include "drgbt/kinematics.hpp"
#include "drgbt/trajectory.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace drgbt::bubbles {

using cspace::Configuration;
using geometry::DistanceProfile;
using geometry::PlaneSet;
using kinematics::EnclosingRadii;

using PoseFn = std::function<kinematics::RobotPose(const Configuration&)>;

/// Region of (configuration, elapsed time) pairs that stay collision-free while
/// every moving obstacle travels at most `v_obs`. Static fixtures and
/// non-adjacent link pairs enter with zero approach speed.
struct DynamicExpandedBubble {
  Configuration root;
  DistanceProfile d;
  EnclosingRadii radii;
  double v_obs{0.0};

  /// Every distance in the profile is strictly positive.
  bool nonempty() const;
};

/// `t` is measured from the bubble's root time.
bool deb_contains(const DynamicExpandedBubble& deb, const Configuration& y, double t);

struct BurNode {
  Configuration q;
  double t{0.0};
};

/// Nodes of one trajectory accepted by one bubble, in time order. The first
/// node is the root itself; an empty node list means the bubble was empty.
struct DynamicBur {
  DynamicExpandedBubble bubble;
  double t_root{0.0};
  std::vector<BurNode> spines;
  std::size_t first_index{0};  // position of spines[0] in the discretization

  bool empty() const { return spines.empty(); }
};

/// Discretization of a trajectory: t0 + k*dt, every junction and the final time.
std::vector<double> bur_times(const trajectory::Spline& traj, double dt);

/// Walks the discretized trajectory from its start and keeps the longest
/// prefix of nodes inside the bubble rooted at traj(t0).
DynamicBur compute_dbur(const trajectory::Spline& traj, double dt, const DistanceProfile& d0,
                        const EnclosingRadii& radii, double v_obs);

struct DynamicGeneralizedBur {
  std::vector<DynamicBur> burs;
  double covered_time{0.0};  // time of the last accepted node
  bool complete{false};      // the final trajectory node was accepted

  int chain_size() const { return static_cast<int>(burs.size()); }
};

struct DgburOptions {
  double dt{trajectory::kDefaultDt};
  int max_layers{5};
  double d_max{10.0};
};

/// Chains up to `max_layers` burs along `traj`. After each bur ends at
/// (q_m, t_m), planes move toward the robot by v_obs*(t_m - t_prev), the
/// profile and radii are refreshed at q_m and the next bur starts there.
DynamicGeneralizedBur compute_dgbur(const trajectory::Spline& traj, const DistanceProfile& d0, const PlaneSet& planes0,
                                    const PoseFn& pose_fn, double v_obs, const DgburOptions& opt = {});

struct SpineResult {
  Configuration q_reached;
  double step{0.0};
};

/// Largest static step along unit `direction` that keeps the displacement
/// bound of every link below its clearance; optionally clamped at `target`.
/// Throws ZeroDirection for a zero direction.
SpineResult extend_spine(const Configuration& q, const Eigen::VectorXd& direction, const DistanceProfile& d,
                         const EnclosingRadii& radii, const std::optional<Configuration>& target = std::nullopt);

struct GeneralizedSpine {
  Configuration q_reached;
  double length{0.0};
  int layers{0};
  bool reached_target{false};
  DistanceProfile d_end;  // plane-based underestimate at q_reached
};

/// Static spine of up to `max_layers` layers from q toward target; between
/// layers the profile is re-evaluated against the fixed planes.
GeneralizedSpine extend_generalized_spine(const Configuration& q, const Configuration& target,
                                          const DistanceProfile& d_root, const EnclosingRadii& radii_root,
                                          const PlaneSet& planes, const PoseFn& pose_fn, int max_layers,
                                          double d_max);

struct SliceSample {
  double x{0.0};
  double y{0.0};
  double v_obs{0.0};
  bool inside{false};
};

/// Grid membership over joints (axis_a, axis_b) of a bubble; other joints stay
/// at the root. `time_of` maps a grid configuration to the query time.
std::vector<SliceSample> deb_slice(const DynamicExpandedBubble& deb, int axis_a, int axis_b, double lo_a,
                                   double hi_a, double lo_b, double hi_b, int resolution,
                                   const std::vector<double>& velocities,
                                   const std::function<double(const Configuration&)>& time_of);

}  // namespace drgbt::bubbles
