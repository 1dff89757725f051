#pragma once

#include "drgbt/cspace.hpp"

#include <Eigen/Core>

#include <vector>

namespace drgbt::trajectory {

using cspace::Configuration;
using cspace::ExtendedConfiguration;

struct KinematicLimits {
  Eigen::VectorXd omega_max;
  Eigen::VectorXd alpha_max;
  Eigen::VectorXd jerk_max;

  int dof() const { return static_cast<int>(omega_max.size()); }
  /// Throws ConfigError unless all three vectors have `n` strictly positive entries.
  void validate(int n) const;

  static KinematicLimits uniform(int n, double omega, double alpha, double jerk);
};

/// One polynomial piece. Column k of `c` holds the coefficients of tau^k with
/// tau = t - t_begin.
struct PolySegment {
  double t_begin{0.0};
  double t_end{0.0};
  Eigen::MatrixXd c;

  int degree() const { return static_cast<int>(c.cols()) - 1; }
};

struct SplineSample {
  ExtendedConfiguration x;
  Eigen::VectorXd jerk;
};

/// Piecewise polynomial joint trajectory, C2 across segment junctions.
/// A quintic current spline has one degree-5 segment, an emergency spline one
/// degree-4 segment, a composite spline a quintic head followed by a quartic tail.
class Spline {
 public:
  Spline() = default;
  explicit Spline(std::vector<PolySegment> segments);

  bool empty() const { return segs_.empty(); }
  int dof() const { return segs_.empty() ? 0 : static_cast<int>(segs_.front().c.rows()); }
  double t0() const { return segs_.front().t_begin; }
  double tf() const { return segs_.back().t_end; }
  double duration() const { return tf() - t0(); }
  const std::vector<PolySegment>& segments() const { return segs_; }
  /// Interior segment boundaries (junction times).
  std::vector<double> junctions() const;

  /// Throws OutOfDomain when t is outside [t0, tf] (beyond a 1e-12 slack).
  SplineSample evaluate(double t) const;
  /// Outside the domain, holds the boundary position with zero rates past the
  /// end and the initial state before the start.
  SplineSample evaluate_clamped(double t) const;
  Configuration position(double t) const { return evaluate(t).x.q; }

  ExtendedConfiguration initial_state() const { return evaluate(t0()).x; }
  ExtendedConfiguration final_state() const { return evaluate(tf()).x; }

  /// Copy restricted to [t0, t_cut].
  Spline truncated(double t_cut) const;
  /// Copy with every time shifted by `dt`.
  Spline shifted(double dt) const;

 private:
  SplineSample eval_segment(const PolySegment& s, double t) const;

  std::vector<PolySegment> segs_;
};

/// Quintic on [t0, t0 + tf] with boundary states (q0, v0, a0) and (qf, vf, af).
Spline quintic_with_duration(const ExtendedConfiguration& x0, const Configuration& qf,
                             const Eigen::VectorXd& vf, const Eigen::VectorXd& af, double tf,
                             double t0 = 0.0);

/// Quartic stop from `x0` over `duration`: final velocity and acceleration zero.
Spline quartic_stop_with_duration(const ExtendedConfiguration& x0, double duration, double t0 = 0.0);

/// True iff |v| <= omega, |a| <= alpha, |jerk| <= jerk componentwise at every
/// grid point t0 + k*dt, at the final time and at every junction.
bool check_limits(const Spline& s, const KinematicLimits& lim, double dt);

/// Grid step shared with the bur discretization.
inline constexpr double kDefaultDt = 1e-3;

struct FitOptions {
  double dt{kDefaultDt};          // sampling step of the limit check, also the minimal duration
  double max_duration{100.0};     // search cap
};

/// Shortest quintic from x0 to (qf, vf, 0) satisfying the limits.
/// Throws Infeasible if x0 violates the limits or no duration up to the cap works.
Spline fit_quintic(const ExtendedConfiguration& x0, const Configuration& qf, const Eigen::VectorXd& vf,
                   const KinematicLimits& lim, const FitOptions& opt = {}, double t0 = 0.0);

/// Shortest quartic stop from x_new; the stop position is the spline's final
/// position. Throws Infeasible like fit_quintic.
Spline fit_emergency_quartic(const ExtendedConfiguration& x_new, const KinematicLimits& lim,
                             const FitOptions& opt = {}, double t0 = 0.0);

/// Quintic head on [t0, t_new] followed by the shortest emergency quartic from
/// the head state at t_new. Returns the head unchanged when it already ends by
/// t_new. Throws Infeasible when the tail cannot be fitted.
Spline make_composite(const Spline& head, double t_new, const KinematicLimits& lim, const FitOptions& opt = {});

/// Minimal rest-to-rest quintic duration for displacement `dq` (closed form).
double rest_to_rest_min_duration(const Eigen::VectorXd& dq, const KinematicLimits& lim);

/// Final velocity toward q_next: magnitude min(|omega|, rho(q_curr, q_next) / T)
/// along the motion direction, scaled down to respect omega componentwise and
/// so that no joint needs more than sqrt(v0^2 + alpha |dq|) to get there.
Eigen::VectorXd estimate_final_velocity(const ExtendedConfiguration& x_curr, const Configuration& q_next,
                                        const KinematicLimits& lim, double T);

}  // namespace drgbt::trajectory
