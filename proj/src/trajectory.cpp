#include "drgbt/trajectory.hpp"

#include "drgbt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace drgbt::trajectory {

namespace {

constexpr double kDomainSlack = 1e-12;
constexpr double kLimitRelTol = 1e-9;
constexpr double kFineGrowth = 1.02;
constexpr double kFineSpan = 10.0;  // seconds covered by the fine pass

bool within(const Eigen::VectorXd& x, const Eigen::VectorXd& bound) {
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!(std::abs(x[j]) <= bound[j] * (1.0 + kLimitRelTol))) return false;
  }
  return true;
}

void require_state_within(const ExtendedConfiguration& x, const KinematicLimits& lim, const char* who) {
  if (x.q.size() != lim.dof() || x.q_dot.size() != lim.dof() || x.q_ddot.size() != lim.dof()) {
    throw DimensionMismatch(std::string(who) + ": state and limits differ in size");
  }
  if (!x.q.allFinite() || !x.q_dot.allFinite() || !x.q_ddot.allFinite()) {
    throw Infeasible(std::string(who) + ": non-finite initial state");
  }
  if (!within(x.q_dot, lim.omega_max) || !within(x.q_ddot, lim.alpha_max)) {
    throw Infeasible(std::string(who) + ": initial state violates kinematic limits");
  }
}

// Shortest duration in [lower, cap] for which `make(duration)` passes the
// limit check: geometric growth then bisection.
Spline shortest(const std::function<Spline(double)>& make, double lower, const KinematicLimits& lim,
                const FitOptions& opt, const char* who) {
  double hi = std::max(lower, opt.dt);
  Spline best = make(hi);
  if (check_limits(best, lim, opt.dt)) return best;
  // Feasible durations need not form one interval (a large initial
  // acceleration overshoots omega on long splines and jerk on short ones), so
  // a coarse pass that finds nothing is repeated with a fine step.
  const double start = hi;
  const double fine_cap = std::min(opt.max_duration, kFineSpan);
  double lo = hi;
  bool found = false;
  for (const double factor : {1.2, kFineGrowth}) {
    double prev = start;
    for (double t = start * factor; t <= (factor == kFineGrowth ? fine_cap : opt.max_duration); t *= factor) {
      Spline s = make(t);
      if (check_limits(s, lim, opt.dt)) {
        best = std::move(s);
        lo = prev;
        hi = t;
        found = true;
        break;
      }
      prev = t;
    }
    if (found) break;
  }
  if (!found) throw Infeasible(std::string(who) + ": no feasible duration below the cap");
  while (hi - lo > std::min(1e-4, 1e-3 * hi)) {
    const double mid = 0.5 * (lo + hi);
    Spline s = make(mid);
    if (check_limits(s, lim, opt.dt)) {
      hi = mid;
      best = std::move(s);
    } else {
      lo = mid;
    }
  }
  return best;
}

}  // namespace

void KinematicLimits::validate(int n) const {
  if (omega_max.size() != n || alpha_max.size() != n || jerk_max.size() != n) {
    throw ConfigError("kinematic limits must have one entry per joint");
  }
  if ((omega_max.array() <= 0.0).any() || (alpha_max.array() <= 0.0).any() || (jerk_max.array() <= 0.0).any()) {
    throw ConfigError("kinematic limits must be strictly positive");
  }
}

KinematicLimits KinematicLimits::uniform(int n, double omega, double alpha, double jerk) {
  return {Eigen::VectorXd::Constant(n, omega), Eigen::VectorXd::Constant(n, alpha), Eigen::VectorXd::Constant(n, jerk)};
}

Spline::Spline(std::vector<PolySegment> segments) : segs_(std::move(segments)) {}

std::vector<double> Spline::junctions() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < segs_.size(); ++i) out.push_back(segs_[i].t_begin);
  return out;
}

SplineSample Spline::eval_segment(const PolySegment& s, double t) const {
  const double tau = t - s.t_begin;
  const Eigen::Index n = s.c.rows();
  const int deg = s.degree();
  SplineSample out;
  out.x.q = Eigen::VectorXd::Zero(n);
  out.x.q_dot = Eigen::VectorXd::Zero(n);
  out.x.q_ddot = Eigen::VectorXd::Zero(n);
  out.jerk = Eigen::VectorXd::Zero(n);
  // Horner on each derivative.
  for (int k = deg; k >= 0; --k) {
    out.x.q = out.x.q * tau + s.c.col(k);
    if (k >= 1) out.x.q_dot = out.x.q_dot * tau + k * s.c.col(k);
    if (k >= 2) out.x.q_ddot = out.x.q_ddot * tau + (k * (k - 1)) * s.c.col(k);
    if (k >= 3) out.jerk = out.jerk * tau + (k * (k - 1) * (k - 2)) * s.c.col(k);
  }
  return out;
}

SplineSample Spline::evaluate(double t) const {
  if (segs_.empty()) throw OutOfDomain("evaluate: empty spline");
  if (t < t0() - kDomainSlack || t > tf() + kDomainSlack) throw OutOfDomain("evaluate: time outside spline domain");
  for (const auto& s : segs_) {
    if (t <= s.t_end) return eval_segment(s, std::max(t, s.t_begin));
  }
  return eval_segment(segs_.back(), segs_.back().t_end);
}

SplineSample Spline::evaluate_clamped(double t) const {
  if (segs_.empty()) throw OutOfDomain("evaluate: empty spline");
  if (t <= t0()) return evaluate(t0());
  if (t < tf()) return evaluate(t);
  SplineSample s = evaluate(tf());
  s.x.q_dot.setZero();
  s.x.q_ddot.setZero();
  s.jerk.setZero();
  return s;
}

Spline Spline::truncated(double t_cut) const {
  std::vector<PolySegment> out;
  for (const auto& s : segs_) {
    if (!out.empty() && s.t_begin >= t_cut) break;
    out.push_back(s);
    if (s.t_end >= t_cut) {
      out.back().t_end = t_cut;
      break;
    }
  }
  return Spline(std::move(out));
}

Spline Spline::shifted(double dt) const {
  std::vector<PolySegment> out = segs_;
  for (auto& s : out) {
    s.t_begin += dt;
    s.t_end += dt;
  }
  return Spline(std::move(out));
}

Spline quintic_with_duration(const ExtendedConfiguration& x0, const Configuration& qf, const Eigen::VectorXd& vf,
                             const Eigen::VectorXd& af, double tf, double t0) {
  if (!(tf > 0.0)) throw Infeasible("quintic: duration must be positive");
  const Eigen::Index n = x0.q.size();
  if (qf.size() != n || vf.size() != n || af.size() != n) throw DimensionMismatch("quintic: boundary sizes differ");
  const double T = tf;
  const Eigen::VectorXd h = qf - x0.q - x0.q_dot * T - 0.5 * x0.q_ddot * T * T;
  const Eigen::VectorXd dv = vf - x0.q_dot - x0.q_ddot * T;
  const Eigen::VectorXd da = af - x0.q_ddot;
  PolySegment seg;
  seg.t_begin = t0;
  seg.t_end = t0 + T;
  seg.c.resize(n, 6);
  seg.c.col(0) = x0.q;
  seg.c.col(1) = x0.q_dot;
  seg.c.col(2) = 0.5 * x0.q_ddot;
  seg.c.col(3) = (10.0 * h - 4.0 * T * dv + 0.5 * T * T * da) / std::pow(T, 3);
  seg.c.col(4) = (-15.0 * h + 7.0 * T * dv - T * T * da) / std::pow(T, 4);
  seg.c.col(5) = (6.0 * h - 3.0 * T * dv + 0.5 * T * T * da) / std::pow(T, 5);
  return Spline({seg});
}

Spline quartic_stop_with_duration(const ExtendedConfiguration& x0, double duration, double t0) {
  if (!(duration > 0.0)) throw Infeasible("quartic: duration must be positive");
  const double tau = duration;
  const Eigen::Index n = x0.q.size();
  PolySegment seg;
  seg.t_begin = t0;
  seg.t_end = t0 + tau;
  seg.c.resize(n, 5);
  seg.c.col(0) = x0.q;
  seg.c.col(1) = x0.q_dot;
  seg.c.col(2) = 0.5 * x0.q_ddot;
  seg.c.col(3) = -(3.0 * x0.q_dot + 2.0 * tau * x0.q_ddot) / (3.0 * tau * tau);
  seg.c.col(4) = (2.0 * x0.q_dot + tau * x0.q_ddot) / (4.0 * tau * tau * tau);
  return Spline({seg});
}

bool check_limits(const Spline& s, const KinematicLimits& lim, double dt) {
  if (s.empty()) return true;
  const double t0 = s.t0();
  const double tf = s.tf();
  const auto steps = static_cast<long>(std::floor((tf - t0) / dt));
  const auto& segs = s.segments();
  // Scalar Horner per joint; grid points go to the segment that evaluate() uses.
  const auto ok_at = [&](const PolySegment& seg, double t) {
    const double tau = t - seg.t_begin;
    const int deg = seg.degree();
    for (Eigen::Index j = 0; j < seg.c.rows(); ++j) {
      double v = 0.0;
      double a = 0.0;
      double jk = 0.0;
      for (int k = deg; k >= 1; --k) {
        const double ck = seg.c(j, k);
        v = v * tau + k * ck;
        if (k >= 2) a = a * tau + (k * (k - 1)) * ck;
        if (k >= 3) jk = jk * tau + (k * (k - 1) * (k - 2)) * ck;
      }
      const double tol = 1.0 + kLimitRelTol;
      if (!(std::abs(v) <= lim.omega_max[j] * tol) || !(std::abs(a) <= lim.alpha_max[j] * tol) ||
          !(std::abs(jk) <= lim.jerk_max[j] * tol)) {
        return false;
      }
    }
    return true;
  };
  std::size_t si = 0;
  for (long k = 0; k <= steps; ++k) {
    const double t = std::min(t0 + static_cast<double>(k) * dt, tf);
    while (si + 1 < segs.size() && t > segs[si].t_end) ++si;
    if (!ok_at(segs[si], t)) return false;
  }
  if (!ok_at(segs.back(), tf)) return false;
  // Jerk jumps at junctions: check both sides.
  for (std::size_t i = 1; i < segs.size(); ++i) {
    if (!ok_at(segs[i - 1], segs[i - 1].t_end) || !ok_at(segs[i], segs[i].t_begin)) return false;
  }
  return true;
}

Spline fit_quintic(const ExtendedConfiguration& x0, const Configuration& qf, const Eigen::VectorXd& vf,
                   const KinematicLimits& lim, const FitOptions& opt, double t0) {
  require_state_within(x0, lim, "fit_quintic");
  if (qf.size() != lim.dof() || vf.size() != lim.dof()) throw DimensionMismatch("fit_quintic: target size");
  const Eigen::VectorXd dq = qf - x0.q;
  double lower = (dq.cwiseAbs().array() / lim.omega_max.array()).maxCoeff();
  if (x0.q_dot.isZero(0.0) && x0.q_ddot.isZero(0.0) && vf.isZero(0.0)) {
    lower = std::max(lower, rest_to_rest_min_duration(dq, lim));
  }
  const Eigen::VectorXd af = Eigen::VectorXd::Zero(qf.size());
  return shortest([&](double T) { return quintic_with_duration(x0, qf, vf, af, T, t0); }, lower, lim, opt,
                  "fit_quintic");
}

Spline fit_emergency_quartic(const ExtendedConfiguration& x_new, const KinematicLimits& lim, const FitOptions& opt,
                             double t0) {
  require_state_within(x_new, lim, "fit_emergency_quartic");
  const double lower = (x_new.q_dot.cwiseAbs().array() / lim.alpha_max.array()).maxCoeff();
  return shortest([&](double tau) { return quartic_stop_with_duration(x_new, tau, t0); }, lower, lim, opt,
                  "fit_emergency_quartic");
}

Spline make_composite(const Spline& head, double t_new, const KinematicLimits& lim, const FitOptions& opt) {
  if (head.tf() <= t_new + kDomainSlack) return head;
  Spline cut = head.truncated(t_new);
  const ExtendedConfiguration x = head.evaluate(t_new).x;
  Spline tail = fit_emergency_quartic(x, lim, opt, t_new);
  std::vector<PolySegment> segs = cut.segments();
  segs.push_back(tail.segments().front());
  return Spline(std::move(segs));
}

double rest_to_rest_min_duration(const Eigen::VectorXd& dq, const KinematicLimits& lim) {
  const double accel_peak = 10.0 * std::sqrt(3.0) / 3.0;
  double t = 0.0;
  for (Eigen::Index j = 0; j < dq.size(); ++j) {
    const double d = std::abs(dq[j]);
    t = std::max({t, 15.0 * d / (8.0 * lim.omega_max[j]), std::sqrt(accel_peak * d / lim.alpha_max[j]),
                  std::cbrt(60.0 * d / lim.jerk_max[j])});
  }
  return t;
}

Eigen::VectorXd estimate_final_velocity(const ExtendedConfiguration& x_curr, const Configuration& q_next,
                                        const KinematicLimits& lim, double T) {
  const Eigen::VectorXd delta = q_next - x_curr.q;
  const double dist = delta.norm();
  if (dist == 0.0) return Eigen::VectorXd::Zero(delta.size());
  const double mag = std::min(lim.omega_max.norm(), dist / T);
  Eigen::VectorXd v = (mag / dist) * delta;
  double scale = 1.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (std::abs(v[j]) > lim.omega_max[j]) scale = std::min(scale, lim.omega_max[j] / std::abs(v[j]));
    // Speed the joint can build up on the way without backing off first.
    const double along = delta[j] >= 0.0 ? x_curr.q_dot[j] : -x_curr.q_dot[j];
    const double v0 = std::max(along, 0.0);
    const double reach = std::sqrt(v0 * v0 + lim.alpha_max[j] * std::abs(delta[j]));
    if (std::abs(v[j]) > reach) scale = std::min(scale, reach / std::abs(v[j]));
  }
  return scale * v;
}

}  // namespace drgbt::trajectory
