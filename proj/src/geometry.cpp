#include "drgbt/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace drgbt::geometry {

namespace {

// Squared distance from a + s*dir to the box, evaluated directly.
double sq_dist_at(const Vec3& a, const Vec3& dir, double s, const Box& box) {
  const Vec3 p = a + s * dir;
  return (p - box.clamp(p)).squaredNorm();
}

struct Piece {
  double lo{0.0};
  double hi{0.0};
  double qa{0.0};  // f(s) = qa s^2 + qb s + qc on [lo, hi]
  double qb{0.0};
  double qc{0.0};
};

}  // namespace

DistanceWitness distance_segment_box(const Vec3& seg_a, const Vec3& seg_b, const Box& box) {
  const Vec3 dir = seg_b - seg_a;
  const Vec3 lo = box.lower();
  const Vec3 hi = box.upper();

  std::array<double, 8> cuts{};
  std::size_t n_cuts = 0;
  cuts[n_cuts++] = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (dir[k] == 0.0) continue;
    for (double face : {lo[k], hi[k]}) {
      const double s = (face - seg_a[k]) / dir[k];
      if (s > 0.0 && s < 1.0) cuts[n_cuts++] = s;
    }
  }
  cuts[n_cuts++] = 1.0;
  std::sort(cuts.begin(), cuts.begin() + static_cast<std::ptrdiff_t>(n_cuts));

  // Build the quadratic on each region and find the global minimum value.
  std::array<Piece, 7> pieces{};
  std::size_t n_pieces = 0;
  double best = std::numeric_limits<double>::infinity();
  std::array<double, 7> piece_min{};
  std::array<double, 7> piece_arg{};
  for (std::size_t i = 0; i + 1 < n_cuts; ++i) {
    const double s_lo = cuts[i];
    const double s_hi = cuts[i + 1];
    if (s_hi < s_lo) continue;
    const double mid = 0.5 * (s_lo + s_hi);
    Piece pc{s_lo, s_hi, 0.0, 0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
      const double p = seg_a[k] + mid * dir[k];
      double alpha = 0.0;
      double beta = 0.0;
      if (p < lo[k]) {
        alpha = lo[k] - seg_a[k];
        beta = -dir[k];
      } else if (p > hi[k]) {
        alpha = seg_a[k] - hi[k];
        beta = dir[k];
      } else {
        continue;
      }
      pc.qa += beta * beta;
      pc.qb += 2.0 * alpha * beta;
      pc.qc += alpha * alpha;
    }
    double arg = s_lo;
    if (pc.qa > 0.0) {
      arg = std::clamp(-pc.qb / (2.0 * pc.qa), s_lo, s_hi);
    } else if (pc.qb < 0.0) {
      arg = s_hi;
    }
    const double val = sq_dist_at(seg_a, dir, arg, box);
    pieces[n_pieces] = pc;
    piece_min[n_pieces] = val;
    piece_arg[n_pieces] = arg;
    ++n_pieces;
    best = std::min(best, val);
  }

  // Minimizer set is an interval (convexity); take its midpoint.
  const double tol = 1e-14 * std::max(1.0, best);
  double lower = std::numeric_limits<double>::infinity();
  double upper = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_pieces; ++i) {
    if (piece_min[i] - best > tol) continue;
    const Piece& pc = pieces[i];
    const bool flat = pc.qa <= 1e-15 * std::max(1.0, dir.squaredNorm()) && std::abs(pc.qb) <= 1e-15;
    if (flat) {
      lower = std::min(lower, pc.lo);
      upper = std::max(upper, pc.hi);
    } else {
      lower = std::min(lower, piece_arg[i]);
      upper = std::max(upper, piece_arg[i]);
    }
  }
  const double s = 0.5 * (lower + upper);

  DistanceWitness w;
  w.r_point = seg_a + s * dir;
  w.o_point = box.clamp(w.r_point);
  w.distance = (w.r_point - w.o_point).norm();
  return w;
}

DistanceWitness distance_capsule_box(const Capsule& c, const Box& box) {
  DistanceWitness w = distance_segment_box(c.a, c.b, box);
  w.distance -= c.radius;
  return w;
}

SegmentPair closest_segment_segment(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  const Vec3 d1 = q1 - p1;
  const Vec3 d2 = q2 - p2;
  const Vec3 r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  constexpr double eps = 1e-14;
  double s = 0.0;
  double t = 0.0;
  if (a <= eps && e <= eps) {
    // both points
  } else if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > eps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  SegmentPair out;
  out.p = p1 + s * d1;
  out.q = p2 + t * d2;
  out.distance = (out.p - out.q).norm();
  return out;
}

double distance_capsule_capsule(const Capsule& c1, const Capsule& c2) {
  return closest_segment_segment(c1.a, c1.b, c2.a, c2.b).distance - c1.radius - c2.radius;
}

Eigen::VectorXd DistanceProfile::clearance() const {
  if (!has_fixed()) return d;
  return d.cwiseMin(d_fixed);
}

double DistanceProfile::self_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& sc : self) m = std::min(m, sc.distance);
  return m;
}

std::vector<SelfClearance> self_clearances(std::span<const Capsule> links, int gap) {
  std::vector<SelfClearance> out;
  const int n = static_cast<int>(links.size());
  for (int a = 0; a < n; ++a) {
    for (int b = a + gap; b < n; ++b) {
      out.push_back({a, b, distance_capsule_capsule(links[static_cast<std::size_t>(a)],
                                                   links[static_cast<std::size_t>(b)])});
    }
  }
  return out;
}

namespace {

Vec3 fallback_normal(const Box& box, const DistanceWitness& w, const PlaneSet* previous, int link,
                     int obstacle, int n_links, int n_obstacles) {
  if (previous != nullptr && previous->n_links == n_links && previous->n_obstacles() == n_obstacles) {
    return previous->at(link, obstacle).normal;
  }
  const Vec3 away = w.r_point - box.center;
  if (away.norm() > 1e-12) return away.normalized();
  return Vec3::UnitZ();
}

}  // namespace

ProfileResult compute_distance_profile(std::span<const Capsule> links, std::span<const Box> obstacles,
                                       std::span<const Box> fixtures, double d_max,
                                       const PlaneSet* previous, int self_gap) {
  const int n = static_cast<int>(links.size());
  const int n_mov = static_cast<int>(obstacles.size());
  const int n_fix = static_cast<int>(fixtures.size());
  const int n_obs = n_mov + n_fix;

  ProfileResult res;
  auto& prof = res.profile;
  prof.d = Eigen::VectorXd::Constant(n, d_max);
  if (n_fix > 0) prof.d_fixed = Eigen::VectorXd::Constant(n, d_max);

  auto& ps = res.planes;
  ps.n_links = n;
  ps.n_moving = n_mov;
  ps.n_fixed = n_fix;
  ps.planes.reserve(static_cast<std::size_t>(n * n_obs));

  for (int i = 0; i < n; ++i) {
    const Capsule& cap = links[static_cast<std::size_t>(i)];
    for (int j = 0; j < n_obs; ++j) {
      const bool fixed = j >= n_mov;
      const Box& box = fixed ? fixtures[static_cast<std::size_t>(j - n_mov)] : obstacles[static_cast<std::size_t>(j)];
      const DistanceWitness w = distance_capsule_box(cap, box);
      SeparatingPlane pl;
      pl.link_index = i;
      pl.obstacle_index = fixed ? j - n_mov : j;
      pl.fixed = fixed;
      pl.point = w.o_point;
      const Vec3 gap = w.r_point - w.o_point;
      const double len = gap.norm();
      if (len > 1e-12) {
        pl.normal = gap / len;
      } else {
        pl.normal = fallback_normal(box, w, previous, i, j, n, n_obs);
        pl.degenerate = true;
      }
      ps.planes.push_back(pl);
      if (fixed) {
        prof.d_fixed[i] = std::min(prof.d_fixed[i], w.distance);
      } else {
        prof.d[i] = std::min(prof.d[i], w.distance);
      }
    }
  }
  prof.d_c = n > 0 ? prof.d.minCoeff() : d_max;
  prof.self = self_clearances(links, self_gap);
  return res;
}

PlaneSet update_planes(const PlaneSet& ps, double elapsed, double v_obs) {
  PlaneSet out = ps;
  const double shift = v_obs * elapsed;
  out.stamp_time = ps.stamp_time + elapsed;
  if (shift == 0.0) return out;
  for (auto& pl : out.planes) {
    if (!pl.fixed) pl.point += shift * pl.normal;
  }
  return out;
}

DistanceProfile distance_to_planes(std::span<const Capsule> links, const PlaneSet& ps, double d_max, int self_gap) {
  const int n = static_cast<int>(links.size());
  DistanceProfile prof;
  prof.d = Eigen::VectorXd::Constant(n, d_max);
  if (ps.n_fixed > 0) prof.d_fixed = Eigen::VectorXd::Constant(n, d_max);
  const int n_obs = ps.n_obstacles();
  for (int i = 0; i < n && i < ps.n_links; ++i) {
    const Capsule& cap = links[static_cast<std::size_t>(i)];
    for (int j = 0; j < n_obs; ++j) {
      const SeparatingPlane& pl = ps.at(i, j);
      const double sd = std::min(pl.signed_distance(cap.a), pl.signed_distance(cap.b)) - cap.radius;
      if (pl.fixed) {
        prof.d_fixed[i] = std::min(prof.d_fixed[i], sd);
      } else {
        prof.d[i] = std::min(prof.d[i], sd);
      }
    }
  }
  prof.d_c = n > 0 ? prof.d.minCoeff() : d_max;
  prof.self = self_clearances(links, self_gap);
  return prof;
}

}  // namespace drgbt::geometry
