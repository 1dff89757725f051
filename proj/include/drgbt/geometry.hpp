#pragma once

#include <Eigen/Core>

#include <span>
#include <utility>
#include <vector>

namespace drgbt::geometry {

using Vec3 = Eigen::Vector3d;

/// Axis-aligned box obstacle moving with constant velocity.
struct Box {
  Vec3 center{Vec3::Zero()};
  Vec3 half_extents{Vec3::Constant(0.5)};
  Vec3 velocity{Vec3::Zero()};

  Vec3 lower() const { return center - half_extents; }
  Vec3 upper() const { return center + half_extents; }
  Vec3 clamp(const Vec3& p) const { return p.cwiseMax(lower()).cwiseMin(upper()); }
};

/// Segment swept by a sphere. `a == b` degenerates to a sphere.
struct Capsule {
  Vec3 a{Vec3::Zero()};
  Vec3 b{Vec3::Zero()};
  double radius{0.0};
};

/// Result of a distance query. `r_point` lies on the robot segment (not on the
/// capsule surface), `o_point` on the obstacle. For capsules the distance is
/// surface-to-surface, so it is negative on penetration.
struct DistanceWitness {
  double distance{0.0};
  Vec3 r_point{Vec3::Zero()};
  Vec3 o_point{Vec3::Zero()};
};

/// Exact segment/box distance. The squared distance along the segment is a
/// convex piecewise quadratic whose pieces are the face/edge/vertex regions the
/// segment crosses; each piece is minimized in closed form. When the minimizer
/// is not unique the witness is the midpoint of the minimizing parameter
/// interval, which keeps results deterministic.
DistanceWitness distance_segment_box(const Vec3& seg_a, const Vec3& seg_b, const Box& box);

DistanceWitness distance_capsule_box(const Capsule& c, const Box& box);

struct SegmentPair {
  double distance{0.0};
  Vec3 p{Vec3::Zero()};
  Vec3 q{Vec3::Zero()};
};

SegmentPair closest_segment_segment(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2);

/// Surface distance between two capsules, negative on overlap.
double distance_capsule_capsule(const Capsule& c1, const Capsule& c2);

/// Plane separating one link from one obstacle. The normal points from the
/// obstacle toward the link; the robot side is `signed_distance > 0`.
struct SeparatingPlane {
  Vec3 normal{Vec3::UnitZ()};
  Vec3 point{Vec3::Zero()};
  int link_index{0};
  int obstacle_index{0};
  bool fixed{false};       // belongs to a static fixture, never translated
  bool degenerate{false};  // contact at query time, normal taken from a fallback

  double signed_distance(const Vec3& x) const { return normal.dot(x - point); }
};

/// One plane per (link, obstacle) pair, row-major by link. Moving obstacles come
/// first, static fixtures after them.
struct PlaneSet {
  int n_links{0};
  int n_moving{0};
  int n_fixed{0};
  std::vector<SeparatingPlane> planes;
  double stamp_time{0.0};

  int n_obstacles() const { return n_moving + n_fixed; }
  bool empty() const { return planes.empty(); }
  const SeparatingPlane& at(int link, int obstacle) const {
    return planes[static_cast<std::size_t>(link * n_obstacles() + obstacle)];
  }
};

/// Surface clearance between two non-adjacent links (a < b).
struct SelfClearance {
  int a{0};
  int b{0};
  double distance{0.0};
};

/// Piecewise-constant distance profile of the robot.
///
/// `d` holds per-link minima over moving obstacles (the quantity that shrinks
/// at the obstacle speed bound). `d_fixed` holds per-link minima over static
/// fixtures and is empty when there are none. `self` lists clearances of
/// non-adjacent link pairs. `d_c` is the minimum of `d`; fixtures only bound
/// bubbles and do not make a configuration critical.
struct DistanceProfile {
  Eigen::VectorXd d;
  double d_c{0.0};
  Eigen::VectorXd d_fixed;
  std::vector<SelfClearance> self;

  int size() const { return static_cast<int>(d.size()); }
  bool has_fixed() const { return d_fixed.size() > 0; }
  /// Element-wise min of moving and fixed distances.
  Eigen::VectorXd clearance() const;
  double self_min() const;
};

struct ProfileResult {
  DistanceProfile profile;
  PlaneSet planes;
};

/// Per-link distances to every obstacle and fixture, with one separating plane
/// per pair. `d_max` replaces the empty minimum. `previous` (optional) supplies
/// fallback normals for pairs in exact contact.
ProfileResult compute_distance_profile(std::span<const Capsule> links, std::span<const Box> obstacles,
                                       std::span<const Box> fixtures, double d_max,
                                       const PlaneSet* previous = nullptr, int self_gap = 2);

/// Clearances of all link pairs that do not share a joint.
/// Pairs (a, b) with b >= a + gap.
std::vector<SelfClearance> self_clearances(std::span<const Capsule> links, int gap = 2);

/// Translates every moving plane toward its link by `v_obs * elapsed`.
PlaneSet update_planes(const PlaneSet& ps, double elapsed, double v_obs);

/// Signed capsule/plane distances: min over segment endpoints minus radius.
/// Underestimates the true distance to the obstacle behind each plane.
DistanceProfile distance_to_planes(std::span<const Capsule> links, const PlaneSet& ps, double d_max,
                                   int self_gap = 2);

}  // namespace drgbt::geometry
