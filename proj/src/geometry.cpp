#include "prsynth/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace prsynth {

bool Cuboid::contains(const Vec3& p) const {
  return (p.array() >= min_corner.array()).all() && (p.array() <= max_corner.array()).all();
}

double Cuboid::distance_outside(const Vec3& p) const {
  const Vec3 below = (min_corner - p).cwiseMax(0.0);
  const Vec3 above = (p - max_corner).cwiseMax(0.0);
  return (below + above).norm();
}

double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1,
                        double* s_out, double* t_out) {
  constexpr double kEps = 1e-300;
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = d1.dot(d1);
  const double e = d2.dot(d2);
  const double f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= kEps && e <= kEps) {
    // both degenerate
  } else if (a <= kEps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      // near-parallel: any s is optimal along the overlap, take s = 0
      if (denom > 1e-14 * a * e) s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
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
  if (s_out) *s_out = s;
  if (t_out) *t_out = t;
  return ((p0 + s * d1) - (q0 + t * d2)).norm();
}

namespace {

bool lex_less(const Capsule& x, const Capsule& y) {
  for (int i = 0; i < 3; ++i) {
    if (x.a[i] != y.a[i]) return x.a[i] < y.a[i];
  }
  for (int i = 0; i < 3; ++i) {
    if (x.b[i] != y.b[i]) return x.b[i] < y.b[i];
  }
  return x.radius < y.radius;
}

}  // namespace

double capsule_distance(const Capsule& a, const Capsule& b) {
  const bool swap = lex_less(b, a);
  const Capsule& first = swap ? b : a;
  const Capsule& second = swap ? a : b;
  return segment_distance(first.a, first.b, second.a, second.b) -
         (first.radius + second.radius);
}

std::vector<std::pair<double, double>> outside_ball(const Vec3& a, const Vec3& b,
                                                    const Vec3& center, double radius) {
  const Vec3 d = b - a;
  const Vec3 m = a - center;
  const double qa = d.dot(d);
  const double qb = 2.0 * d.dot(m);
  const double qc = m.dot(m) - radius * radius;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (qa <= 0.0 || disc <= 0.0) {
    if (qc < 0.0) return {};
    return {{0.0, 1.0}};
  }
  const double root = std::sqrt(disc);
  const double t1 = (-qb - root) / (2.0 * qa);
  const double t2 = (-qb + root) / (2.0 * qa);
  std::vector<std::pair<double, double>> pieces;
  constexpr double kMinPiece = 1e-9;
  if (t1 > kMinPiece) pieces.emplace_back(0.0, std::min(1.0, t1));
  if (t2 < 1.0 - kMinPiece) pieces.emplace_back(std::max(0.0, t2), 1.0);
  return pieces;
}

bool clip_to_cuboid(const Vec3& a, const Vec3& b, const Cuboid& box, double& t0, double& t1) {
  const Vec3 d = b - a;
  t0 = 0.0;
  t1 = 1.0;
  for (int axis = 0; axis < 3; ++axis) {
    const double lo = box.min_corner[axis] - a[axis];
    const double hi = box.max_corner[axis] - a[axis];
    if (d[axis] == 0.0) {
      if (lo > 0.0 || hi < 0.0) return false;
      continue;
    }
    double ta = lo / d[axis], tb = hi / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

namespace {

// Closed polygon through points sorted by polar angle in the given frame.
void append_rim(std::vector<Capsule>& out, const std::vector<Vec3>& world,
                const std::vector<Vec3>& local, BodyKind kind, double radius) {
  const int n = static_cast<int>(world.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return std::atan2(local[i].y(), local[i].x()) < std::atan2(local[j].y(), local[j].x());
  });
  for (int k = 0; k < n; ++k) {
    const int i = order[k], j = order[(k + 1) % n];
    Capsule c;
    c.a = world[i];
    c.b = world[j];
    c.radius = radius;
    c.owner = {kind, i, k, j};
    out.push_back(c);
  }
}

}  // namespace

CollisionSet build_collision_set(const RobotModel& model, const KinematicState& state,
                                 const Cuboid* interaction, const GeometryOptions& options) {
  std::vector<LegFrames> frames;
  for (int i = 0; i < model.leg_count(); ++i) frames.push_back(leg_frames(model, i, state.q));
  return build_collision_set(model, frames, interaction, options);
}

CollisionSet build_collision_set(const RobotModel& model, const std::vector<LegFrames>& frames,
                                 const Cuboid* interaction,
                                 const GeometryOptions& options) {
  CollisionSet set;
  const double radius = 0.5 * model.options.tube_diameter + model.options.clearance;
  const double rim_radius = 0.5 * model.options.platform_thickness;
  std::vector<Vec3> coupling_world, coupling_local, base_world, base_local;
  for (int i = 0; i < model.leg_count(); ++i) {
    const std::vector<Vec3> centers = joint_centers(model, i, frames[static_cast<std::size_t>(i)]);
    const Vec3& coupling = centers.back();
    coupling_world.push_back(coupling);
    coupling_local.push_back(model.legs[static_cast<std::size_t>(i)].platform_point);
    base_world.push_back(centers.front());
    base_local.push_back(centers.front());
    for (std::size_t s = 0; s + 1 < centers.size(); ++s) {
      Capsule c;
      c.a = centers[s];
      c.b = centers[s + 1];
      c.radius = radius;
      c.owner = {BodyKind::Segment, i, static_cast<int>(s), -1};
      set.bodies.push_back(c);

      for (const auto& [u0, u1] :
           outside_ball(c.a, c.b, coupling, options.platform_exclusion_length)) {
        double v0 = u0, v1 = u1;
        if (interaction) {
          const Vec3 pa = c.a + u0 * (c.b - c.a);
          const Vec3 pb = c.a + u1 * (c.b - c.a);
          double w0, w1;
          if (!clip_to_cuboid(pa, pb, *interaction, w0, w1)) continue;
          v0 = u0 + w0 * (u1 - u0);
          v1 = u0 + w1 * (u1 - u0);
          if (v1 - v0 <= 0.0) continue;
        }
        Capsule piece = c;
        piece.a = c.a + v0 * (c.b - c.a);
        piece.b = c.a + v1 * (c.b - c.a);
        set.clamping.push_back(piece);
      }
    }
  }
  append_rim(set.bodies, coupling_world, coupling_local, BodyKind::Platform, rim_radius);
  if (!model.planar())
    append_rim(set.bodies, base_world, base_local, BodyKind::Base, rim_radius);
  return set;
}

PairDistance min_clamping_distance(const std::vector<Capsule>& capsules) {
  PairDistance best;
  const int n = static_cast<int>(capsules.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const CapsuleOwner& a = capsules[i].owner;
      const CapsuleOwner& b = capsules[j].owner;
      if (a.kind != BodyKind::Segment || b.kind != BodyKind::Segment || a.leg == b.leg) continue;
      const double d = capsule_distance(capsules[i], capsules[j]);
      if (d < best.distance) best = {d, i, j};
    }
  }
  return best;
}

bool adjacent(const RobotModel& model, const CapsuleOwner& a, const CapsuleOwner& b) {
  if (a.kind != BodyKind::Segment && a.kind == b.kind) return true;  // same rigid frame
  if (a.kind == BodyKind::Segment && b.kind == BodyKind::Segment)
    return a.leg == b.leg && std::abs(a.segment - b.segment) <= 1;
  const CapsuleOwner& seg = a.kind == BodyKind::Segment ? a : b;
  const CapsuleOwner& rim = a.kind == BodyKind::Segment ? b : a;
  if (seg.kind != BodyKind::Segment) return false;  // base vs platform
  // every actuator is mounted on the base frame and every distal joint on the platform
  if (rim.kind == BodyKind::Base) return seg.segment == 0;
  return seg.segment == model.segments_per_leg() - 1;
}

PairDistance self_collision(const RobotModel& model, const std::vector<Capsule>& bodies) {
  PairDistance best;
  const int n = static_cast<int>(bodies.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (adjacent(model, bodies[i].owner, bodies[j].owner)) continue;
      const double d = capsule_distance(bodies[i], bodies[j]);
      if (d < best.distance) best = {d, i, j};
    }
  }
  return best;
}

ContainmentReport containment_check(const std::vector<Capsule>& capsules,
                                    const std::vector<Cuboid>& spaces,
                                    const GeometryOptions& options) {
  ContainmentReport report;
  const int samples = std::max(2, options.containment_samples);
  for (const Capsule& c : capsules) {
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
      const double t = static_cast<double>(k) / (samples - 1);
      const Vec3 p = c.a + t * (c.b - c.a);
      double outside = std::numeric_limits<double>::infinity();
      for (const Cuboid& box : spaces) outside = std::min(outside, box.distance_outside(p));
      worst = std::max(worst, outside);
    }
    report.contained.push_back(worst <= 0.0);
    report.protrusion.push_back(worst);
    report.max_protrusion = std::max(report.max_protrusion, worst);
  }
  return report;
}

}  // namespace prsynth
