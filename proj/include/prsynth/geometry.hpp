#pragma once

#include "prsynth/kinematics.hpp"

#include <limits>
#include <vector>

namespace prsynth {

enum class BodyKind { Segment, Platform, Base };

struct CapsuleOwner {
  BodyKind kind = BodyKind::Segment;
  int leg = -1;        // segment owner, or the leg at the first end of a rim
  int segment = -1;    // segment index, or rim index for platform and base capsules
  int other_leg = -1;  // leg at the second end of a rim
};

struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
  CapsuleOwner owner;
};

enum class CuboidRole { Installation, Interaction, Forbidden };

struct Cuboid {
  Vec3 min_corner = Vec3::Zero();
  Vec3 max_corner = Vec3::Zero();
  CuboidRole role = CuboidRole::Installation;

  bool contains(const Vec3& p) const;
  /// Euclidean distance from p to the box, zero inside.
  double distance_outside(const Vec3& p) const;
  Vec3 size() const { return max_corner - min_corner; }
};

/// Closest distance between segments [p0, p1] and [q0, q1]; s and t receive
/// the parameters of the closest points. Parallel ties resolve toward s = 0.
double segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1,
                        double* s = nullptr, double* t = nullptr);

/// Axis distance minus the radii; negative when the capsules overlap.
/// Symmetric bit-for-bit in its arguments.
double capsule_distance(const Capsule& a, const Capsule& b);

struct GeometryOptions {
  double platform_exclusion_length = 0.1;  // m around each leg's platform coupling
  int containment_samples = 33;            // points along each capsule axis
};

struct CollisionSet {
  std::vector<Capsule> bodies;    // full capsules: leg segments, platform and base rims
  std::vector<Capsule> clamping;  // leg-segment pieces used for the clamping distance
};

/// interaction may be null, in which case clamping pieces are not clipped.
CollisionSet build_collision_set(const RobotModel& model, const KinematicState& state,
                                 const Cuboid* interaction, const GeometryOptions& options = {});

/// Same, reusing leg frames already computed for a Jacobian evaluation.
CollisionSet build_collision_set(const RobotModel& model, const std::vector<LegFrames>& frames,
                                 const Cuboid* interaction,
                                 const GeometryOptions& options = {});

/// Pieces of segment [a, b] that lie outside the ball (center, radius),
/// as parameter intervals in [0, 1].
std::vector<std::pair<double, double>> outside_ball(const Vec3& a, const Vec3& b,
                                                    const Vec3& center, double radius);

/// Parameter interval of [a, b] inside the box, or false if it misses.
bool clip_to_cuboid(const Vec3& a, const Vec3& b, const Cuboid& box, double& t0, double& t1);

struct PairDistance {
  double distance = std::numeric_limits<double>::infinity();
  int first = -1;
  int second = -1;
};

/// Minimum capsule distance over pairs owned by different legs.
PairDistance min_clamping_distance(const std::vector<Capsule>& capsules);

/// Two bodies are adjacent when they share a joint or belong to the same
/// rigid frame; adjacent pairs are skipped by the self-collision test.
bool adjacent(const RobotModel& model, const CapsuleOwner& a, const CapsuleOwner& b);

/// Minimum distance over non-adjacent body pairs; negative means collision.
PairDistance self_collision(const RobotModel& model, const std::vector<Capsule>& bodies);

struct ContainmentReport {
  std::vector<bool> contained;
  std::vector<double> protrusion;  // m per capsule
  double max_protrusion = 0.0;
  bool all_contained() const { return max_protrusion <= 0.0; }
};

/// Containment of each capsule axis in the union of the spaces. The radius
/// is not added, so a body touching a boundary plane from inside is accepted.
ContainmentReport containment_check(const std::vector<Capsule>& capsules,
                                    const std::vector<Cuboid>& spaces,
                                    const GeometryOptions& options = {});

}  // namespace prsynth
