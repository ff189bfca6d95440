#pragma once

#include "prsynth/model.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prsynth {

enum class KinematicsErrorKind {
  DimensionMismatch,
  NoConvergence,
  LegSingularity,       // constraint Jacobian of a leg w.r.t. its joints is singular
  ParallelSingularity,  // reduced constraint Jacobian w.r.t. the platform is singular
  ModeFlip,
};

class KinematicsError : public std::runtime_error {
 public:
  KinematicsError(KinematicsErrorKind kind, int leg, const std::string& what)
      : std::runtime_error(what), kind_(kind), leg_(leg) {}
  KinematicsErrorKind kind() const { return kind_; }
  /// Offending leg, or -1 when not leg specific.
  int leg() const { return leg_; }

 private:
  KinematicsErrorKind kind_;
  int leg_;
};

enum class AssemblyMode : int { ElbowOut = 1, ElbowIn = -1 };
enum class ModePattern { UniformOut, UniformIn, Alternating };

std::vector<AssemblyMode> mode_flags(ModePattern pattern, int legs);
std::string_view to_string(ModePattern pattern);
ModePattern parse_mode_pattern(std::string_view text);

/// Platform pose x and all joint coordinates q, stacked leg by leg with the
/// actuated coordinate first in each leg.
struct KinematicState {
  VecX x;
  VecX q;
  std::vector<AssemblyMode> modes;
};

VecX actuated_coordinates(const RobotModel& model, const VecX& q);
VecX passive_coordinates(const RobotModel& model, const VecX& q);

struct IkOptions {
  double tolerance = 1e-9;  // on the full residual norm
  int max_iters = 50;
  double damping = 1e-6;
  double singular_value_threshold = 1e-8;
  double max_step = 0.5;  // rad per Newton step
  int seed_attempts = 48;
  int seed_iters = 120;
};

/// World-frame joint axes and origins of one leg.
struct LegFrames {
  std::vector<Vec3> origin;
  std::vector<Vec3> axis;
  std::vector<Mat3> rotation;  // body orientation after each coordinate
  Vec3 end_position = Vec3::Zero();
  Mat3 end_rotation = Mat3::Identity();
};

LegFrames leg_frames(const RobotModel& model, int leg, const VecX& q);

/// Joint-group centres of a leg, base first. The last centre is the
/// platform coupling point.
std::vector<Vec3> joint_centers(const RobotModel& model, int leg, const LegFrames& frames);

struct ConstraintResidual {
  VecX full;     // per leg: position and rotation-vector rows
  VecX reduced;  // one scalar per leg, passive joints eliminated
};

ConstraintResidual constraint_residual(const RobotModel& model, const KinematicState& state);

/// Signed distance-like measure of the elbow from the plane through the
/// base-to-platform chord and the actuated axis. Positive means elbow-out.
double elbow_indicator(const RobotModel& model, int leg, const LegFrames& frames);
std::vector<AssemblyMode> classify_modes(const RobotModel& model, const KinematicState& state);

/// Damped Newton from a full seed state. Throws KinematicsError on
/// non-convergence, leg singularity or when an assembly mode flips.
KinematicState solve_ik(const RobotModel& model, const VecX& x, const KinematicState& seed,
                        const IkOptions& options = {});

/// Solves from assembly-mode flags only, using deterministic multi-start
/// seeding per leg before the Newton polish.
KinematicState solve_ik(const RobotModel& model, const VecX& x,
                        const std::vector<AssemblyMode>& modes, const IkOptions& options = {});

struct JacobianSet {
  MatX J_qx;         // nq x n
  MatX J_xqa;        // n x n
  double condition;  // of J_xqa with rotational rows scaled by the platform radius
  MatX reduced_dx;   // n x n, d(delta_red)/dx
  VecX reduced_dqa;  // diagonal of d(delta_red)/dq_a
  std::vector<LegFrames> frames;
};

JacobianSet jacobians(const RobotModel& model, const KinematicState& state);

/// J_xqa with the rotational rows multiplied by the platform radius.
MatX normalized_actuation_jacobian(const RobotModel& model, const MatX& J_xqa);
double condition_number(const MatX& m);

struct ContactPoint {
  enum class Body { Segment, Platform };
  Body body = Body::Platform;
  int leg = -1;
  int segment = -1;
  double fraction = 0.0;                 // arc-length fraction along the segment
  Vec3 platform_offset = Vec3::Zero();   // platform frame

  static ContactPoint on_segment(int leg, int segment, double fraction) {
    return {Body::Segment, leg, segment, fraction, Vec3::Zero()};
  }
  static ContactPoint on_platform(const Vec3& offset) {
    return {Body::Platform, -1, -1, 0.0, offset};
  }
};

using Mat6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Twist (v, omega) of a contact point per unit platform / actuator rate.
struct ContactJacobian {
  ContactPoint point;
  Vec3 position = Vec3::Zero();
  Mat6X J_xC_x;
  Mat6X J_xC_qa;
};

ContactJacobian contact_jacobian(const RobotModel& model, const KinematicState& state,
                                 const JacobianSet& jac, const ContactPoint& point);

/// Twist Jacobian of a platform-fixed point w.r.t. the platform coordinates.
Mat6X platform_point_jacobian(const RobotModel& model, const VecX& x, const Vec3& offset);

/// Twist Jacobian of a point rigidly attached to a leg segment body w.r.t.
/// that leg's joint rates (6 x coords_per_leg).
Mat6X segment_point_jacobian(const RobotModel& model, const LegFrames& frames, int segment,
                             const Vec3& point);

struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
};

/// tau_ext = J_xC_qa^T F_ext, accumulated row by row in a fixed order.
VecX project_wrench(const ContactJacobian& cj, const Wrench& w);

}  // namespace prsynth
