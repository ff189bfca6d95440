#pragma once

#include "prsynth/dynamics.hpp"
#include "prsynth/geometry.hpp"

#include <array>
#include <vector>

namespace prsynth {

struct ObjectiveVector {
  double f1 = 0.0;  // N m, lowest detectable actuator torque (maximize)
  double f2 = 0.0;  // rad, smallest passive joint angle (maximize)
  double f3 = 0.0;  // m, clamping distance (maximize)
  double f4 = 0.0;  // kg, effective mass
  double f5 = 0.0;  // N m, largest drive torque
  double f6 = 0.0;  // rad/s, largest drive speed

  double position_error = 0.0;      // m
  double condition = 0.0;           // largest over the trajectory
  double stress_utilization = 0.0;  // sigma / yield
  double max_power = 0.0;           // W, largest actuator power
  double max_velocity_term = 0.0;   // N m, Coriolis share of f5

  /// All six objectives oriented for minimization: f1, f2, f3 negated.
  std::array<double, 6> minimization_form() const { return {-f1, -f2, -f3, f4, f5, f6}; }
};

struct ContactSamplingPlan {
  int points_per_segment = 3;
  double radial_step = deg2rad(15.0);
  int platform_direction_count = 200;
  double force_magnitude = 140.0;  // N

  void validate() const;
};

/// Deterministic Fibonacci spiral over the hemisphere about +z.
std::vector<Vec3> hemisphere_directions(int count);

/// Unit directions perpendicular to axis, every step rad starting from
/// normalize(axis x z).
std::vector<Vec3> radial_directions(const Vec3& axis, double step);

/// Unit directions in the xy plane over a half circle.
std::vector<Vec3> planar_directions(int count);

struct ContactSample {
  ContactPoint point;
  std::vector<Vec3> directions;  // unit force directions, world frame
};

/// Contact locations and force directions of one closed state. Leg points
/// outside the interaction space are dropped; the platform point is always
/// kept.
std::vector<ContactSample> contact_samples(const RobotModel& model, const KinematicState& state,
                                           const JacobianSet& jac, const ContactSamplingPlan& plan,
                                           const Cuboid* interaction);

/// min over states, locations and directions of max_i |tau_ext,i|.
double f1_detectability(const RobotModel& model, const std::vector<KinematicState>& states,
                        const ContactSamplingPlan& plan, const Cuboid* interaction);

/// Interior angles in [0, pi] at every passive revolute or universal
/// coordinate whose joint centre lies in the interaction space.
std::vector<double> passive_joint_angles(const RobotModel& model, const KinematicState& state,
                                         const Cuboid* interaction);
double f2_min_passive_angle(const RobotModel& model, const std::vector<KinematicState>& states,
                            const Cuboid* interaction);

/// Capped at the interaction-space diagonal when no candidate pair exists.
double f3_min_clamp_distance(const RobotModel& model, const std::vector<KinematicState>& states,
                             const Cuboid* interaction, const GeometryOptions& geometry = {});

double f4_effective_mass(const RobotModel& model, const InertiaModel& inertia,
                         const std::vector<KinematicState>& states);

struct DriveObjectives {
  double f5 = 0.0;
  double f6 = 0.0;
};
DriveObjectives f5_f6_drive_load(const DriveLoads& loads);

/// Largest Cartesian position error from actuator quantization, over the
/// 2^n sign corners of the encoder step.
double position_error(const MatX& J_xqa, int translational_dofs, double encoder_resolution);
double position_error(const RobotModel& model, const std::vector<KinematicState>& states,
                      double encoder_resolution);

}  // namespace prsynth
