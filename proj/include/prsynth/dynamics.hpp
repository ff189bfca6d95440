#pragma once

#include "prsynth/kinematics.hpp"
#include "prsynth/trajectory.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace prsynth {

struct InertiaModel {
  double link_density = 0.0;  // kg/m, every leg segment is a thin rod
  double platform_mass = 0.0;
  Mat3 platform_inertia = Mat3::Zero();  // platform frame, about its origin
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);

  /// Tube and platform values of the model; the platform is a uniform disk
  /// of the platform radius.
  static InertiaModel from_model(const RobotModel& model);
};

struct MassMatrixX {
  MatX M_x;  // n x n
  MatX M_t;  // translational block, 3 x 3 (2 x 2 planar)
};

/// Body Jacobian (twist at the segment midpoint per unit platform rate) of
/// one leg segment.
Mat6X segment_body_jacobian(const RobotModel& model, const JacobianSet& jac, int leg, int segment);

MassMatrixX mass_matrix_platform(const RobotModel& model, const KinematicState& state,
                                 const JacobianSet& jac, const InertiaModel& inertia);
MassMatrixX mass_matrix_platform(const RobotModel& model, const KinematicState& state,
                                 const InertiaModel& inertia);

/// Largest eigenvalue of the translational block.
double effective_mass(const MassMatrixX& mm);

/// dV/dx of the gravitational potential, in platform coordinates.
VecX gravity_force(const RobotModel& model, const KinematicState& state, const JacobianSet& jac,
                   const InertiaModel& inertia);

class SampleError : public std::runtime_error {
 public:
  SampleError(std::size_t sample, const std::string& what)
      : std::runtime_error(what), sample_(sample) {}
  std::size_t sample() const { return sample_; }

 private:
  std::size_t sample_;
};

struct DynamicsOptions {
  double fd_step = 1e-5;  // pose step for the mass-matrix derivatives
};

struct DriveLoads {
  std::vector<VecX> torque;               // N m per sample, full dynamics
  std::vector<VecX> torque_quasi_static;  // gravity and M * xdd only
  std::vector<VecX> speed;                // rad/s per sample
  VecX max_torque;  // per actuator
  VecX max_speed;
  VecX max_power;   // max |tau_i * qd_i| per actuator, W
  double max_abs_torque = 0.0;
  double max_abs_speed = 0.0;
  double max_velocity_term = 0.0;  // largest |tau - tau_quasi_static|
};

/// states[k] must be the closed state at traj.x[k].
DriveLoads inverse_dynamics_traj(const RobotModel& model, const InertiaModel& inertia,
                                 const Trajectory& traj, const std::vector<KinematicState>& states,
                                 const DynamicsOptions& options = {});

struct Material {
  double yield_strength = 240e6;  // Pa
  double youngs_modulus = 70e9;   // Pa
  double density = 2700.0;        // kg/m^3
};

struct TubeSection {
  double diameter = 0.02;
  double wall = 0.0015;

  double area() const;
  double section_modulus() const;  // bending, m^3
  double linear_density(const Material& m) const { return m.density * area(); }
};

/// Load at the root of one segment for one trajectory sample. The own
/// weight is kept apart so the section can be changed afterwards.
struct SegmentLoadRecord {
  int leg = 0;
  int segment = 0;
  double transmitted_bending = 0.0;  // N m
  double axial = 0.0;                // N, signed
  double weight_lever = 0.0;         // m^2 factor: own-weight moment = g * rho_l * lever
};

struct InternalLoads {
  std::vector<SegmentLoadRecord> records;

  /// Largest sigma / yield over all records for the given section.
  double stress_utilization(const TubeSection& section, const Material& material,
                            double gravity) const;

  struct SegmentMax {
    int leg, segment;
    double bending, axial;
  };
  /// Per-segment maxima of the root bending moment (transmitted plus own
  /// weight of the section) and of the absolute axial force.
  std::vector<SegmentMax> segment_maxima(const TubeSection& section, const Material& material,
                                         double gravity) const;
};

/// Quasi-static decomposition of the platform's required wrench into the
/// single constraint wrench each leg can transmit, followed by a cantilever
/// estimate at every segment root.
InternalLoads internal_load_estimate(const RobotModel& model, const InertiaModel& inertia,
                                     const Trajectory& traj,
                                     const std::vector<KinematicState>& states);

}  // namespace prsynth
