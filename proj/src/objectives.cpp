#include "prsynth/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace prsynth {

void ContactSamplingPlan::validate() const {
  if (points_per_segment < 1) throw std::invalid_argument("points_per_segment must be >= 1");
  if (!(radial_step > 0.0) || radial_step > kPi)
    throw std::invalid_argument("radial_step must lie in (0, pi]");
  const double steps = 2.0 * kPi / radial_step;
  if (std::abs(steps - std::round(steps)) > 1e-6)
    throw std::invalid_argument("radial_step must divide a full turn");
  if (platform_direction_count < 1)
    throw std::invalid_argument("platform_direction_count must be >= 1");
  if (!(force_magnitude > 0.0)) throw std::invalid_argument("force_magnitude must be positive");
}

std::vector<Vec3> hemisphere_directions(int count) {
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double z = 1.0 - (k + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * k;
    dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return dirs;
}

std::vector<Vec3> radial_directions(const Vec3& axis, double step) {
  const Vec3 u = axis.normalized();
  Vec3 e1 = u.cross(Vec3::UnitZ());
  if (e1.norm() < 1e-9) e1 = u.cross(Vec3::UnitX());
  e1.normalize();
  const Vec3 e2 = u.cross(e1);
  const int n = static_cast<int>(std::lround(2.0 * kPi / step));
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double a = step * k;
    dirs.push_back(std::cos(a) * e1 + std::sin(a) * e2);
  }
  return dirs;
}

std::vector<Vec3> planar_directions(int count) {
  std::vector<Vec3> dirs;
  for (int k = 0; k < count; ++k) {
    const double a = kPi * k / count;
    dirs.emplace_back(std::cos(a), std::sin(a), 0.0);
  }
  return dirs;
}

std::vector<ContactSample> contact_samples(const RobotModel& model, const KinematicState& state,
                                           const JacobianSet& jac, const ContactSamplingPlan& plan,
                                           const Cuboid* interaction) {
  std::vector<ContactSample> out;
  const int planar_leg_dirs = static_cast<int>(std::lround(kPi / plan.radial_step));
  for (int i = 0; i < model.leg_count(); ++i) {
    const std::vector<Vec3> centers = joint_centers(model, i, jac.frames[static_cast<std::size_t>(i)]);
    for (int s = 0; s < model.segments_per_leg(); ++s) {
      const Vec3& a = centers[static_cast<std::size_t>(s)];
      const Vec3& b = centers[static_cast<std::size_t>(s) + 1];
      for (int k = 0; k < plan.points_per_segment; ++k) {
        const double fraction = (k + 0.5) / plan.points_per_segment;
        const Vec3 p = a + fraction * (b - a);
        if (interaction && !interaction->contains(p)) continue;
        ContactSample cs;
        cs.point = ContactPoint::on_segment(i, s, fraction);
        cs.directions = model.planar() ? planar_directions(planar_leg_dirs)
                                       : radial_directions(b - a, plan.radial_step);
        out.push_back(std::move(cs));
      }
    }
  }
  ContactSample platform;
  platform.point = ContactPoint::on_platform(Vec3::Zero());
  if (model.planar()) {
    platform.directions = planar_directions(plan.platform_direction_count);
  } else {
    const Mat3 R = platform_transform(model, state.x).linear();
    for (const Vec3& d : hemisphere_directions(plan.platform_direction_count))
      platform.directions.push_back(R * d);
  }
  out.push_back(std::move(platform));
  return out;
}

double f1_detectability(const RobotModel& model, const std::vector<KinematicState>& states,
                        const ContactSamplingPlan& plan, const Cuboid* interaction) {
  double f1 = std::numeric_limits<double>::infinity();
  for (const KinematicState& s : states) {
    const JacobianSet jac = jacobians(model, s);
    for (const ContactSample& sample : contact_samples(model, s, jac, plan, interaction)) {
      const ContactJacobian cj = contact_jacobian(model, s, jac, sample.point);
      for (const Vec3& d : sample.directions) {
        Wrench w;
        w.force = plan.force_magnitude * d;
        const VecX tau = project_wrench(cj, w);
        f1 = std::min(f1, tau.cwiseAbs().maxCoeff());
      }
    }
  }
  return f1;
}

namespace {

double projected_angle(const Vec3& axis, const Vec3& a, const Vec3& b) {
  const Vec3 pa = a - a.dot(axis) * axis;
  const Vec3 pb = b - b.dot(axis) * axis;
  if (pa.norm() < 1e-12 || pb.norm() < 1e-12) return kPi;
  return std::atan2(pa.cross(pb).norm(), pa.dot(pb));
}

}  // namespace

std::vector<double> passive_joint_angles(const RobotModel& model, const KinematicState& state,
                                         const Cuboid* interaction) {
  std::vector<double> angles;
  const Vec3 platform_origin = platform_transform(model, state.x).translation();
  for (int i = 0; i < model.leg_count(); ++i) {
    const LegFrames f = leg_frames(model, i, state.q);
    const std::vector<Vec3> centers = joint_centers(model, i, f);
    const LegChain& chain = model.legs[static_cast<std::size_t>(i)];
    for (int j = 0; j < model.coords_per_leg; ++j) {
      const int g = chain.group[static_cast<std::size_t>(j)];
      if (g == 0) continue;  // actuated joint
      if (model.groups[static_cast<std::size_t>(g)] == JointType::Spherical) continue;
      const Vec3& c = centers[static_cast<std::size_t>(g)];
      if (interaction && !interaction->contains(c)) continue;
      const Vec3 in = centers[static_cast<std::size_t>(g) - 1] - c;
      const Vec3 out = (static_cast<std::size_t>(g) + 1 < centers.size())
                           ? Vec3(centers[static_cast<std::size_t>(g) + 1] - c)
                           : Vec3(platform_origin - c);
      angles.push_back(projected_angle(f.axis[j], in, out));
    }
  }
  return angles;
}

double f2_min_passive_angle(const RobotModel& model, const std::vector<KinematicState>& states,
                            const Cuboid* interaction) {
  double f2 = kPi;
  for (const KinematicState& s : states)
    for (double a : passive_joint_angles(model, s, interaction)) f2 = std::min(f2, a);
  return f2;
}

double f3_min_clamp_distance(const RobotModel& model, const std::vector<KinematicState>& states,
                             const Cuboid* interaction, const GeometryOptions& geometry) {
  double f3 = interaction ? interaction->size().norm() : std::numeric_limits<double>::infinity();
  for (const KinematicState& s : states) {
    const CollisionSet set = build_collision_set(model, s, interaction, geometry);
    f3 = std::min(f3, min_clamping_distance(set.clamping).distance);
  }
  return f3;
}

double f4_effective_mass(const RobotModel& model, const InertiaModel& inertia,
                         const std::vector<KinematicState>& states) {
  double f4 = 0.0;
  for (const KinematicState& s : states)
    f4 = std::max(f4, effective_mass(mass_matrix_platform(model, s, inertia)));
  return f4;
}

DriveObjectives f5_f6_drive_load(const DriveLoads& loads) {
  return {loads.max_abs_torque, loads.max_abs_speed};
}

double position_error(const MatX& J_xqa, int translational_dofs, double encoder_resolution) {
  const int n = static_cast<int>(J_xqa.cols());
  const MatX Jt = J_xqa.topRows(translational_dofs);
  double worst = 0.0;
  VecX dq(n);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    for (int i = 0; i < n; ++i) dq[i] = (mask >> i & 1u) ? encoder_resolution : -encoder_resolution;
    worst = std::max(worst, (Jt * dq).norm());
  }
  return worst;
}

double position_error(const RobotModel& model, const std::vector<KinematicState>& states,
                      double encoder_resolution) {
  double worst = 0.0;
  for (const KinematicState& s : states)
    worst = std::max(worst, position_error(jacobians(model, s).J_xqa, model.translational_dofs(),
                                           encoder_resolution));
  return worst;
}

}  // namespace prsynth
