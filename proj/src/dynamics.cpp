#include "prsynth/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace prsynth {

InertiaModel InertiaModel::from_model(const RobotModel& model) {
  InertiaModel in;
  in.link_density = model.link_density();
  in.platform_mass = model.platform_mass();
  const double r = model.platform_radius;
  const double m = in.platform_mass;
  in.platform_inertia = Vec3(m * r * r / 4.0, m * r * r / 4.0, m * r * r / 2.0).asDiagonal();
  return in;
}

Mat6X segment_body_jacobian(const RobotModel& model, const JacobianSet& jac, int leg,
                            int segment) {
  const LegFrames& f = jac.frames[static_cast<std::size_t>(leg)];
  const std::vector<Vec3> centers = joint_centers(model, leg, f);
  const Vec3 mid = 0.5 * (centers[static_cast<std::size_t>(segment)] +
                          centers[static_cast<std::size_t>(segment) + 1]);
  const int m = model.coords_per_leg;
  return segment_point_jacobian(model, f, segment, mid) *
         jac.J_qx.block(leg * m, 0, m, model.dof);
}

namespace {

void add_rod(MatX& M, const Mat6X& J, double mass, const Vec3& axis, double length) {
  const auto Jv = J.topRows<3>();
  const auto Jw = J.bottomRows<3>();
  const Mat3 inertia = mass * length * length / 12.0 * (Mat3::Identity() - axis * axis.transpose());
  M.noalias() += mass * Jv.transpose() * Jv;
  M.noalias() += Jw.transpose() * inertia * Jw;
}

MassMatrixX finish(const RobotModel& model, MatX M) {
  M = 0.5 * (M + M.transpose());
  const int t = model.translational_dofs();
  MatX Mt = M.topLeftCorner(t, t);
  return {std::move(M), std::move(Mt)};
}

}  // namespace

MassMatrixX mass_matrix_platform(const RobotModel& model, const KinematicState& state,
                                 const JacobianSet& jac, const InertiaModel& inertia) {
  const int n = model.dof;
  MatX M = MatX::Zero(n, n);
  if (inertia.link_density > 0.0) {
    for (int i = 0; i < model.leg_count(); ++i) {
      const std::vector<Vec3> centers =
          joint_centers(model, i, jac.frames[static_cast<std::size_t>(i)]);
      for (int s = 0; s < model.segments_per_leg(); ++s) {
        const Vec3 d = centers[static_cast<std::size_t>(s) + 1] - centers[static_cast<std::size_t>(s)];
        const double length = d.norm();
        if (length <= 0.0) continue;
        add_rod(M, segment_body_jacobian(model, jac, i, s), inertia.link_density * length,
                d / length, length);
      }
    }
  }
  const Mat6X Jp = platform_point_jacobian(model, state.x, Vec3::Zero());
  const Mat3 R = platform_transform(model, state.x).linear();
  const Mat3 Iw = R * inertia.platform_inertia * R.transpose();
  M.noalias() += inertia.platform_mass * Jp.topRows<3>().transpose() * Jp.topRows<3>();
  M.noalias() += Jp.bottomRows<3>().transpose() * Iw * Jp.bottomRows<3>();
  return finish(model, std::move(M));
}

MassMatrixX mass_matrix_platform(const RobotModel& model, const KinematicState& state,
                                 const InertiaModel& inertia) {
  return mass_matrix_platform(model, state, jacobians(model, state), inertia);
}

double effective_mass(const MassMatrixX& mm) {
  Eigen::SelfAdjointEigenSolver<MatX> es(mm.M_t, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

VecX gravity_force(const RobotModel& model, const KinematicState& state, const JacobianSet& jac,
                   const InertiaModel& inertia) {
  VecX G = VecX::Zero(model.dof);
  if (inertia.link_density > 0.0) {
    for (int i = 0; i < model.leg_count(); ++i) {
      const std::vector<Vec3> centers =
          joint_centers(model, i, jac.frames[static_cast<std::size_t>(i)]);
      for (int s = 0; s < model.segments_per_leg(); ++s) {
        const double length =
            (centers[static_cast<std::size_t>(s) + 1] - centers[static_cast<std::size_t>(s)]).norm();
        const Mat6X J = segment_body_jacobian(model, jac, i, s);
        G.noalias() -= inertia.link_density * length * J.topRows<3>().transpose() * inertia.gravity;
      }
    }
  }
  const Mat6X Jp = platform_point_jacobian(model, state.x, Vec3::Zero());
  G.noalias() -= inertia.platform_mass * Jp.topRows<3>().transpose() * inertia.gravity;
  return G;
}

namespace {

JacobianSet sample_jacobians(const RobotModel& model, const KinematicState& state,
                             std::size_t k) {
  try {
    return jacobians(model, state);
  } catch (const KinematicsError& e) {
    throw SampleError(k, "trajectory sample " + std::to_string(k) + ": " + e.what());
  }
}

VecX actuated_rates(const RobotModel& model, const JacobianSet& jac, const VecX& xd) {
  VecX qd(model.leg_count());
  for (int i = 0; i < model.leg_count(); ++i)
    qd[i] = jac.J_qx.row(model.q_index(i, 0)).dot(xd);
  return qd;
}

Vec6 full_rates(const RobotModel& model, const VecX& xd) {
  Vec6 r = Vec6::Zero();
  for (int c = 0; c < model.dof; ++c) r[model.pose_axes[static_cast<std::size_t>(c)]] = xd[c];
  return r;
}

}  // namespace

DriveLoads inverse_dynamics_traj(const RobotModel& model, const InertiaModel& inertia,
                                 const Trajectory& traj, const std::vector<KinematicState>& states,
                                 const DynamicsOptions& options) {
  if (states.size() != traj.size())
    throw std::invalid_argument("one kinematic state per trajectory sample is required");
  const int n = model.dof;
  const int legs = model.leg_count();
  const double eps = options.fd_step;
  DriveLoads out;
  out.max_torque = VecX::Zero(legs);
  out.max_speed = VecX::Zero(legs);
  out.max_power = VecX::Zero(legs);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const KinematicState& s = states[k];
    const JacobianSet jac = sample_jacobians(model, s, k);
    const MatX M = mass_matrix_platform(model, s, jac, inertia).M_x;
    const VecX G = gravity_force(model, s, jac, inertia);
    const VecX& xd = traj.xd[k];
    const VecX& xdd = traj.xdd[k];

    VecX F_qs = M * xdd + G;
    VecX velocity_terms = VecX::Zero(n);
    if (xd.cwiseAbs().maxCoeff() > 0.0) {
      VecX mdot_xd = VecX::Zero(n);
      VecX grad = VecX::Zero(n);
      for (int c = 0; c < n; ++c) {
        VecX xp = s.x, xm = s.x;
        xp[c] += eps;
        xm[c] -= eps;
        MatX Mp, Mm;
        try {
          Mp = mass_matrix_platform(model, solve_ik(model, xp, s), inertia).M_x;
          Mm = mass_matrix_platform(model, solve_ik(model, xm, s), inertia).M_x;
        } catch (const KinematicsError& e) {
          throw SampleError(k, "trajectory sample " + std::to_string(k) + ": " + e.what());
        }
        const MatX dM = (Mp - Mm) / (2.0 * eps);
        const VecX dM_xd = dM * xd;
        mdot_xd += xd[c] * dM_xd;
        grad[c] = xd.dot(dM_xd);
      }
      velocity_terms = mdot_xd - 0.5 * grad;
    }
    const VecX F = F_qs + velocity_terms;
    const VecX tau = jac.J_xqa.transpose() * F;
    const VecX tau_qs = jac.J_xqa.transpose() * F_qs;
    const VecX qd = actuated_rates(model, jac, xd);
    out.max_torque = out.max_torque.cwiseMax(tau.cwiseAbs());
    out.max_speed = out.max_speed.cwiseMax(qd.cwiseAbs());
    out.max_power = out.max_power.cwiseMax(tau.cwiseProduct(qd).cwiseAbs());
    out.max_velocity_term = std::max(out.max_velocity_term, (tau - tau_qs).cwiseAbs().maxCoeff());
    out.torque.push_back(tau);
    out.torque_quasi_static.push_back(tau_qs);
    out.speed.push_back(qd);
  }
  if (!traj.x.empty()) {
    out.max_abs_torque = out.max_torque.maxCoeff();
    out.max_abs_speed = out.max_speed.maxCoeff();
  }
  return out;
}

double TubeSection::area() const {
  const double inner = std::max(0.0, diameter - 2.0 * wall);
  return kPi / 4.0 * (diameter * diameter - inner * inner);
}

double TubeSection::section_modulus() const {
  const double inner = std::max(0.0, diameter - 2.0 * wall);
  return kPi * (std::pow(diameter, 4) - std::pow(inner, 4)) / (32.0 * diameter);
}

double InternalLoads::stress_utilization(const TubeSection& section, const Material& material,
                                         double gravity) const {
  const double Z = section.section_modulus();
  const double A = section.area();
  const double rho_l = section.linear_density(material);
  double worst = 0.0;
  for (const SegmentLoadRecord& r : records) {
    const double bending = r.transmitted_bending + gravity * rho_l * r.weight_lever;
    const double sigma = bending / Z + std::abs(r.axial) / A;
    worst = std::max(worst, sigma);
  }
  return worst / material.yield_strength;
}

std::vector<InternalLoads::SegmentMax> InternalLoads::segment_maxima(const TubeSection& section,
                                                                     const Material& material,
                                                                     double gravity) const {
  std::vector<SegmentMax> out;
  const double rho_l = section.linear_density(material);
  for (const SegmentLoadRecord& r : records) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SegmentMax& m) {
      return m.leg == r.leg && m.segment == r.segment;
    });
    if (it == out.end()) {
      out.push_back({r.leg, r.segment, 0.0, 0.0});
      it = std::prev(out.end());
    }
    it->bending = std::max(it->bending, r.transmitted_bending + gravity * rho_l * r.weight_lever);
    it->axial = std::max(it->axial, std::abs(r.axial));
  }
  return out;
}

InternalLoads internal_load_estimate(const RobotModel& model, const InertiaModel& inertia,
                                     const Trajectory& traj,
                                     const std::vector<KinematicState>& states) {
  if (states.size() != traj.size())
    throw std::invalid_argument("one kinematic state per trajectory sample is required");
  InternalLoads loads;
  const int n = model.dof;
  const Vec3 g_hat = inertia.gravity.norm() > 0.0 ? Vec3(inertia.gravity.normalized()) : Vec3::Zero();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const KinematicState& s = states[k];
    const JacobianSet jac = sample_jacobians(model, s, k);
    const Vec6 pose = full_pose(model, s.x);
    const Vec6 rate = full_rates(model, traj.xd[k]);
    const Vec6 acc = full_rates(model, traj.xdd[k]);
    const Mat3 T = euler_rate_map(pose.tail<3>());
    const Vec3 omega = T * rate.tail<3>();
    const Vec3 alpha = T * acc.tail<3>() + euler_rate_map_dot(pose.tail<3>(), rate.tail<3>());
    const Mat3 R = platform_transform(model, s.x).linear();
    const Mat3 Iw = R * inertia.platform_inertia * R.transpose();

    Vec6 w_req;
    w_req.head<3>() = inertia.platform_mass * (acc.head<3>() - inertia.gravity);
    w_req.tail<3>() = Iw * alpha + omega.cross(Iw * omega);

    // restrict the platform wrench and its Jacobian to the model's pose axes
    const Mat6X Jp = platform_point_jacobian(model, s.x, Vec3::Zero());
    MatX Jsub(n, n);
    VecX wsub(n);
    for (int r = 0; r < n; ++r) {
      Jsub.row(r) = Jp.row(model.pose_axes[static_cast<std::size_t>(r)]);
      wsub[r] = w_req[model.pose_axes[static_cast<std::size_t>(r)]];
    }
    const VecX Q_req = Jsub.transpose() * wsub;
    const Eigen::PartialPivLU<MatX> lu_red(jac.reduced_dx.transpose());
    const VecX lambda = lu_red.solve(Q_req);
    const Eigen::PartialPivLU<MatX> lu_p(Jsub.transpose());

    for (int i = 0; i < model.leg_count(); ++i) {
      const VecX F_i = lambda[i] * jac.reduced_dx.row(i).transpose();
      const VecX w_i = lu_p.solve(F_i);
      Vec6 w = Vec6::Zero();
      for (int r = 0; r < n; ++r) w[model.pose_axes[static_cast<std::size_t>(r)]] = w_i[r];
      const Vec3 force = w.head<3>();
      const Vec3 moment = w.tail<3>();
      const std::vector<Vec3> centers =
          joint_centers(model, i, jac.frames[static_cast<std::size_t>(i)]);
      for (int seg = 0; seg < model.segments_per_leg(); ++seg) {
        const Vec3& root = centers[static_cast<std::size_t>(seg)];
        const Vec3 d = centers[static_cast<std::size_t>(seg) + 1] - root;
        const double length = d.norm();
        if (length <= 0.0) continue;
        const Vec3 u = d / length;
        const Vec3 m_root = moment + (Vec3(pose.head<3>()) - root).cross(force);
        const Vec3 m_perp = m_root - m_root.dot(u) * u;
        SegmentLoadRecord rec;
        rec.leg = i;
        rec.segment = seg;
        rec.transmitted_bending = m_perp.norm();
        rec.axial = force.dot(u);
        rec.weight_lever = 0.5 * length * length * u.cross(g_hat).norm();
        loads.records.push_back(rec);
      }
    }
  }
  return loads;
}

}  // namespace prsynth
