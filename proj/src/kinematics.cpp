#include "prsynth/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace prsynth {

std::vector<AssemblyMode> mode_flags(ModePattern pattern, int legs) {
  std::vector<AssemblyMode> modes(static_cast<std::size_t>(legs));
  for (int i = 0; i < legs; ++i) {
    switch (pattern) {
      case ModePattern::UniformOut: modes[i] = AssemblyMode::ElbowOut; break;
      case ModePattern::UniformIn: modes[i] = AssemblyMode::ElbowIn; break;
      case ModePattern::Alternating:
        modes[i] = (i % 2 == 0) ? AssemblyMode::ElbowOut : AssemblyMode::ElbowIn;
        break;
    }
  }
  return modes;
}

std::string_view to_string(ModePattern pattern) {
  switch (pattern) {
    case ModePattern::UniformOut: return "uniform-out";
    case ModePattern::UniformIn: return "uniform-in";
    case ModePattern::Alternating: return "alternating";
  }
  return "";
}

ModePattern parse_mode_pattern(std::string_view text) {
  if (text == "uniform-out") return ModePattern::UniformOut;
  if (text == "uniform-in") return ModePattern::UniformIn;
  if (text == "alternating") return ModePattern::Alternating;
  throw std::invalid_argument("unknown assembly-mode pattern '" + std::string(text) + "'");
}

VecX actuated_coordinates(const RobotModel& model, const VecX& q) {
  VecX qa(model.leg_count());
  for (int i = 0; i < model.leg_count(); ++i) qa[i] = q[model.q_index(i, 0)];
  return qa;
}

VecX passive_coordinates(const RobotModel& model, const VecX& q) {
  const int m = model.coords_per_leg;
  VecX qp(model.leg_count() * (m - 1));
  for (int i = 0; i < model.leg_count(); ++i)
    qp.segment(i * (m - 1), m - 1) = q.segment(model.q_index(i, 1), m - 1);
  return qp;
}

LegFrames leg_frames(const RobotModel& model, int leg, const VecX& q) {
  const LegChain& chain = model.legs[static_cast<std::size_t>(leg)];
  const int m = model.coords_per_leg;
  LegFrames f;
  f.origin.resize(m);
  f.axis.resize(m);
  f.rotation.resize(m);
  Iso3 t = chain.base;
  for (int j = 0; j < m; ++j) {
    if (j > 0) t = t * chain.offsets[static_cast<std::size_t>(j)];
    f.origin[j] = t.translation();
    f.axis[j] = t.linear().col(2);
    t.linear() = t.linear() * rot_z(q[model.q_index(leg, j)]);
    f.rotation[j] = t.linear();
  }
  f.end_position = t.translation();
  f.end_rotation = t.linear();
  return f;
}

std::vector<Vec3> joint_centers(const RobotModel& model, int leg, const LegFrames& frames) {
  const LegChain& chain = model.legs[static_cast<std::size_t>(leg)];
  std::vector<Vec3> centers;
  int last_group = -1;
  for (int j = 0; j < model.coords_per_leg; ++j) {
    if (chain.group[static_cast<std::size_t>(j)] != last_group) {
      centers.push_back(frames.origin[j]);
      last_group = chain.group[static_cast<std::size_t>(j)];
    }
  }
  return centers;
}

namespace {

/// Constraint rows of one leg and their derivatives, restricted to the
/// model's pose axes.
struct LegLinearization {
  VecX r;  // m
  MatX A;  // m x m, d r / d q_leg
  MatX B;  // m x n, d r / d x
};

struct PlatformFrame {
  Iso3 transform;
  Mat3 rate_map;  // Euler rates -> angular velocity
};

PlatformFrame platform_frame(const RobotModel& model, const VecX& x) {
  const Vec6 pose = full_pose(model, x);
  return {platform_transform(model, x), euler_rate_map(pose.tail<3>())};
}

LegLinearization linearize_leg(const RobotModel& model, int leg, const LegFrames& f,
                               const PlatformFrame& pf, bool with_x = true) {
  const LegChain& chain = model.legs[static_cast<std::size_t>(leg)];
  const int m = model.coords_per_leg;
  const Vec3 lever = pf.transform.linear() * chain.platform_point;
  const Vec3 target = pf.transform.translation() + lever;
  const Mat3 target_rot = pf.transform.linear() * chain.platform_frame;

  Vec6 r6;
  r6.head<3>() = f.end_position - target;
  const Vec3 phi = so3_log(f.end_rotation * target_rot.transpose());
  r6.tail<3>() = phi;
  const Mat3 jl_inv = so3_left_jacobian_inverse(phi);

  Eigen::Matrix<double, 6, Eigen::Dynamic> a6(6, m);
  for (int j = 0; j < m; ++j) {
    a6.block<3, 1>(0, j) = f.axis[j].cross(f.end_position - f.origin[j]);
    a6.block<3, 1>(3, j) = jl_inv * f.axis[j];
  }

  LegLinearization lin;
  const auto& rows = model.pose_axes;
  const int k = static_cast<int>(rows.size());
  lin.r.resize(k);
  lin.A.resize(k, m);
  for (int i = 0; i < k; ++i) {
    lin.r[i] = r6[rows[i]];
    lin.A.row(i) = a6.row(rows[i]);
  }
  if (with_x) {
    Mat6 b6 = Mat6::Zero();
    b6.block<3, 3>(0, 0) = -Mat3::Identity();
    b6.block<3, 3>(0, 3) = skew(lever) * pf.rate_map;
    b6.block<3, 3>(3, 3) = -jl_inv.transpose() * pf.rate_map;
    lin.B.resize(k, k);
    for (int i = 0; i < k; ++i)
      for (int c = 0; c < k; ++c) lin.B(i, c) = b6(rows[i], rows[c]);
  }
  return lin;
}

double smallest_singular_value(const MatX& a) {
  Eigen::JacobiSVD<MatX> svd(a);
  return svd.singularValues().minCoeff();
}

enum class NewtonStatus { Converged, NotConverged, Singular };

/// Damped Newton on the constraints of a single leg; q is updated in place.
NewtonStatus newton_leg(const RobotModel& model, int leg, const PlatformFrame& pf, VecX& q,
                        const IkOptions& opt, double tol) {
  const int m = model.coords_per_leg;
  const int offset = model.q_index(leg, 0);
  double last_sigma = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= opt.max_iters; ++it) {
    const LegFrames f = leg_frames(model, leg, q);
    const LegLinearization lin = linearize_leg(model, leg, f, pf, false);
    const double norm = lin.r.norm();
    if (norm <= tol) {
      // one extra step drives the residual to round-off level
      if (norm > 1e-13 && it < opt.max_iters) {
        Eigen::PartialPivLU<MatX> lu(lin.A);
        if (lu.rcond() > 1e-12) q.segment(offset, m) -= lu.solve(lin.r);
      }
      return NewtonStatus::Converged;
    }
    if (it == opt.max_iters) break;
    Eigen::PartialPivLU<MatX> lu(lin.A);
    VecX dq;
    // the LU condition estimate gates the exact singular-value check
    if (lu.rcond() < 1e-6) {
      last_sigma = smallest_singular_value(lin.A);
      if (last_sigma < opt.singular_value_threshold) {
        const MatX at = lin.A.transpose();
        dq = -(at * lin.A + opt.damping * MatX::Identity(m, m)).ldlt().solve(at * lin.r);
      } else {
        dq = -lu.solve(lin.r);
      }
    } else {
      last_sigma = std::numeric_limits<double>::infinity();
      dq = -lu.solve(lin.r);
    }
    if (!dq.allFinite()) return NewtonStatus::Singular;
    const double step = dq.cwiseAbs().maxCoeff();
    if (step > opt.max_step) dq *= opt.max_step / step;
    q.segment(offset, m) += dq;
  }
  return last_sigma < opt.singular_value_threshold ? NewtonStatus::Singular
                                                   : NewtonStatus::NotConverged;
}

double radical_inverse(int index, int base) {
  double result = 0.0, f = 1.0 / base;
  int i = index;
  while (i > 0) {
    result += f * (i % base);
    i /= base;
    f /= base;
  }
  return result;
}

/// Globalised Levenberg-Marquardt from one start vector.
bool lm_leg(const RobotModel& model, int leg, const PlatformFrame& pf, VecX& q, int max_iters) {
  const int m = model.coords_per_leg;
  const int offset = model.q_index(leg, 0);
  double mu = 1e-2;
  LegLinearization lin = linearize_leg(model, leg, leg_frames(model, leg, q), pf, false);
  double cost = lin.r.squaredNorm();
  for (int it = 0; it < max_iters; ++it) {
    if (cost < 1e-14) return true;
    const MatX at = lin.A.transpose();
    const MatX h = at * lin.A;
    const VecX g = at * lin.r;
    VecX trial = q;
    const VecX dq = -(h + mu * MatX::Identity(m, m)).ldlt().solve(g);
    if (!dq.allFinite()) return false;
    trial.segment(offset, m) += dq;
    LegLinearization next = linearize_leg(model, leg, leg_frames(model, leg, trial), pf, false);
    const double next_cost = next.r.squaredNorm();
    if (next_cost < cost) {
      q = std::move(trial);
      lin = std::move(next);
      cost = next_cost;
      mu = std::max(mu / 3.0, 1e-12);
    } else {
      mu *= 4.0;
      if (mu > 1e8) return false;
    }
  }
  return cost < 1e-14;
}

void check_dims(const RobotModel& model, const VecX& x, const VecX* q,
                const std::vector<AssemblyMode>* modes) {
  if (x.size() != model.dof)
    throw KinematicsError(KinematicsErrorKind::DimensionMismatch, -1,
                          "pose has " + std::to_string(x.size()) + " entries, model needs " +
                              std::to_string(model.dof));
  if (q && q->size() != model.nq())
    throw KinematicsError(KinematicsErrorKind::DimensionMismatch, -1,
                          "joint vector has " + std::to_string(q->size()) +
                              " entries, model needs " + std::to_string(model.nq()));
  if (modes && static_cast<int>(modes->size()) != model.leg_count())
    throw KinematicsError(KinematicsErrorKind::DimensionMismatch, -1,
                          "assembly-mode flags do not match the leg count");
}

AssemblyMode mode_of(double indicator) {
  return indicator >= 0.0 ? AssemblyMode::ElbowOut : AssemblyMode::ElbowIn;
}

double leg_tolerance(const RobotModel& model, const IkOptions& opt) {
  return opt.tolerance / std::sqrt(static_cast<double>(model.leg_count()));
}

}  // namespace

double elbow_indicator(const RobotModel& model, int leg, const LegFrames& frames) {
  const std::vector<Vec3> centers = joint_centers(model, leg, frames);
  const Vec3& a = frames.origin[0];
  const Vec3 normal = (frames.end_position - a).cross(frames.axis[0]);
  return normal.dot(centers[1] - a);
}

std::vector<AssemblyMode> classify_modes(const RobotModel& model, const KinematicState& state) {
  std::vector<AssemblyMode> modes;
  for (int i = 0; i < model.leg_count(); ++i)
    modes.push_back(mode_of(elbow_indicator(model, i, leg_frames(model, i, state.q))));
  return modes;
}

ConstraintResidual constraint_residual(const RobotModel& model, const KinematicState& state) {
  check_dims(model, state.x, &state.q, nullptr);
  const PlatformFrame pf = platform_frame(model, state.x);
  const int m = model.coords_per_leg;
  const int rows = static_cast<int>(model.pose_axes.size());
  ConstraintResidual res;
  res.full.resize(model.leg_count() * rows);
  res.reduced.resize(model.leg_count());
  for (int i = 0; i < model.leg_count(); ++i) {
    const LegLinearization lin = linearize_leg(model, i, leg_frames(model, i, state.q), pf, false);
    res.full.segment(i * rows, rows) = lin.r;

    // eliminate the passive joints by least squares with q_a held fixed
    VecX q = state.q;
    LegLinearization cur = lin;
    for (int it = 0; it < 30; ++it) {
      const MatX p = cur.A.rightCols(m - 1);
      const VecX grad = p.transpose() * cur.r;
      if (grad.norm() < 1e-15) break;
      const VecX dqp = -p.colPivHouseholderQr().solve(cur.r);
      q.segment(model.q_index(i, 1), m - 1) += dqp;
      cur = linearize_leg(model, i, leg_frames(model, i, q), pf, false);
      if (dqp.norm() < 1e-15) break;
    }
    const MatX p = cur.A.rightCols(m - 1);
    Eigen::HouseholderQR<MatX> qr(p);
    const MatX qfull = qr.householderQ();
    VecX w = qfull.col(m - 1);
    if (w.dot(cur.A.col(0)) < 0) w = -w;
    res.reduced[i] = w.dot(cur.r);
  }
  return res;
}

KinematicState solve_ik(const RobotModel& model, const VecX& x, const KinematicState& seed,
                        const IkOptions& options) {
  check_dims(model, x, &seed.q, &seed.modes);
  const PlatformFrame pf = platform_frame(model, x);
  const double tol = leg_tolerance(model, options);
  KinematicState out{x, seed.q, seed.modes};
  for (int i = 0; i < model.leg_count(); ++i) {
    const NewtonStatus status = newton_leg(model, i, pf, out.q, options, tol);
    if (status == NewtonStatus::Singular)
      throw KinematicsError(KinematicsErrorKind::LegSingularity, i,
                            "constraint Jacobian of leg " + std::to_string(i) + " is singular");
    if (status == NewtonStatus::NotConverged)
      throw KinematicsError(KinematicsErrorKind::NoConvergence, i,
                            "inverse kinematics of leg " + std::to_string(i) +
                                " did not converge");
    const AssemblyMode mode = mode_of(elbow_indicator(model, i, leg_frames(model, i, out.q)));
    if (mode != seed.modes[static_cast<std::size_t>(i)])
      throw KinematicsError(KinematicsErrorKind::ModeFlip, i,
                            "assembly mode of leg " + std::to_string(i) + " flipped");
  }
  return out;
}

KinematicState solve_ik(const RobotModel& model, const VecX& x,
                        const std::vector<AssemblyMode>& modes, const IkOptions& options) {
  check_dims(model, x, nullptr, &modes);
  const PlatformFrame pf = platform_frame(model, x);
  const double tol = leg_tolerance(model, options);
  const int m = model.coords_per_leg;
  static constexpr int kBases[] = {2, 3, 5, 7, 11, 13};
  KinematicState out{x, VecX::Zero(model.nq()), modes};
  for (int i = 0; i < model.leg_count(); ++i) {
    bool found = false;
    for (int attempt = 0; attempt < options.seed_attempts && !found; ++attempt) {
      VecX q = out.q;
      const int offset = model.q_index(i, 0);
      q[offset] = -kPi + 2.0 * kPi * ((attempt % 12) + 0.5) / 12.0;
      for (int j = 1; j < m; ++j)
        q[offset + j] =
            attempt < 12 ? 0.0 : -kPi + 2.0 * kPi * radical_inverse(attempt, kBases[j - 1]);
      if (!lm_leg(model, i, pf, q, options.seed_iters)) continue;
      if (newton_leg(model, i, pf, q, options, tol) != NewtonStatus::Converged) continue;
      const LegFrames f = leg_frames(model, i, q);
      if (mode_of(elbow_indicator(model, i, f)) != modes[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < m; ++j) q[offset + j] = wrap_angle(q[offset + j]);
      out.q.segment(offset, m) = q.segment(offset, m);
      found = true;
    }
    if (!found)
      throw KinematicsError(KinematicsErrorKind::NoConvergence, i,
                            "no inverse-kinematics solution for leg " + std::to_string(i) +
                                " in the requested assembly mode");
  }
  return out;
}

double condition_number(const MatX& m) {
  Eigen::JacobiSVD<MatX> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s.minCoeff();
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s.maxCoeff() / smin;
}

MatX normalized_actuation_jacobian(const RobotModel& model, const MatX& J_xqa) {
  MatX n = J_xqa;
  const int t = model.translational_dofs();
  for (int r = t; r < model.dof; ++r) n.row(r) *= model.platform_radius;
  return n;
}

JacobianSet jacobians(const RobotModel& model, const KinematicState& state) {
  check_dims(model, state.x, &state.q, nullptr);
  const PlatformFrame pf = platform_frame(model, state.x);
  const int m = model.coords_per_leg;
  const int n = model.dof;
  const int legs = model.leg_count();
  JacobianSet js;
  js.J_qx.resize(model.nq(), n);
  js.reduced_dx.resize(legs, n);
  js.reduced_dqa.resize(legs);
  js.frames.reserve(static_cast<std::size_t>(legs));
  for (int i = 0; i < legs; ++i) {
    js.frames.push_back(leg_frames(model, i, state.q));
    const LegLinearization lin = linearize_leg(model, i, js.frames.back(), pf);
    Eigen::PartialPivLU<MatX> lu(lin.A);
    if (!(lu.rcond() > 1e-12))
      throw KinematicsError(KinematicsErrorKind::LegSingularity, i,
                            "leg " + std::to_string(i) + " is in a serial singularity");
    js.J_qx.block(i * m, 0, m, n) = -lu.solve(lin.B);

    // reduced constraint: project onto the left null space of the passive columns
    Eigen::HouseholderQR<MatX> qr(lin.A.rightCols(m - 1));
    const MatX qfull = qr.householderQ();
    VecX w = qfull.col(m - 1);
    double dqa = w.dot(lin.A.col(0));
    if (dqa < 0) {
      w = -w;
      dqa = -dqa;
    }
    js.reduced_dx.row(i) = w.transpose() * lin.B;
    js.reduced_dqa[i] = dqa;
  }
  Eigen::PartialPivLU<MatX> lu_red(js.reduced_dx);
  if (!(lu_red.rcond() > 1e-12))
    throw KinematicsError(KinematicsErrorKind::ParallelSingularity, -1,
                          "platform is in a parallel singularity");
  js.J_xqa = -lu_red.solve(MatX(js.reduced_dqa.asDiagonal()));
  js.condition = condition_number(normalized_actuation_jacobian(model, js.J_xqa));
  return js;
}

Mat6X platform_point_jacobian(const RobotModel& model, const VecX& x, const Vec3& offset) {
  const PlatformFrame pf = platform_frame(model, x);
  const Vec3 lever = pf.transform.linear() * offset;
  Mat6 full = Mat6::Zero();
  full.block<3, 3>(0, 0) = Mat3::Identity();
  full.block<3, 3>(0, 3) = -skew(lever) * pf.rate_map;
  full.block<3, 3>(3, 3) = pf.rate_map;
  Mat6X j(6, model.dof);
  for (int c = 0; c < model.dof; ++c) j.col(c) = full.col(model.pose_axes[c]);
  return j;
}

Mat6X segment_point_jacobian(const RobotModel& model, const LegFrames& frames, int segment,
                             const Vec3& point) {
  const int m = model.coords_per_leg;
  const LegChain& chain = model.legs[0];
  Mat6X j = Mat6X::Zero(6, m);
  for (int c = 0; c < m; ++c) {
    if (chain.group[static_cast<std::size_t>(c)] > segment) break;
    j.block<3, 1>(0, c) = frames.axis[c].cross(point - frames.origin[c]);
    j.block<3, 1>(3, c) = frames.axis[c];
  }
  return j;
}

ContactJacobian contact_jacobian(const RobotModel& model, const KinematicState& state,
                                 const JacobianSet& jac, const ContactPoint& point) {
  ContactJacobian cj;
  cj.point = point;
  if (point.body == ContactPoint::Body::Platform) {
    const Iso3 t = platform_transform(model, state.x);
    cj.position = t * point.platform_offset;
    cj.J_xC_x = platform_point_jacobian(model, state.x, point.platform_offset);
  } else {
    if (point.leg < 0 || point.leg >= model.leg_count())
      throw std::out_of_range("contact point leg index out of range");
    if (point.segment < 0 || point.segment >= model.segments_per_leg())
      throw std::out_of_range("contact point segment index out of range");
    if (!(point.fraction >= 0.0 && point.fraction <= 1.0))
      throw std::out_of_range("contact point fraction outside [0, 1]");
    const LegFrames& f = jac.frames[static_cast<std::size_t>(point.leg)];
    const std::vector<Vec3> centers = joint_centers(model, point.leg, f);
    const Vec3& a = centers[static_cast<std::size_t>(point.segment)];
    const Vec3& b = centers[static_cast<std::size_t>(point.segment) + 1];
    cj.position = a + point.fraction * (b - a);
    const int m = model.coords_per_leg;
    cj.J_xC_x = segment_point_jacobian(model, f, point.segment, cj.position) *
                jac.J_qx.block(point.leg * m, 0, m, model.dof);
  }
  cj.J_xC_qa = cj.J_xC_x * jac.J_xqa;
  return cj;
}

VecX project_wrench(const ContactJacobian& cj, const Wrench& w) {
  double f[6] = {w.force.x(), w.force.y(), w.force.z(), w.moment.x(), w.moment.y(), w.moment.z()};
  const Eigen::Index n = cj.J_xC_qa.cols();
  VecX tau(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int r = 0; r < 6; ++r) acc += cj.J_xC_qa(r, i) * f[r];
    tau[i] = acc;
  }
  return tau;
}

}  // namespace prsynth
