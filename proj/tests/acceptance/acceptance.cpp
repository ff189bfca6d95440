// Acceptance checks. One line per criterion; the exit status is nonzero when
// any criterion fails.
#include "support/failures.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>

using namespace prsynth;
using namespace prsynth::test;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// ---------------------------------------------------------------- 1

Outcome planar_kinematics() {
  const auto t0 = Clock::now();
  Rng rng(101);
  int poses = 0, draws = 0;
  double ik_err = 0.0, jac_err = 0.0;
  while (poses < 200 && draws < 5000) {
    ++draws;
    DesignPoint d = planar_midpoint();
    d.params = perturbed_params(rng, d, 0.1);
    const VecX x = perturbed_pose(rng, 3);
    VecX q_ref;
    if (!planar_rrr_ik(d.params, x, 1, q_ref)) continue;
    const RobotModel model = make_model(d.family, d.params);
    KinematicState s;
    try {
      s = solve_ik(model, x, mode_flags(ModePattern::UniformOut, 3));
    } catch (const KinematicsError&) {
      ik_err = std::numeric_limits<double>::infinity();
      ++poses;
      continue;
    }
    for (int i = 0; i < 9; ++i) ik_err = std::max(ik_err, std::abs(wrap_angle(s.q[i] - q_ref[i])));
    JacobianSet jac;
    try {
      jac = jacobians(model, s);
    } catch (const KinematicsError&) {
      continue;  // singular pose, no Jacobian to compare
    }
    ++poses;
    // joint Jacobian and its actuated rows
    MatX fd(model.nq(), 3);
    for (int k = 0; k < 3; ++k)
      fd.col(k) = richardson(
          [&](double t) {
            VecX xt = x;
            xt[k] += t;
            return solve_ik(model, xt, s).q;
          },
          1e-4);
    jac_err = std::max(jac_err, (jac.J_qx - fd).cwiseAbs().maxCoeff());
    MatX act(3, 3);
    for (int i = 0; i < 3; ++i) act.row(i) = fd.row(model.q_index(i, 0));
    jac_err = std::max(jac_err, (jac.J_xqa * act - MatX::Identity(3, 3)).cwiseAbs().maxCoeff());
    // contact Jacobian of a leg point against its numerical velocity
    const int leg = poses % 3, seg = poses % 2;
    const ContactJacobian cj = contact_jacobian(model, s, jac, ContactPoint::on_segment(leg, seg, 0.4));
    for (int k = 0; k < 3; ++k) {
      auto at = [&](double t) {
        VecX xt = x;
        xt[k] += t;
        return solve_ik(model, xt, s);
      };
      const Vec3 v = richardson([&](double t) { return VecX(segment_point(model, at(t), leg, seg, 0.4)); }, 1e-4);
      const Vec3 w = angular_velocity([&](double t) { return segment_rotation(model, at(t), leg, seg); }, 1e-4);
      jac_err = std::max(jac_err, (cj.J_xC_x.col(k).head<3>() - v).cwiseAbs().maxCoeff());
      jac_err = std::max(jac_err, (cj.J_xC_x.col(k).tail<3>() - w).cwiseAbs().maxCoeff());
    }
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = poses == 200 && ik_err <= 1e-8 && jac_err <= 1e-5 && t < 10.0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%d poses, max IK error %.2e rad, max Jacobian error %.2e, %.2f s",
                poses, ik_err, jac_err, t);
  o.detail = buf;
  return o;
}

// ---------------------------------------------------------------- 2

Outcome virtual_work() {
  const auto t0 = Clock::now();
  Rng rng(202);
  int tuples = 0;
  double worst = 0.0;
  while (tuples < 1000) {
    const bool spatial = tuples % 2 == 0;
    DesignPoint d = spatial ? feasible_rus() : planar_midpoint();
    d.params = perturbed_params(rng, d, spatial ? 0.02 : 0.1);
    const RobotModel model = make_model(d.family, d.params);
    const VecX x = perturbed_pose(rng, model.dof);
    KinematicState s;
    JacobianSet jac;
    try {
      s = solve_ik(model, x, mode_flags(d.modes, model.leg_count()));
      jac = jacobians(model, s);
    } catch (const KinematicsError&) {
      continue;
    }
    const bool on_platform = rng.uniform(0, 1) < 0.25;
    const int leg = static_cast<int>(rng.engine() % static_cast<unsigned>(model.leg_count()));
    const int seg = static_cast<int>(rng.engine() % static_cast<unsigned>(model.segments_per_leg()));
    const double frac = rng.uniform(0, 1);
    const Vec3 offset = rng.vec3(-0.1, 0.1);
    const ContactPoint cp = on_platform ? ContactPoint::on_platform(offset)
                                        : ContactPoint::on_segment(leg, seg, frac);
    const ContactJacobian cj = contact_jacobian(model, s, jac, cp);
    VecX qa_dot(model.dof);
    for (Eigen::Index k = 0; k < qa_dot.size(); ++k) qa_dot[k] = rng.uniform(-1, 1);
    const VecX xdot = jac.J_xqa * qa_dot;
    const double h = 1e-3 / std::max(1.0, xdot.cwiseAbs().maxCoeff());
    Vec3 v, w;
    try {
      auto at = [&](double t) { return solve_ik(model, x + t * xdot, s); };
      if (on_platform) {
        v = richardson([&](double t) { return VecX(platform_transform(model, x + t * xdot) * offset); }, h);
        w = angular_velocity([&](double t) { return Mat3(platform_transform(model, x + t * xdot).linear()); }, h);
      } else {
        v = richardson([&](double t) { return VecX(segment_point(model, at(t), leg, seg, frac)); }, h);
        w = angular_velocity([&](double t) { return segment_rotation(model, at(t), leg, seg); }, h);
      }
    } catch (const KinematicsError&) {
      continue;
    }
    Wrench f;
    f.force = rng.uniform(1, 200) * rng.unit();
    f.moment = rng.uniform(0, 10) * rng.unit();
    const double lhs = f.force.dot(v) + f.moment.dot(w);
    const double rhs = project_wrench(cj, f).dot(qa_dot);
    const double scale = std::hypot(f.force.norm(), f.moment.norm()) * std::hypot(v.norm(), w.norm());
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
    ++tuples;
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = worst <= 1e-9 && t < 30.0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%d tuples, max relative power mismatch %.2e, %.2f s", tuples, worst, t);
  o.detail = buf;
  return o;
}

// ---------------------------------------------------------------- 3

double point_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

Capsule make_capsule(const Vec3& a, const Vec3& b, double r) {
  Capsule c;
  c.a = a;
  c.b = b;
  c.radius = r;
  return c;
}

Outcome capsules() {
  const auto t0 = Clock::now();
  Rng rng(303);
  double oracle_err = 0.0, sym_err = 0.0, rigid_err = 0.0;
  for (int k = 0; k < 500; ++k) {
    const Capsule a = make_capsule(rng.vec3(-0.5, 0.5), rng.vec3(-0.5, 0.5), rng.uniform(0, 0.05));
    const Capsule b = make_capsule(rng.vec3(-0.5, 0.5), rng.vec3(-0.5, 0.5), rng.uniform(0, 0.05));
    const double d = capsule_distance(a, b);
    // dense samples on one axis, exact point distance to the other
    double dense = std::numeric_limits<double>::infinity();
    const int n = 20000;
    for (int i = 0; i <= n; ++i)
      dense = std::min(dense, point_segment(a.a + (a.b - a.a) * i / n, b.a, b.b));
    dense -= a.radius + b.radius;  // signed, like the library
    oracle_err = std::max(oracle_err, std::abs(d - dense));
    sym_err = std::max(sym_err, std::abs(d - capsule_distance(b, a)));
    const Mat3 r = Eigen::AngleAxisd(rng.uniform(0, kPi), rng.unit()).toRotationMatrix();
    const Vec3 t = rng.vec3(-3, 3);
    const double moved = capsule_distance(make_capsule(r * a.a + t, r * a.b + t, a.radius),
                                          make_capsule(r * b.a + t, r * b.b + t, b.radius));
    rigid_err = std::max(rigid_err, std::abs(moved - d));
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = oracle_err <= 1e-3 && sym_err <= 1e-12 && rigid_err <= 1e-12 && t < 60.0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "500 pairs, oracle %.2e m, symmetry %.2e, rigid motion %.2e, %.2f s",
                oracle_err, sym_err, rigid_err, t);
  o.detail = buf;
  return o;
}

// ---------------------------------------------------------------- 4

// Exhaustive loop written out independently of the library's sampler: every
// leg point inside the interaction space with radial directions, plus the
// platform centre with the rotated half-sphere fan.
double f1_exhaustive(const RobotModel& model, const std::vector<KinematicState>& states,
                     double force, const Cuboid& space) {
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  const double step = deg2rad(15.0);
  double best = std::numeric_limits<double>::infinity();
  auto torque_peak = [&](const ContactJacobian& cj, const Vec3& dir) {
    const Vec3 f = force * dir;
    const double w[6] = {f.x(), f.y(), f.z(), 0.0, 0.0, 0.0};
    double peak = 0.0;
    for (Eigen::Index i = 0; i < cj.J_xC_qa.cols(); ++i) {
      double tau = 0.0;
      for (int r = 0; r < 6; ++r) tau += cj.J_xC_qa(r, i) * w[r];
      peak = std::max(peak, std::abs(tau));
    }
    return peak;
  };
  for (const KinematicState& s : states) {
    const JacobianSet jac = jacobians(model, s);
    for (int leg = 0; leg < model.leg_count(); ++leg) {
      const std::vector<Vec3> c = joint_centers(model, leg, jac.frames[static_cast<std::size_t>(leg)]);
      for (int seg = 0; seg < model.segments_per_leg(); ++seg) {
        const Vec3 a = c[static_cast<std::size_t>(seg)], b = c[static_cast<std::size_t>(seg) + 1];
        const Vec3 u = (b - a).normalized();
        Vec3 e1 = u.cross(Vec3::UnitZ());
        if (e1.norm() < 1e-9) e1 = u.cross(Vec3::UnitX());
        e1.normalize();
        const Vec3 e2 = u.cross(e1);
        for (int p = 0; p < 3; ++p) {
          const double frac = (p + 0.5) / 3;
          if (!space.contains(a + frac * (b - a))) continue;
          const ContactJacobian cj = contact_jacobian(model, s, jac, ContactPoint::on_segment(leg, seg, frac));
          for (int k = 0; k < 24; ++k) {
            const double ang = step * k;
            best = std::min(best, torque_peak(cj, std::cos(ang) * e1 + std::sin(ang) * e2));
          }
        }
      }
    }
    const ContactJacobian cj = contact_jacobian(model, s, jac, ContactPoint::on_platform(Vec3::Zero()));
    const Mat3 R = platform_transform(model, s.x).linear();
    for (int k = 0; k < 200; ++k) {
      const double z = 1.0 - (k + 0.5) / 200;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * k;
      best = std::min(best, torque_peak(cj, R * Vec3(r * std::cos(phi), r * std::sin(phi), z)));
    }
  }
  return best;
}

Outcome f1_fidelity() {
  const DesignPoint d = feasible_rus();
  const RobotModel model = make_model(d.family, d.params);
  const Scenario sc = build_benchmark();
  std::vector<KinematicState> states;
  for (const VecX& x : sc.reference_points) states.push_back(solve_ik(model, x, mode_flags(d.modes, 6)));
  ContactSamplingPlan plan;  // 3 points, 15 degrees, 200 directions, 140 N
  const double lib = f1_detectability(model, states, plan, &sc.interaction_space);
  const double ref = f1_exhaustive(model, states, plan.force_magnitude, sc.interaction_space);
  bool identical = std::memcmp(&lib, &ref, sizeof lib) == 0;
  double scale_err = 0.0;
  for (double k : {0.5, 2.0, 3.7, 10.0}) {
    ContactSamplingPlan p = plan;
    p.force_magnitude = k * plan.force_magnitude;
    const double fk = f1_detectability(model, states, p, &sc.interaction_space);
    scale_err = std::max(scale_err, std::abs(fk - k * lib) / (k * lib));
  }
  // a perturbed design as a second configuration
  Rng rng(404);
  const RobotModel other = make_model(d.family, perturbed_params(rng, d, 0.01));
  std::vector<KinematicState> other_states;
  for (const VecX& x : sc.reference_points)
    other_states.push_back(solve_ik(other, x, mode_flags(d.modes, 6)));
  const double lib2 = f1_detectability(other, other_states, plan, &sc.interaction_space);
  const double ref2 = f1_exhaustive(other, other_states, plan.force_magnitude, sc.interaction_space);
  identical = identical && std::memcmp(&lib2, &ref2, sizeof lib2) == 0;
  Outcome o;
  o.pass = identical && scale_err <= 4 * std::numeric_limits<double>::epsilon() && lib > 0.0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "f1 = %.17g N m (reference %.17g), %s, scaling error %.2e", lib, ref,
                identical ? "bit-identical" : "MISMATCH", scale_err);
  o.detail = buf;
  return o;
}

// ---------------------------------------------------------------- 5

Outcome energy() {
  const auto t0 = Clock::now();
  Rng rng(505);
  int states = 0;
  double worst = 0.0;
  while (states < 100) {
    const bool spatial = states % 2 == 0;
    DesignPoint d = spatial ? feasible_rus() : planar_midpoint();
    d.params = perturbed_params(rng, d, spatial ? 0.02 : 0.1);
    const RobotModel model = make_model(d.family, d.params);
    const InertiaModel inertia = InertiaModel::from_model(model);
    KinematicState s;
    MassMatrixX mm;
    VecX xdot(model.dof);
    for (Eigen::Index k = 0; k < xdot.size(); ++k) xdot[k] = rng.uniform(-0.5, 0.5);
    double ref = 0.0;
    try {
      s = solve_ik(model, perturbed_pose(rng, model.dof), mode_flags(d.modes, model.leg_count()));
      mm = mass_matrix_platform(model, s, inertia);
      ref = kinetic_energy_bodywise(model, inertia, s, xdot);
    } catch (const KinematicsError&) {
      continue;
    }
    const double ke = 0.5 * xdot.dot(mm.M_x * xdot);
    worst = std::max(worst, std::abs(ke - ref) / ref);
    ++states;
  }
  bool exact = true;
  for (const DesignPoint& d : {feasible_rus(), planar_midpoint()}) {
    const RobotModel model = make_model(d.family, d.params);
    InertiaModel inertia = InertiaModel::from_model(model);
    inertia.link_density = 0.0;
    const Scenario sc = d.family == FamilyId::RUS ? build_benchmark() : build_planar_scenario();
    for (const VecX& x : sc.reference_points) {
      const KinematicState s = solve_ik(model, x, mode_flags(d.modes, model.leg_count()));
      exact = exact && effective_mass(mass_matrix_platform(model, s, inertia)) == 4.0;
    }
  }
  Outcome o;
  o.pass = worst <= 1e-6 && exact;
  char buf[200];
  std::snprintf(buf, sizeof buf, "100 states, max relative energy mismatch %.2e, massless legs %s, %.2f s",
                worst, exact ? "give exactly 4 kg" : "DIFFER from 4 kg", seconds_since(t0));
  o.detail = buf;
  return o;
}

// ---------------------------------------------------------------- 6

Outcome hierarchy() {
  const auto order = default_stage_order();
  struct Failed {
    int depth;
    double fitness_min, fitness_max;
  };
  std::vector<Failed> failed;
  bool stages_ok = true, abort_ok = true;
  std::string first_problem;
  for (int depth = 1; depth <= 9; ++depth) {
    const Stage stage = order[static_cast<std::size_t>(depth - 1)];
    const int variants = depth <= 5 ? 6 : 5;  // 50 vectors in total
    for (int v = 0; v < variants; ++v) {
      const FailureCase c = failure_case(stage, v);
      const EvalResult r = evaluate_fitness(c.point, c.scenario, c.config);
      if (r.feasible || r.failed_stage != stage) {
        stages_ok = false;
        if (first_problem.empty())
          first_problem = std::string(stage_name(stage)) + " variant " + std::to_string(v) + " stopped at " +
                          std::string(stage_name(r.failed_stage));
        continue;
      }
      for (int deeper = depth + 1; deeper <= 9; ++deeper)
        if (r.trace.entries(order[static_cast<std::size_t>(deeper - 1)]) != 0) abort_ok = false;
      if (r.trace.entries(Stage::Objectives) != 0) abort_ok = false;
      if (stage == Stage::Plausibility && r.trace.ik_solves != 0) abort_ok = false;
      failed.push_back({depth, *std::min_element(r.fitness.begin(), r.fitness.end()),
                        *std::max_element(r.fitness.begin(), r.fitness.end())});
    }
  }
  bool ordered = true;
  for (const Failed& a : failed)
    for (const Failed& b : failed)
      if (a.depth < b.depth && !(a.fitness_min > b.fitness_max)) ordered = false;
  double feasible_max = 0.0;
  bool feasible_ok = true;
  for (int v = 0; v < 2; ++v) {
    const FailureCase c = base_case(v);
    const EvalResult r = evaluate_fitness(c.point, c.scenario, c.config);
    if (!r.feasible) feasible_ok = false;
    for (double f : r.fitness) feasible_max = std::max(feasible_max, f);
  }
  for (const Failed& a : failed)
    if (!(feasible_max < a.fitness_min)) feasible_ok = false;
  Outcome o;
  o.pass = failed.size() == 50 && stages_ok && abort_ok && ordered && feasible_ok;
  o.detail = std::to_string(failed.size()) + " vectors failed at their stage, bands " +
             (ordered ? "strictly ordered" : "NOT ordered") + ", feasible fitness " +
             (feasible_ok ? "below every penalty" : "NOT below the penalties") + ", early abort " +
             (abort_ok ? "confirmed" : "VIOLATED");
  if (!first_problem.empty()) o.detail += "; " + first_problem;
  return o;
}

// ---------------------------------------------------------------- 7 to 9

SynthesisConfig reduced_run_config() {
  SynthesisConfig cfg;
  cfg.family = FamilyId::RUS;
  cfg.pso.particles = 20;
  cfg.pso.generations = 30;
  cfg.seed = 42;
  cfg.jobs = 1;
  return cfg;
}

Outcome end_to_end(const Scenario& sc, const SynthesisResult& r) {
  const Limits& lim = sc.limits;
  int passing = 0;
  double largest_f3 = 0.0, power_lo = std::numeric_limits<double>::infinity(), power_hi = 0.0;
  for (const ArchiveRecord& rec : r.archive.records()) {
    const ObjectiveVector& o = rec.objectives;
    if (o.position_error < lim.max_pos_err && o.condition < lim.max_cond &&
        o.stress_utilization < lim.max_stress_util)
      ++passing;
    largest_f3 = std::max(largest_f3, o.f3);
    power_lo = std::min(power_lo, o.max_power);
    power_hi = std::max(power_hi, o.max_power);
  }
  Outcome o;
  o.pass = passing >= 1 && r.archive.is_nondominated() && r.seconds < 1800.0;
  char buf[320];
  std::snprintf(buf, sizeof buf,
                "%zu archive entries, %d pass the hard gates, non-dominated %s, %.1f s; "
                "actuator power %.1f to %.1f W, largest f3 %.3f m",
                r.archive.size(), passing, r.archive.is_nondominated() ? "yes" : "NO", r.seconds,
                power_lo, power_hi, largest_f3);
  o.detail = buf;
  return o;
}

Outcome determinism(const Scenario& sc, const SynthesisResult& first) {
  SynthesisConfig cfg = reduced_run_config();
  cfg.jobs = 2;  // thread count must not matter
  const SynthesisResult again = run_synthesis(sc, cfg);
  const std::string a = archive_csv(cfg.family, first.archive.records());
  const std::string b = archive_csv(cfg.family, again.archive.records());
  Outcome o;
  o.pass = a == b;
  o.detail = std::string("archive CSV of the repeated run is ") + (a == b ? "identical" : "DIFFERENT") +
             " (" + std::to_string(a.size()) + " bytes)";
  return o;
}

Outcome exports(const Scenario& sc, const SynthesisResult& r) {
  const auto& recs = r.archive.records();
  bool nondominated = true, flags = true;
  std::size_t points = 0, translucent = 0;
  for (const auto& pair : front_pairs()) {
    const auto front = front_projection(recs, pair);
    for (const FrontPoint& p : front) {
      ++points;
      const SoftGates g = soft_gates(recs[p.record].objectives, sc.limits);
      if (p.translucent != g.any() || p.translucent != recs[p.record].soft.any()) flags = false;
      if (p.translucent) {
        ++translucent;
        continue;
      }
      const auto mp = recs[p.record].objectives.minimization_form();
      for (const FrontPoint& q : front) {
        if (q.translucent || q.record == p.record) continue;
        const auto mq = recs[q.record].objectives.minimization_form();
        const std::vector<double> a{mp[static_cast<std::size_t>(pair[0])], mp[static_cast<std::size_t>(pair[1])]};
        const std::vector<double> b{mq[static_cast<std::size_t>(pair[0])], mq[static_cast<std::size_t>(pair[1])]};
        if (dominance(b, a) == Dominance::ADominates) nondominated = false;
      }
    }
  }
  Outcome o;
  o.pass = nondominated && flags && points > 0;
  o.detail = std::to_string(front_pairs().size()) + " projections, " + std::to_string(points) +
             " points (" + std::to_string(translucent) + " translucent), non-dominated " +
             (nondominated ? "yes" : "NO") + ", flags " + (flags ? "match the gates" : "DO NOT match");
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const char* name, const Outcome& o) {
    std::printf("criterion %d %-30s %s  %s\n", n, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };
  report(1, "planar kinematics oracle", guarded(planar_kinematics));
  report(2, "virtual-work duality", guarded(virtual_work));
  report(3, "capsule distance oracle", guarded(capsules));
  report(4, "detectability fidelity", guarded(f1_fidelity));
  report(5, "mass-matrix energy", guarded(energy));
  report(6, "constraint hierarchy", guarded(hierarchy));

  const Scenario sc = build_benchmark();
  SynthesisResult run;
  bool ran = false;
  report(7, "reduced synthesis", guarded([&] {
           run = run_synthesis(sc, reduced_run_config());
           ran = true;
           return end_to_end(sc, run);
         }));
  report(8, "determinism", ran ? guarded([&] { return determinism(sc, run); })
                               : Outcome{false, "no run to repeat"});
  report(9, "front export integrity", ran ? guarded([&] { return exports(sc, run); })
                                          : Outcome{false, "no archive"});
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
