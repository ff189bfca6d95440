#include "prsynth/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace prsynth {

// ---------------------------------------------------------------- stages

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::Plausibility: return "plausibility";
    case Stage::ReferenceIK: return "reference-ik";
    case Stage::JointLimits: return "joint-limits";
    case Stage::SelfCollision: return "self-collision";
    case Stage::Installation: return "installation";
    case Stage::TrajectoryIK: return "trajectory";
    case Stage::Condition: return "condition";
    case Stage::PositionError: return "position-error";
    case Stage::DesignStress: return "design-stress";
    case Stage::Objectives: return "objectives";
  }
  return "";
}

Stage parse_stage(std::string_view name) {
  for (int s = 1; s <= kStageCount; ++s)
    if (stage_name(static_cast<Stage>(s)) == name) return static_cast<Stage>(s);
  throw std::invalid_argument("unknown stage '" + std::string(name) + "'");
}

std::vector<Stage> default_stage_order() {
  return {Stage::Plausibility,  Stage::ReferenceIK, Stage::JointLimits,
          Stage::SelfCollision, Stage::Installation, Stage::TrajectoryIK,
          Stage::Condition,     Stage::PositionError, Stage::DesignStress};
}

namespace {

std::vector<Stage> prerequisites(Stage s) {
  switch (s) {
    case Stage::Plausibility: return {};
    case Stage::ReferenceIK:
    case Stage::TrajectoryIK: return {Stage::Plausibility};
    case Stage::JointLimits:
    case Stage::SelfCollision:
    case Stage::Installation: return {Stage::ReferenceIK};
    case Stage::Condition:
    case Stage::PositionError: return {Stage::ReferenceIK, Stage::TrajectoryIK};
    case Stage::DesignStress: return {Stage::SelfCollision, Stage::TrajectoryIK};
    case Stage::Objectives: return {};
  }
  return {};
}

}  // namespace

void validate_stage_order(const std::vector<Stage>& order) {
  if (order.size() != static_cast<std::size_t>(kStageCount - 1))
    throw std::invalid_argument("stage order must list the nine constraint stages");
  std::array<bool, kStageCount + 1> seen{};
  for (Stage s : order) {
    if (s == Stage::Objectives)
      throw std::invalid_argument("objectives always run last and are not part of the order");
    if (seen[static_cast<std::size_t>(s)])
      throw std::invalid_argument("stage '" + std::string(stage_name(s)) + "' listed twice");
    for (Stage pre : prerequisites(s))
      if (!seen[static_cast<std::size_t>(pre)])
        throw std::invalid_argument("stage '" + std::string(stage_name(s)) + "' needs '" +
                                    std::string(stage_name(pre)) + "' to run first");
    seen[static_cast<std::size_t>(s)] = true;
  }
}

double PenaltyLadder::lower(int depth) { return std::pow(10.0, 10 - depth); }
double PenaltyLadder::upper(int depth) { return lower(depth) * std::pow(10.0, 0.5); }
double PenaltyLadder::penalty(int depth, double severity) {
  const double s = std::clamp(severity, 1e-9, 1.0);
  return lower(depth) * std::pow(10.0, 0.5 * s);
}

double squash_objective(double oriented) { return 5.0 + 10.0 / kPi * std::atan(oriented); }

ObjectiveSubset default_dominance_subset() { return {0, 2, 3, 4, 5}; }

// ---------------------------------------------------------------- design point

int search_dimension(FamilyId family) {
  return static_cast<int>(param_schema(family).size()) + 1;
}

DesignPoint decode(FamilyId family, const VecX& unit) {
  const auto& schema = param_schema(family);
  if (unit.size() != search_dimension(family))
    throw std::invalid_argument("search vector has the wrong dimension");
  DesignPoint p;
  p.family = family;
  p.params.resize(static_cast<Eigen::Index>(schema.size()));
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const double u = std::clamp(unit[static_cast<Eigen::Index>(i)], 0.0, 1.0);
    p.params[static_cast<Eigen::Index>(i)] = schema[i].lower + u * (schema[i].upper - schema[i].lower);
  }
  const int mode = std::clamp(static_cast<int>(std::floor(3.0 * unit[unit.size() - 1])), 0, 2);
  p.modes = static_cast<ModePattern>(mode);
  return p;
}

VecX encode(const DesignPoint& point) {
  const auto& schema = param_schema(point.family);
  VecX u(search_dimension(point.family));
  for (std::size_t i = 0; i < schema.size(); ++i)
    u[static_cast<Eigen::Index>(i)] = (point.params[static_cast<Eigen::Index>(i)] - schema[i].lower) /
                                      (schema[i].upper - schema[i].lower);
  u[u.size() - 1] = (static_cast<int>(point.modes) + 0.5) / 3.0;
  return u;
}

// ---------------------------------------------------------------- evaluation

ModelOptions EvalConfig::model_options(const Scenario& scenario) const {
  ModelOptions o = base_options;
  o.platform_extra_mass = scenario.platform_extra_mass;
  o.planar_height = scenario.plane_height;
  return o;
}

SoftGates soft_gates(const ObjectiveVector& obj, const Limits& limits) {
  SoftGates g;
  g.f1 = !(obj.f1 > limits.lowest_ext_torque);
  g.f2 = !(obj.f2 > limits.min_clamp_angle);
  g.f3 = !(obj.f3 > limits.min_clamp_dist);
  g.f5 = !(obj.f5 < limits.max_act_torque);
  return g;
}

namespace {

struct Margins {
  double seg_seg = std::numeric_limits<double>::infinity();
  double seg_rim = std::numeric_limits<double>::infinity();
  double rim_rim = std::numeric_limits<double>::infinity();
  double min() const { return std::min({seg_seg, seg_rim, rim_rim}); }
  void merge(const Margins& o) {
    seg_seg = std::min(seg_seg, o.seg_seg);
    seg_rim = std::min(seg_rim, o.seg_rim);
    rim_rim = std::min(rim_rim, o.rim_rim);
  }
};

Margins collision_margins(const RobotModel& model, const std::vector<Capsule>& bodies) {
  Margins m;
  const int n = static_cast<int>(bodies.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (adjacent(model, bodies[i].owner, bodies[j].owner)) continue;
      const double d = capsule_distance(bodies[i], bodies[j]);
      const int segs = (bodies[i].owner.kind == BodyKind::Segment) +
                       (bodies[j].owner.kind == BodyKind::Segment);
      double& slot = segs == 2 ? m.seg_seg : (segs == 1 ? m.seg_rim : m.rim_rim);
      slot = std::min(slot, d);
    }
  }
  return m;
}

double circular_range(std::vector<double> angles) {
  if (angles.size() < 2) return 0.0;
  for (double& a : angles) a = wrap_angle(a);
  std::sort(angles.begin(), angles.end());
  double gap = angles.front() + 2.0 * kPi - angles.back();
  for (std::size_t i = 1; i < angles.size(); ++i) gap = std::max(gap, angles[i] - angles[i - 1]);
  return 2.0 * kPi - gap;
}

struct Outcome {
  bool passed = true;
  double severity = 0.0;
  double value = 0.0;
  std::string message;
};

Outcome fail(double severity, double value, std::string message) {
  return {false, std::clamp(severity, 1e-9, 1.0), value, std::move(message)};
}

struct Context {
  const DesignPoint& point;
  const Scenario& scenario;
  const EvalConfig& config;
  EvalTrace& trace;
  GeometryOptions geometry;
  ModelOptions options;

  RobotModel model;
  bool model_ready = false;
  std::vector<KinematicState> ref_states;
  Trajectory traj;  // strided samples
  std::vector<KinematicState> traj_states;
  std::vector<JacobianSet> traj_jac;
  Margins margins;
  DesignResult design;

  Context(const DesignPoint& p, const Scenario& s, const EvalConfig& c, EvalTrace& t)
      : point(p), scenario(s), config(c), trace(t), options(c.model_options(s)) {
    geometry.platform_exclusion_length = s.platform_exclusion_length;
  }

  Outcome plausibility() {
    double v = 0.0;
    try {
      v = plausibility_violation(point.family, point.params);
      if (v <= 0.0) {
        model = make_model(point.family, point.params, options);
        model_ready = true;
      }
    } catch (const std::invalid_argument& e) {
      return fail(1.0, 1.0, e.what());
    }
    if (v > 0.0) return fail(v / (1.0 + v), v, "geometry parameters are not plausible");
    return {true, 0.0, 0.0, {}};
  }

  Outcome reference_ik() {
    const auto modes = mode_flags(point.modes, model.leg_count());
    int failed = 0;
    ref_states.clear();
    for (const VecX& x : scenario.reference_points) {
      ++trace.ik_solves;
      try {
        ref_states.push_back(solve_ik(model, x, modes, config.ik));
      } catch (const KinematicsError&) {
        ++failed;
      }
    }
    const double frac = static_cast<double>(failed) / scenario.reference_points.size();
    if (failed > 0)
      return fail(frac, failed, std::to_string(failed) + " reference points unreachable");
    return {true, 0.0, 0.0, {}};
  }

  // R joints: circular range of the coordinate. U and S joints: angular
  // spread of the outgoing link seen from the body on the other side, which
  // does not depend on the Euler branch the solver lands on.
  Outcome joint_limits() {
    double worst = -1.0;  // largest (range - limit) / limit
    const int n_groups = static_cast<int>(model.groups.size());
    for (int i = 0; i < model.leg_count(); ++i) {
      const LegChain& chain = model.legs[static_cast<std::size_t>(i)];
      std::vector<std::vector<double>> coord_values(static_cast<std::size_t>(model.coords_per_leg));
      std::vector<std::vector<Vec3>> dirs(static_cast<std::size_t>(n_groups));
      for (const KinematicState& s : ref_states) {
        const LegFrames f = leg_frames(model, i, s.q);
        const std::vector<Vec3> c = joint_centers(model, i, f);
        for (int j = 1; j < model.coords_per_leg; ++j)
          coord_values[static_cast<std::size_t>(j)].push_back(s.q[model.q_index(i, j)]);
        for (int g = 1; g < n_groups; ++g) {
          if (model.groups[static_cast<std::size_t>(g)] == JointType::Revolute) continue;
          const int first = static_cast<int>(
              std::find(chain.group.begin(), chain.group.end(), g) - chain.group.begin());
          Vec3 v;
          if (g + 1 < n_groups) {
            v = f.rotation[static_cast<std::size_t>(first - 1)].transpose() *
                (c[static_cast<std::size_t>(g) + 1] - c[static_cast<std::size_t>(g)]);
          } else {
            v = platform_transform(model, s.x).linear().transpose() *
                (c[static_cast<std::size_t>(g) - 1] - c[static_cast<std::size_t>(g)]);
          }
          dirs[static_cast<std::size_t>(g)].push_back(v.normalized());
        }
      }
      for (int j = 1; j < model.coords_per_leg; ++j) {
        const int g = chain.group[static_cast<std::size_t>(j)];
        if (model.groups[static_cast<std::size_t>(g)] != JointType::Revolute) continue;
        const double limit = config.passive_range_limit;
        worst = std::max(worst, (circular_range(coord_values[static_cast<std::size_t>(j)]) - limit) / limit);
      }
      for (int g = 1; g < n_groups; ++g) {
        const auto& d = dirs[static_cast<std::size_t>(g)];
        double spread = 0.0;
        for (std::size_t a = 0; a < d.size(); ++a)
          for (std::size_t b = a + 1; b < d.size(); ++b)
            spread = std::max(spread, std::atan2(d[a].cross(d[b]).norm(), d[a].dot(d[b])));
        if (d.empty()) continue;
        const double limit = model.groups[static_cast<std::size_t>(g)] == JointType::Spherical
                                 ? config.spherical_range_limit
                                 : config.passive_range_limit;
        worst = std::max(worst, (spread - limit) / limit);
      }
    }
    if (worst > 0.0) return fail(worst, worst, "passive joint range exceeded");
    return {true, 0.0, worst, {}};
  }

  Outcome self_collision_ref() {
    margins = Margins{};
    for (const KinematicState& s : ref_states)
      margins.merge(collision_margins(model, build_collision_set(model, s, nullptr, geometry).bodies));
    const double d = margins.min();
    if (d < 0.0) return fail(-d / 0.1, d, "self-collision at a reference point");
    return {true, 0.0, d, {}};
  }

  Outcome installation_ref() {
    double worst = 0.0;
    for (const KinematicState& s : ref_states) {
      const CollisionSet set = build_collision_set(model, s, nullptr, geometry);
      worst = std::max(worst, containment_check(set.bodies, scenario.installation_spaces, geometry)
                                  .max_protrusion);
    }
    if (worst > 0.0) return fail(worst / 0.5, worst, "structure leaves the installation space");
    return {true, 0.0, worst, {}};
  }

  Outcome trajectory() {
    const Trajectory& full = scenario.trajectory;
    const std::size_t stride = static_cast<std::size_t>(std::max(1, config.trajectory_stride));
    traj = Trajectory{};
    traj.dt = full.dt * static_cast<double>(stride);
    for (std::size_t k = 0; k < full.size(); k += stride) {
      traj.x.push_back(full.x[k]);
      traj.xd.push_back(full.xd[k]);
      traj.xdd.push_back(full.xdd[k]);
      if (k + stride >= full.size() && k + 1 != full.size()) {
        traj.x.push_back(full.x.back());
        traj.xd.push_back(full.xd.back());
        traj.xdd.push_back(full.xdd.back());
      }
    }
    const std::size_t n = traj.size();
    auto progress_severity = [&](std::size_t k) {
      return 1.0 - static_cast<double>(k) / static_cast<double>(n);
    };
    traj_states.clear();
    traj_jac.clear();
    double first_sign = 0.0;
    Margins traj_margins;
    for (std::size_t k = 0; k < n; ++k) {
      ++trace.ik_solves;
      try {
        if (k == 0)
          traj_states.push_back(
              solve_ik(model, traj.x[0], mode_flags(point.modes, model.leg_count()), config.ik));
        else
          traj_states.push_back(solve_ik(model, traj.x[k], traj_states.back(), config.ik));
        ++trace.jacobian_evaluations;
        traj_jac.push_back(jacobians(model, traj_states.back()));
      } catch (const KinematicsError& e) {
        return fail(progress_severity(k), static_cast<double>(k),
                    "trajectory sample " + std::to_string(k) + ": " + e.what());
      }
      const double sign = traj_jac.back().reduced_dx.determinant() > 0.0 ? 1.0 : -1.0;
      if (k == 0) first_sign = sign;
      if (sign != first_sign)
        return fail(progress_severity(k), static_cast<double>(k),
                    "singularity crossed before trajectory sample " + std::to_string(k));
      const CollisionSet set = build_collision_set(model, traj_jac.back().frames, nullptr, geometry);
      const Margins m = collision_margins(model, set.bodies);
      if (m.min() < 0.0)
        return fail(progress_severity(k), static_cast<double>(k),
                    "self-collision at trajectory sample " + std::to_string(k));
      const double out =
          containment_check(set.bodies, scenario.installation_spaces, geometry).max_protrusion;
      if (out > 0.0)
        return fail(progress_severity(k), static_cast<double>(k),
                    "installation space left at trajectory sample " + std::to_string(k));
      traj_margins.merge(m);
    }
    margins.merge(traj_margins);
    return {true, 0.0, static_cast<double>(n), {}};
  }

  std::vector<JacobianSet> reference_jacobians(bool& singular) {
    std::vector<JacobianSet> out;
    singular = false;
    for (const KinematicState& s : ref_states) {
      ++trace.jacobian_evaluations;
      try {
        out.push_back(jacobians(model, s));
      } catch (const KinematicsError&) {
        singular = true;
      }
    }
    return out;
  }

  Outcome condition() {
    bool singular = false;
    double worst = 0.0;
    for (const JacobianSet& j : reference_jacobians(singular)) worst = std::max(worst, j.condition);
    for (const JacobianSet& j : traj_jac) worst = std::max(worst, j.condition);
    if (singular) worst = std::numeric_limits<double>::infinity();
    const double limit = scenario.limits.max_cond;
    if (!(worst < limit)) {
      const double s = std::isfinite(worst) ? std::log10(worst / limit) / 3.0 : 1.0;
      return fail(s, worst, "condition number above the limit");
    }
    return {true, 0.0, worst, {}};
  }

  Outcome position_error_gate() {
    bool singular = false;
    const int t = model.translational_dofs();
    double worst = 0.0;
    for (const JacobianSet& j : reference_jacobians(singular))
      worst = std::max(worst, position_error(j.J_xqa, t, scenario.encoder_resolution));
    for (const JacobianSet& j : traj_jac)
      worst = std::max(worst, position_error(j.J_xqa, t, scenario.encoder_resolution));
    if (singular) worst = std::numeric_limits<double>::infinity();
    const double limit = scenario.limits.max_pos_err;
    if (!(worst < limit)) {
      const double s = std::isfinite(worst) ? worst / limit - 1.0 : 1.0;
      return fail(s, worst, "position error above the limit");
    }
    return {true, 0.0, worst, {}};
  }

  Outcome design_stress() {
    const InertiaModel inertia = InertiaModel::from_model(model);
    InternalLoads loads;
    try {
      loads = internal_load_estimate(model, inertia, traj, traj_states);
    } catch (const std::exception& e) {
      return fail(1.0, 0.0, e.what());
    }
    design = design_optimization(loads, config.material, inertia.gravity.norm(),
                                 scenario.limits.max_stress_util, config.design,
                                 options.tube_diameter, margins.seg_seg, margins.seg_rim);
    if (!design.feasible)
      return fail(design.utilization / scenario.limits.max_stress_util - 1.0, design.utilization,
                  "no tube section keeps the stress below the limit");
    return {true, 0.0, design.utilization, {}};
  }

  Outcome run(Stage s) {
    switch (s) {
      case Stage::Plausibility: return plausibility();
      case Stage::ReferenceIK: return reference_ik();
      case Stage::JointLimits: return joint_limits();
      case Stage::SelfCollision: return self_collision_ref();
      case Stage::Installation: return installation_ref();
      case Stage::TrajectoryIK: return trajectory();
      case Stage::Condition: return condition();
      case Stage::PositionError: return position_error_gate();
      case Stage::DesignStress: return design_stress();
      case Stage::Objectives: break;
    }
    return {};
  }
};

}  // namespace

EvalResult evaluate_fitness(const DesignPoint& point, const Scenario& scenario,
                            const EvalConfig& config) {
  validate_stage_order(config.stage_order);
  if (family_info(point.family).platform_dof() != scenario.dof)
    throw std::invalid_argument("family " + family_info(point.family).name +
                                " does not match the scenario's degrees of freedom");
  EvalResult res;
  Context ctx(point, scenario, config, res.trace);
  const std::size_t n_obj = config.dominance.size();

  for (std::size_t depth = 1; depth <= config.stage_order.size(); ++depth) {
    const Stage stage = config.stage_order[depth - 1];
    ++res.trace.stage_entries[static_cast<std::size_t>(stage)];
    const Outcome o = ctx.run(stage);
    res.log.push_back({stage, o.value, o.passed});
    if (!o.passed) {
      res.failed_stage = stage;
      res.severity = o.severity;
      res.message = o.message;
      res.fitness.assign(n_obj, PenaltyLadder::penalty(static_cast<int>(depth), o.severity));
      return res;
    }
  }

  ++res.trace.stage_entries[static_cast<std::size_t>(Stage::Objectives)];
  ModelOptions designed = ctx.options;
  designed.tube_diameter = ctx.design.diameter;
  designed.tube_wall = ctx.design.wall;
  const RobotModel model = make_model(point.family, point.params, designed);
  const InertiaModel inertia = InertiaModel::from_model(model);
  ObjectiveVector& obj = res.objectives;
  try {
    obj.f1 = f1_detectability(model, ctx.traj_states, scenario.sampling, &scenario.interaction_space);
    obj.f2 = f2_min_passive_angle(model, ctx.traj_states, &scenario.interaction_space);
    obj.f3 = f3_min_clamp_distance(model, ctx.traj_states, &scenario.interaction_space, ctx.geometry);
    obj.f4 = f4_effective_mass(model, inertia, ctx.traj_states);
    const DriveLoads loads =
        inverse_dynamics_traj(model, inertia, ctx.traj, ctx.traj_states, config.dynamics);
    const DriveObjectives drive = f5_f6_drive_load(loads);
    obj.f5 = drive.f5;
    obj.f6 = drive.f6;
    obj.max_power = loads.max_power.maxCoeff();
    obj.max_velocity_term = loads.max_velocity_term;
  } catch (const SampleError& e) {
    // a singular finite-difference neighbour counts as a trajectory failure
    const auto it = std::find(config.stage_order.begin(), config.stage_order.end(), Stage::TrajectoryIK);
    const int depth = static_cast<int>(it - config.stage_order.begin()) + 1;
    res.failed_stage = Stage::TrajectoryIK;
    res.severity = 1e-3;
    res.message = e.what();
    res.fitness.assign(n_obj, PenaltyLadder::penalty(depth, res.severity));
    return res;
  }
  for (const StageLog& l : res.log) {
    if (l.stage == Stage::Condition) obj.condition = l.value;
    if (l.stage == Stage::PositionError) obj.position_error = l.value;
  }
  obj.stress_utilization = ctx.design.utilization;
  res.tube_diameter = ctx.design.diameter;
  res.tube_wall = ctx.design.wall;
  res.soft = soft_gates(obj, scenario.limits);
  res.feasible = true;
  res.failed_stage = Stage::Objectives;
  for (double v : oriented(obj, config.dominance)) res.fitness.push_back(squash_objective(v));
  return res;
}

// ---------------------------------------------------------------- dominance

Dominance dominance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("objective vectors differ in length");
  bool a_better = false, b_better = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) a_better = true;
    else if (b[i] < a[i]) b_better = true;
  }
  if (a_better && !b_better) return Dominance::ADominates;
  if (b_better && !a_better) return Dominance::BDominates;
  return Dominance::Incomparable;
}

std::vector<double> oriented(const ObjectiveVector& v, const ObjectiveSubset& subset) {
  const auto all = v.minimization_form();
  std::vector<double> out;
  for (int i : subset) out.push_back(all[static_cast<std::size_t>(i)]);
  return out;
}

Dominance dominance(const ObjectiveVector& a, const ObjectiveVector& b,
                    const ObjectiveSubset& subset) {
  return dominance(oriented(a, subset), oriented(b, subset));
}

// ---------------------------------------------------------------- archive

std::vector<double> crowding_distance(const std::vector<std::vector<double>>& points) {
  const std::size_t n = points.size();
  std::vector<double> d(n, 0.0);
  if (n == 0) return d;
  const std::size_t m = points.front().size();
  std::vector<std::size_t> idx(n);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return points[a][k] < points[b][k]; });
    const double span = points[idx.back()][k] - points[idx.front()][k];
    d[idx.front()] = std::numeric_limits<double>::infinity();
    d[idx.back()] = std::numeric_limits<double>::infinity();
    if (!(span > 0.0)) continue;
    for (std::size_t i = 1; i + 1 < n; ++i)
      d[idx[i]] += (points[idx[i + 1]][k] - points[idx[i - 1]][k]) / span;
  }
  return d;
}

std::vector<double> ParetoArchive::crowding_distances() const {
  std::vector<std::vector<double>> pts;
  for (const ArchiveRecord& r : records_) pts.push_back(oriented(r.objectives, subset_));
  return crowding_distance(pts);
}

bool ParetoArchive::insert(const ArchiveRecord& record) {
  const std::vector<double> v = oriented(record.objectives, subset_);
  for (const ArchiveRecord& r : records_) {
    const std::vector<double> w = oriented(r.objectives, subset_);
    if (w == v || dominance(w, v) == Dominance::ADominates) return false;
  }
  std::vector<ArchiveRecord> kept;
  kept.reserve(records_.size() + 1);
  for (ArchiveRecord& r : records_)
    if (dominance(v, oriented(r.objectives, subset_)) != Dominance::ADominates)
      kept.push_back(std::move(r));
  kept.push_back(record);
  records_ = std::move(kept);
  while (records_.size() > capacity_) {
    const std::vector<double> cd = crowding_distances();
    const auto worst = std::min_element(cd.begin(), cd.end()) - cd.begin();
    records_.erase(records_.begin() + worst);
  }
  return true;
}

bool ParetoArchive::is_nondominated() const {
  for (std::size_t i = 0; i < records_.size(); ++i)
    for (std::size_t j = 0; j < records_.size(); ++j)
      if (i != j && dominance(records_[i].objectives, records_[j].objectives, subset_) ==
                        Dominance::ADominates)
        return false;
  return true;
}

double hypervolume_2d(std::vector<std::array<double, 2>> points, std::array<double, 2> reference) {
  points.erase(std::remove_if(points.begin(), points.end(),
                              [&](const auto& p) {
                                return !(p[0] < reference[0] && p[1] < reference[1]);
                              }),
               points.end());
  std::sort(points.begin(), points.end());
  double volume = 0.0;
  double ceiling = reference[1];
  for (const auto& p : points) {
    if (p[1] >= ceiling) continue;
    volume += (reference[0] - p[0]) * (ceiling - p[1]);
    ceiling = p[1];
  }
  return volume;
}

// ---------------------------------------------------------------- swarm

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

}  // namespace

Swarm init_swarm(int particles, int dimension, std::uint64_t seed) {
  Swarm swarm;
  swarm.rng.seed(seed);
  swarm.particles.resize(static_cast<std::size_t>(particles));
  for (Particle& p : swarm.particles) {
    p.position = VecX::Zero(dimension);
    p.velocity = VecX::Zero(dimension);
  }
  std::vector<int> strata(static_cast<std::size_t>(particles));
  for (int d = 0; d < dimension; ++d) {
    for (int i = 0; i < particles; ++i) strata[static_cast<std::size_t>(i)] = i;
    for (int i = particles - 1; i > 0; --i)
      std::swap(strata[static_cast<std::size_t>(i)],
                strata[uniform_index(swarm.rng, static_cast<std::size_t>(i) + 1)]);
    for (int i = 0; i < particles; ++i)
      swarm.particles[static_cast<std::size_t>(i)].position[d] =
          (strata[static_cast<std::size_t>(i)] + uniform01(swarm.rng)) / particles;
  }
  for (Particle& p : swarm.particles) p.best_position = p.position;
  return swarm;
}

void absorb_evaluations(Swarm& swarm, ParetoArchive& archive, const std::vector<EvalResult>& results,
                        const std::function<ArchiveRecord(const VecX&, const EvalResult&, int, int)>&
                            make_record) {
  for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
    Particle& p = swarm.particles[i];
    const EvalResult& r = results[i];
    p.fitness = r.fitness;
    bool replace = p.best_fitness.empty();
    if (!replace) {
      switch (dominance(r.fitness, p.best_fitness)) {
        case Dominance::ADominates: replace = true; break;
        case Dominance::BDominates: replace = false; break;
        case Dominance::Incomparable: replace = (swarm.rng() & 1u) != 0; break;
      }
    }
    if (replace) {
      p.best_fitness = r.fitness;
      p.best_position = p.position;
    }
    if (r.feasible) archive.insert(make_record(p.position, r, swarm.generation, static_cast<int>(i)));
  }
}

void pso_step(Swarm& swarm, ParetoArchive& archive, const PsoSettings& s,
              const BatchEvaluator& evaluate,
              const std::function<ArchiveRecord(const VecX&, const EvalResult&, int, int)>&
                  make_record) {
  const std::vector<double> crowd = archive.crowding_distances();
  // fallback leader: least penalized personal best
  std::size_t best = 0;
  for (std::size_t i = 1; i < swarm.particles.size(); ++i)
    if (swarm.particles[i].best_fitness.front() < swarm.particles[best].best_fitness.front()) best = i;
  const VecX fallback = swarm.particles[best].best_position;

  std::vector<VecX> positions;
  for (Particle& p : swarm.particles) {
    VecX leader = fallback;
    if (!archive.empty()) {
      const std::size_t a = uniform_index(swarm.rng, archive.size());
      const std::size_t b = uniform_index(swarm.rng, archive.size());
      leader = archive.records()[crowd[b] > crowd[a] ? b : a].unit;
    }
    for (int d = 0; d < p.position.size(); ++d) {
      const double r1 = uniform01(swarm.rng);
      const double r2 = uniform01(swarm.rng);
      double v = s.inertia * p.velocity[d] + s.cognitive * r1 * (p.best_position[d] - p.position[d]) +
                 s.social * r2 * (leader[d] - p.position[d]);
      v = std::clamp(v, -s.max_velocity, s.max_velocity);
      double x = p.position[d] + v;
      if (x < 0.0 || x > 1.0) {
        x = std::clamp(x, 0.0, 1.0);
        v = 0.0;
      }
      p.position[d] = x;
      p.velocity[d] = v;
    }
    positions.push_back(p.position);
  }
  ++swarm.generation;
  absorb_evaluations(swarm, archive, evaluate(positions), make_record);
}

// ---------------------------------------------------------------- design optimization

DesignResult design_optimization(const InternalLoads& loads, const Material& material,
                                 double gravity, double max_utilization,
                                 const DesignSettings& st, double base_diameter,
                                 double seg_seg_margin, double seg_rim_margin) {
  DesignResult out;
  // inflating the tube radius by dr costs 2 dr between segments, dr against rims
  const double dr = std::min(0.5 * seg_seg_margin, seg_rim_margin);
  const double d_hi = std::isfinite(dr) ? std::min(st.max_diameter, base_diameter + 2.0 * dr)
                                        : st.max_diameter;
  out.max_diameter = d_hi;
  const double d_lo = std::max(st.min_diameter, st.min_wall / st.max_wall_ratio);
  auto util = [&](double d, double t) {
    return loads.stress_utilization({d, t}, material, gravity);
  };
  auto t_cap = [&](double d) { return std::min(st.max_wall, st.max_wall_ratio * d); };
  if (d_hi < d_lo) {
    out.diameter = d_lo;
    out.wall = st.min_wall;
    out.utilization = util(d_lo, st.min_wall);
    return out;
  }

  // coarse single-objective swarm on the linear density with a stress penalty
  {
    std::mt19937_64 rng(0x5eedULL);
    const int n = std::max(2, st.particles);
    std::vector<Vec3> pos(static_cast<std::size_t>(n)), vel(static_cast<std::size_t>(n), Vec3::Zero());
    std::vector<Vec3> pbest(static_cast<std::size_t>(n));
    std::vector<double> pcost(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    Vec3 gbest = Vec3::Zero();
    double gcost = std::numeric_limits<double>::infinity();
    auto cost = [&](const Vec3& u) {
      const double d = d_lo + u[0] * (d_hi - d_lo);
      const double t = st.min_wall + u[1] * (t_cap(d) - st.min_wall);
      const TubeSection sec{d, t};
      const double u_s = util(d, t);
      const double mass = sec.linear_density(material);
      return u_s < max_utilization ? mass : 1e6 + u_s;
    };
    for (int i = 0; i < n; ++i) {
      pos[i] = Vec3(uniform01(rng), uniform01(rng), 0.0);
      pbest[i] = pos[i];
    }
    for (int it = 0; it < std::max(1, st.iterations); ++it) {
      for (int i = 0; i < n; ++i) {
        const double c = cost(pos[i]);
        if (c < pcost[i]) {
          pcost[i] = c;
          pbest[i] = pos[i];
        }
        if (c < gcost) {
          gcost = c;
          gbest = pos[i];
        }
      }
      for (int i = 0; i < n; ++i) {
        for (int k = 0; k < 2; ++k) {
          vel[i][k] = 0.7 * vel[i][k] + 1.5 * uniform01(rng) * (pbest[i][k] - pos[i][k]) +
                      1.5 * uniform01(rng) * (gbest[k] - pos[i][k]);
          vel[i][k] = std::clamp(vel[i][k], -0.5, 0.5);
          pos[i][k] = std::clamp(pos[i][k] + vel[i][k], 0.0, 1.0);
        }
      }
    }
    out.pso_mass = gcost < 1e6 ? gcost : std::numeric_limits<double>::infinity();
  }

  // exact refinement: thinnest wall, smallest diameter that holds; otherwise
  // the largest admissible diameter with the thinnest sufficient wall
  constexpr int kBisect = 60;
  const double t0 = st.min_wall;
  if (util(d_hi, t0) < max_utilization) {
    double lo = d_lo, hi = d_hi;
    if (util(lo, t0) < max_utilization) {
      hi = lo;
    } else {
      for (int i = 0; i < kBisect; ++i) {
        const double mid = 0.5 * (lo + hi);
        (util(mid, t0) < max_utilization ? hi : lo) = mid;
      }
    }
    out.diameter = hi;
    out.wall = t0;
    out.feasible = true;
  } else {
    const double t_max = t_cap(d_hi);
    if (!(util(d_hi, t_max) < max_utilization)) {
      out.diameter = d_hi;
      out.wall = t_max;
      out.utilization = util(d_hi, t_max);
      return out;
    }
    double lo = t0, hi = t_max;
    for (int i = 0; i < kBisect; ++i) {
      const double mid = 0.5 * (lo + hi);
      (util(d_hi, mid) < max_utilization ? hi : lo) = mid;
    }
    out.diameter = d_hi;
    out.wall = hi;
    out.feasible = true;
  }
  out.utilization = util(out.diameter, out.wall);
  return out;
}

// ---------------------------------------------------------------- synthesis

std::vector<EvalResult> evaluate_batch(FamilyId family, const std::vector<VecX>& positions,
                                       const Scenario& scenario, const EvalConfig& config,
                                       int jobs) {
  std::vector<EvalResult> results(positions.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < positions.size(); i = next++)
      results[i] = evaluate_fitness(decode(family, positions[i]), scenario, config);
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(positions.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return results;
}

SynthesisResult run_synthesis(const Scenario& scenario, const SynthesisConfig& config,
                              const ProgressCallback& progress) {
  validate_stage_order(config.eval.stage_order);
  if (family_info(config.family).platform_dof() != scenario.dof)
    throw std::invalid_argument("family " + family_info(config.family).name +
                                " does not match the scenario's degrees of freedom");
  if (config.pso.particles < 1 || config.pso.generations < 1)
    throw std::invalid_argument("particles and generations must be positive");
  const auto start = std::chrono::steady_clock::now();
  const FamilyId family = config.family;
  SynthesisResult result{ParetoArchive(static_cast<std::size_t>(config.pso.archive_capacity),
                                       config.eval.dominance),
                         {}, 0, 0.0};
  StageStats& stats = result.stats;

  BatchEvaluator evaluate = [&](const std::vector<VecX>& positions) {
    std::vector<EvalResult> rs = evaluate_batch(family, positions, scenario, config.eval, config.jobs);
    for (const EvalResult& r : rs) {
      ++stats.evaluations;
      ++stats.failures[static_cast<std::size_t>(r.failed_stage)];
      if (r.feasible) {
        ++stats.feasible;
        if (r.soft.any()) ++stats.soft_violating;
      }
    }
    return rs;
  };
  auto make_record = [&](const VecX& unit, const EvalResult& r, int generation, int particle) {
    ArchiveRecord rec;
    rec.point = decode(family, unit);
    rec.unit = unit;
    rec.objectives = r.objectives;
    rec.soft = r.soft;
    rec.tube_diameter = r.tube_diameter;
    rec.tube_wall = r.tube_wall;
    rec.generation = generation;
    rec.particle = particle;
    return rec;
  };
  auto save = [&](const Swarm& swarm) {
    if (config.checkpoint_path.empty()) return;
    Checkpoint cp;
    cp.family = family;
    cp.seed = config.seed;
    cp.swarm = swarm;
    cp.archive = result.archive.records();
    cp.stats = stats;
    write_checkpoint(cp, config.checkpoint_path);
  };

  Swarm swarm;
  bool resumed = false;
  if (config.resume && !config.checkpoint_path.empty()) {
    Checkpoint cp = read_checkpoint(config.checkpoint_path);
    if (cp.family != family || cp.seed != config.seed)
      throw std::invalid_argument("checkpoint belongs to a different family or seed");
    if (cp.swarm.particles.size() != static_cast<std::size_t>(config.pso.particles))
      throw std::invalid_argument("checkpoint particle count differs from the configuration");
    swarm = std::move(cp.swarm);
    result.archive.restore(std::move(cp.archive));
    stats = cp.stats;
    resumed = true;
  }
  if (!resumed) {
    swarm = init_swarm(config.pso.particles, search_dimension(family), config.seed);
    std::vector<VecX> positions;
    for (const Particle& p : swarm.particles) positions.push_back(p.position);
    swarm.generation = 1;
    absorb_evaluations(swarm, result.archive, evaluate(positions), make_record);
    save(swarm);
    if (progress) progress(swarm.generation, result.archive, stats);
  }
  while (swarm.generation < config.pso.generations) {
    pso_step(swarm, result.archive, config.pso, evaluate, make_record);
    save(swarm);
    if (progress) progress(swarm.generation, result.archive, stats);
  }
  result.generations_done = swarm.generation;
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace prsynth
