#include "prsynth/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace prsynth {

using Json = nlohmann::ordered_json;

double canonical_number(double v) {
  if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.14g", v);
  return std::strtod(buf, nullptr);
}

namespace {

int translational_count(int dof) { return dof == 6 ? 3 : 2; }

VecX make_pose(std::initializer_list<double> v) {
  VecX x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

struct Profile {
  int accel_steps = 0;
  int cruise_steps = 0;
  double peak_rate = 0.0;  // of the path parameter s in [0, 1]
  double accel = 0.0;

  int steps() const { return 2 * accel_steps + cruise_steps; }

  // s, sdot at step k; sddot on the interval after step k
  void at(int k, double dt, double& s, double& sd, double& sdd) const {
    const double ta = accel_steps * dt;
    const double total = steps() * dt;
    const double t = k * dt;
    if (k <= accel_steps) {
      s = 0.5 * accel * t * t;
      sd = accel * t;
    } else if (k <= accel_steps + cruise_steps) {
      s = 0.5 * accel * ta * ta + peak_rate * (t - ta);
      sd = peak_rate;
    } else {
      const double tau = total - t;
      s = 1.0 - 0.5 * accel * tau * tau;
      sd = accel * tau;
    }
    if (k >= steps()) {
      s = 1.0;
      sd = 0.0;
    }
    if (k < accel_steps) sdd = accel;
    else if (k < accel_steps + cruise_steps) sdd = 0.0;
    else if (k < steps()) sdd = -accel;
    else sdd = 0.0;
  }
};

Profile plan_profile(double length, double angle, const TimingLimits& lim) {
  double v = std::numeric_limits<double>::infinity();
  double a = std::numeric_limits<double>::infinity();
  if (length > 0.0) {
    v = std::min(v, lim.max_speed / length);
    a = std::min(a, lim.max_accel / length);
  }
  if (angle > 0.0) {
    v = std::min(v, lim.max_angular_speed / angle);
    a = std::min(a, lim.max_angular_accel / angle);
  }
  double ta, tc;
  if (v * v / a >= 1.0) {
    ta = std::sqrt(1.0 / a);
    tc = 0.0;
  } else {
    ta = v / a;
    tc = 1.0 / v - v / a;
  }
  Profile p;
  p.accel_steps = std::max(1, static_cast<int>(std::ceil(ta / lim.dt - 1e-9)));
  p.cruise_steps = tc > 0.0 ? static_cast<int>(std::ceil(tc / lim.dt - 1e-9)) : 0;
  const double ta_q = p.accel_steps * lim.dt;
  const double tc_q = p.cruise_steps * lim.dt;
  p.peak_rate = 1.0 / (ta_q + tc_q);
  p.accel = p.peak_rate / ta_q;
  return p;
}

}  // namespace

Trajectory trapezoid_trajectory(const std::vector<VecX>& waypoints, const TimingLimits& timing,
                                int dof) {
  if (waypoints.empty()) throw ScenarioError("waypoints", "at least one waypoint is required");
  if (!(timing.dt > 0.0)) throw ScenarioError("timing.dt_s", "must be positive");
  const int t = translational_count(dof);
  Trajectory traj;
  traj.dt = timing.dt;
  traj.x.push_back(waypoints.front());
  traj.xd.push_back(VecX::Zero(dof));
  traj.xdd.push_back(VecX::Zero(dof));
  for (std::size_t w = 1; w < waypoints.size(); ++w) {
    const VecX& a = waypoints[w - 1];
    const VecX delta = waypoints[w] - a;
    const double length = delta.head(t).norm();
    const double angle = delta.tail(dof - t).norm();
    if (length == 0.0 && angle == 0.0) continue;
    const Profile p = plan_profile(length, angle, timing);
    double s, sd, sdd;
    p.at(0, timing.dt, s, sd, sdd);
    traj.xdd.back() = sdd * delta;
    for (int k = 1; k <= p.steps(); ++k) {
      p.at(k, timing.dt, s, sd, sdd);
      traj.x.push_back(k == p.steps() ? waypoints[w] : VecX(a + s * delta));
      traj.xd.push_back(sd * delta);
      traj.xdd.push_back(sdd * delta);
    }
  }
  return traj;
}

void check_trajectory_consistency(const Trajectory& traj, double tolerance) {
  if (traj.x.size() != traj.xd.size() || traj.x.size() != traj.xdd.size())
    throw ScenarioError("trajectory.samples", "x, xd and xdd must have the same sample count");
  if (!(traj.dt > 0.0)) throw ScenarioError("trajectory.dt_s", "must be positive");
  const double dt = traj.dt;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const std::string at = "trajectory.samples[" + std::to_string(k) + "]";
    const double pos_gap =
        (traj.x[k + 1] - traj.x[k] - 0.5 * dt * (traj.xd[k] + traj.xd[k + 1])).cwiseAbs().maxCoeff();
    if (!(pos_gap <= tolerance))
      throw ScenarioError(at, "position change to sample " + std::to_string(k + 1) +
                                  " disagrees with the mean velocity by " + std::to_string(pos_gap));
    const double vel_gap =
        (traj.xd[k + 1] - traj.xd[k] - dt * traj.xdd[k]).cwiseAbs().maxCoeff();
    if (!(vel_gap <= tolerance))
      throw ScenarioError(at, "velocity change to sample " + std::to_string(k + 1) +
                                  " disagrees with the acceleration by " + std::to_string(vel_gap));
  }
}

Scenario build_benchmark() {
  Scenario sc;
  sc.name = "pick-and-place benchmark";
  sc.dof = 6;
  // reference cylinder r = 0.25 m, z from 1.0 to 1.35 m, constant orientation
  const double r = 0.25, z_low = 1.0, z_high = 1.35;
  for (double z : {z_high, z_low}) {
    for (int k = 0; k < 4; ++k) {
      const double a = kPi / 2.0 * k;
      sc.reference_points.push_back(make_pose({r * std::cos(a), r * std::sin(a), z, 0, 0, 0}));
    }
  }
  sc.reference_points.push_back(make_pose({0, 0, 0.5 * (z_low + z_high), 0, 0, 0}));

  const double tilt = deg2rad(15.0), turn = deg2rad(20.0);
  const VecX pick1 = make_pose({0.12, -0.2, 1.0, 0, 0, 0});
  const VecX pick2 = make_pose({-0.12, -0.2, 1.0, 0, 0, 0});
  const VecX a1 = make_pose({0.1, 0.0, 1.15, 0, tilt, turn});
  const VecX a2 = make_pose({-0.1, 0.0, 1.15, 0, -tilt, -turn});
  const VecX a3 = make_pose({0.0, 0.1, 1.15, -tilt, 0, turn});
  const VecX a4 = make_pose({0.0, -0.1, 1.15, tilt, 0, -turn});
  sc.waypoints = {pick1, a1, pick2, a2, pick1, a3, pick2, a4};
  sc.trajectory = trapezoid_trajectory(sc.waypoints, sc.timing, sc.dof);

  sc.interaction_space = {Vec3(-0.55, -0.55, 0.8), Vec3(0.55, 0.55, 2.0), CuboidRole::Interaction};
  sc.installation_spaces = {
      {Vec3(-0.5, -0.5, 0.8), Vec3(0.5, 0.5, 2.1), CuboidRole::Installation},
      {Vec3(-1.0, -1.0, 2.1), Vec3(1.0, 1.0, 3.1), CuboidRole::Installation},
  };
  return sc;
}

Scenario build_planar_scenario() {
  Scenario sc;
  sc.name = "planar test scenario";
  sc.dof = 3;
  sc.plane_height = 1.2;
  const double r = 0.1;
  for (int k = 0; k < 4; ++k) {
    const double a = kPi / 2.0 * k;
    sc.reference_points.push_back(make_pose({r * std::cos(a), r * std::sin(a), 0}));
  }
  sc.reference_points.push_back(make_pose({0, 0, 0}));
  const double turn = deg2rad(20.0);
  sc.waypoints = {make_pose({0.08, -0.08, 0}), make_pose({-0.05, 0.05, turn}),
                  make_pose({-0.08, -0.08, 0}), make_pose({0.05, 0.05, -turn})};
  sc.trajectory = trapezoid_trajectory(sc.waypoints, sc.timing, sc.dof);
  sc.interaction_space = {Vec3(-0.6, -0.6, 1.0), Vec3(0.6, 0.6, 1.4), CuboidRole::Interaction};
  sc.installation_spaces = {{Vec3(-1.5, -1.5, 1.0), Vec3(1.5, 1.5, 1.4), CuboidRole::Installation}};
  return sc;
}

namespace {

void check_cuboid(const Cuboid& c, const std::string& path) {
  if (!c.min_corner.allFinite() || !c.max_corner.allFinite())
    throw ScenarioError(path, "corners must be finite");
  if (!(c.min_corner.array() < c.max_corner.array()).all())
    throw ScenarioError(path, "min corner must be below max corner in every axis");
}

void check_pose(const VecX& x, int dof, const std::string& path) {
  if (x.size() != dof)
    throw ScenarioError(path, "expected " + std::to_string(dof) + " entries, got " +
                                  std::to_string(x.size()));
  if (!x.allFinite()) throw ScenarioError(path, "entries must be finite");
  const int t = translational_count(dof);
  for (int i = t; i < dof; ++i)
    if (std::abs(x[i]) > deg2rad(45.0) + 1e-12)
      throw ScenarioError(path, "orientation angles are limited to 45 degrees");
}

}  // namespace

void validate_scenario(const Scenario& sc) {
  if (sc.dof != 6 && sc.dof != 3) throw ScenarioError("dof", "must be 6 or 3");
  if (sc.reference_points.empty())
    throw ScenarioError("reference_points", "at least one reference point is required");
  for (std::size_t i = 0; i < sc.reference_points.size(); ++i)
    check_pose(sc.reference_points[i], sc.dof, "reference_points[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < sc.waypoints.size(); ++i)
    check_pose(sc.waypoints[i], sc.dof, "waypoints[" + std::to_string(i) + "]");
  if (sc.trajectory.size() == 0) throw ScenarioError("trajectory.samples", "must not be empty");
  for (std::size_t k = 0; k < sc.trajectory.size(); ++k) {
    const std::string at = "trajectory.samples[" + std::to_string(k) + "]";
    check_pose(sc.trajectory.x[k], sc.dof, at + ".x");
    if (sc.trajectory.xd[k].size() != sc.dof || !sc.trajectory.xd[k].allFinite())
      throw ScenarioError(at + ".xd", "expected " + std::to_string(sc.dof) + " finite entries");
    if (sc.trajectory.xdd[k].size() != sc.dof || !sc.trajectory.xdd[k].allFinite())
      throw ScenarioError(at + ".xdd", "expected " + std::to_string(sc.dof) + " finite entries");
  }
  check_trajectory_consistency(sc.trajectory);
  check_cuboid(sc.interaction_space, "interaction_space");
  if (sc.installation_spaces.empty())
    throw ScenarioError("installation_spaces", "at least one installation space is required");
  for (std::size_t i = 0; i < sc.installation_spaces.size(); ++i)
    check_cuboid(sc.installation_spaces[i], "installation_spaces[" + std::to_string(i) + "]");
  const Limits& l = sc.limits;
  auto positive = [](double v, const char* path) {
    if (!(v > 0.0)) throw ScenarioError(path, "must be positive");
  };
  positive(l.lowest_ext_torque, "limits.lowest_ext_torque_Nm");
  positive(l.min_clamp_angle, "limits.min_clamp_angle_deg");
  positive(l.min_clamp_dist, "limits.min_clamp_dist_m");
  positive(l.max_act_torque, "limits.max_act_torque_Nm");
  positive(l.max_pos_err, "limits.max_pos_err_m");
  positive(l.max_cond, "limits.max_cond");
  positive(l.max_stress_util, "limits.max_stress_util");
  if (!(sc.platform_extra_mass >= 0.0))
    throw ScenarioError("platform_extra_mass_kg", "must not be negative");
  positive(sc.encoder_resolution, "encoder_resolution_deg");
  positive(sc.platform_exclusion_length, "platform_exclusion_length_m");
  try {
    sc.sampling.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("sampling", e.what());
  }
}

// ---------------------------------------------------------------- serialization

namespace {

constexpr const char* kFormat = "prsynth-scenario";
constexpr int kVersion = 1;

double c14(double v) { return canonical_number(v); }

Json pose_json(const VecX& x, int dof) {
  const int t = translational_count(dof);
  Json a = Json::array();
  for (int i = 0; i < x.size(); ++i) a.push_back(c14(i < t ? x[i] : rad2deg(x[i])));
  return a;
}

Json vec3_json(const Vec3& v) { return Json::array({c14(v.x()), c14(v.y()), c14(v.z())}); }

Json cuboid_json(const Cuboid& c) {
  return Json{{"min_m", vec3_json(c.min_corner)}, {"max_m", vec3_json(c.max_corner)}};
}

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  Reader at(const std::string& key) const {
    if (!j_.is_object()) throw ScenarioError(path_, "expected an object");
    const auto it = j_.find(key);
    if (it == j_.end()) throw ScenarioError(join(key), "missing required field");
    return Reader(*it, join(key));
  }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  Reader index(std::size_t i) const {
    return Reader(j_.at(i), path_ + "[" + std::to_string(i) + "]");
  }
  std::size_t size() const {
    if (!j_.is_array()) throw ScenarioError(path_, "expected an array");
    return j_.size();
  }
  double number() const {
    if (!j_.is_number()) throw ScenarioError(path_, "expected a number");
    return j_.get<double>();
  }
  int integer() const {
    if (!j_.is_number_integer()) throw ScenarioError(path_, "expected an integer");
    return j_.get<int>();
  }
  std::string string() const {
    if (!j_.is_string()) throw ScenarioError(path_, "expected a string");
    return j_.get<std::string>();
  }
  VecX vector() const {
    const std::size_t n = size();
    VecX v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = index(i).number();
    return v;
  }
  VecX pose(int dof, bool angular_scale = true) const {
    VecX v = vector();
    if (v.size() != dof)
      throw ScenarioError(path_, "expected " + std::to_string(dof) + " entries, got " +
                                     std::to_string(v.size()));
    if (angular_scale)
      for (int i = translational_count(dof); i < dof; ++i) v[i] = deg2rad(v[i]);
    return v;
  }
  Vec3 vec3() const {
    VecX v = vector();
    if (v.size() != 3) throw ScenarioError(path_, "expected 3 entries");
    return Vec3(v[0], v[1], v[2]);
  }
  Cuboid cuboid(CuboidRole role) const { return {at("min_m").vec3(), at("max_m").vec3(), role}; }
  const std::string& path() const { return path_; }

 private:
  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  const Json& j_;
  std::string path_;
};

}  // namespace

std::string scenario_to_text(const Scenario& sc) {
  Json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["name"] = sc.name;
  j["dof"] = sc.dof;
  j["plane_height_m"] = c14(sc.plane_height);
  Json refs = Json::array();
  for (const VecX& x : sc.reference_points) refs.push_back(pose_json(x, sc.dof));
  j["reference_points"] = refs;
  Json wps = Json::array();
  for (const VecX& x : sc.waypoints) wps.push_back(pose_json(x, sc.dof));
  j["waypoints"] = wps;
  j["timing"] = {{"dt_s", c14(sc.timing.dt)},
                 {"max_speed_m_s", c14(sc.timing.max_speed)},
                 {"max_accel_m_s2", c14(sc.timing.max_accel)},
                 {"max_angular_speed_deg_s", c14(rad2deg(sc.timing.max_angular_speed))},
                 {"max_angular_accel_deg_s2", c14(rad2deg(sc.timing.max_angular_accel))}};
  Json samples = Json::array();
  for (std::size_t k = 0; k < sc.trajectory.size(); ++k) {
    samples.push_back({{"x", pose_json(sc.trajectory.x[k], sc.dof)},
                       {"xd", pose_json(sc.trajectory.xd[k], sc.dof)},
                       {"xdd", pose_json(sc.trajectory.xdd[k], sc.dof)}});
  }
  j["trajectory"] = {{"dt_s", c14(sc.trajectory.dt)}, {"samples", samples}};
  j["interaction_space"] = cuboid_json(sc.interaction_space);
  Json inst = Json::array();
  for (const Cuboid& c : sc.installation_spaces) inst.push_back(cuboid_json(c));
  j["installation_spaces"] = inst;
  const Limits& l = sc.limits;
  j["limits"] = {{"lowest_ext_torque_Nm", c14(l.lowest_ext_torque)},
                 {"min_clamp_angle_deg", c14(rad2deg(l.min_clamp_angle))},
                 {"min_clamp_dist_m", c14(l.min_clamp_dist)},
                 {"max_act_torque_Nm", c14(l.max_act_torque)},
                 {"max_pos_err_m", c14(l.max_pos_err)},
                 {"max_cond", c14(l.max_cond)},
                 {"max_stress_util", c14(l.max_stress_util)}};
  j["platform_extra_mass_kg"] = c14(sc.platform_extra_mass);
  j["encoder_resolution_deg"] = c14(rad2deg(sc.encoder_resolution));
  j["sampling"] = {{"points_per_segment", sc.sampling.points_per_segment},
                   {"radial_step_deg", c14(rad2deg(sc.sampling.radial_step))},
                   {"platform_direction_count", sc.sampling.platform_direction_count},
                   {"force_magnitude_N", c14(sc.sampling.force_magnitude)}};
  j["platform_exclusion_length_m"] = c14(sc.platform_exclusion_length);
  return j.dump(1) + "\n";
}

Scenario scenario_from_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ScenarioError("", std::string("not valid JSON: ") + e.what());
  }
  const Reader root(j, "");
  if (root.at("format").string() != kFormat)
    throw ScenarioError("format", std::string("expected \"") + kFormat + "\"");
  const int version = root.at("version").integer();
  if (version != kVersion)
    throw ScenarioError("version", "unsupported version " + std::to_string(version) +
                                       ", this build reads version " + std::to_string(kVersion));
  Scenario sc;
  sc.name = root.at("name").string();
  sc.dof = root.at("dof").integer();
  if (sc.dof != 6 && sc.dof != 3) throw ScenarioError("dof", "must be 6 or 3");
  sc.plane_height = root.at("plane_height_m").number();

  const Reader refs = root.at("reference_points");
  for (std::size_t i = 0; i < refs.size(); ++i) sc.reference_points.push_back(refs.index(i).pose(sc.dof));
  const Reader wps = root.at("waypoints");
  for (std::size_t i = 0; i < wps.size(); ++i) sc.waypoints.push_back(wps.index(i).pose(sc.dof));

  const Reader timing = root.at("timing");
  sc.timing.dt = timing.at("dt_s").number();
  sc.timing.max_speed = timing.at("max_speed_m_s").number();
  sc.timing.max_accel = timing.at("max_accel_m_s2").number();
  sc.timing.max_angular_speed = deg2rad(timing.at("max_angular_speed_deg_s").number());
  sc.timing.max_angular_accel = deg2rad(timing.at("max_angular_accel_deg_s2").number());

  const Reader traj = root.at("trajectory");
  sc.trajectory.dt = traj.at("dt_s").number();
  const Reader samples = traj.at("samples");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Reader s = samples.index(k);
    sc.trajectory.x.push_back(s.at("x").pose(sc.dof));
    sc.trajectory.xd.push_back(s.at("xd").pose(sc.dof));
    sc.trajectory.xdd.push_back(s.at("xdd").pose(sc.dof));
  }

  sc.interaction_space = root.at("interaction_space").cuboid(CuboidRole::Interaction);
  const Reader inst = root.at("installation_spaces");
  for (std::size_t i = 0; i < inst.size(); ++i)
    sc.installation_spaces.push_back(inst.index(i).cuboid(CuboidRole::Installation));

  const Reader limits = root.at("limits");
  sc.limits.lowest_ext_torque = limits.at("lowest_ext_torque_Nm").number();
  sc.limits.min_clamp_angle = deg2rad(limits.at("min_clamp_angle_deg").number());
  sc.limits.min_clamp_dist = limits.at("min_clamp_dist_m").number();
  sc.limits.max_act_torque = limits.at("max_act_torque_Nm").number();
  sc.limits.max_pos_err = limits.at("max_pos_err_m").number();
  sc.limits.max_cond = limits.at("max_cond").number();
  sc.limits.max_stress_util = limits.at("max_stress_util").number();

  sc.platform_extra_mass = root.at("platform_extra_mass_kg").number();
  sc.encoder_resolution = deg2rad(root.at("encoder_resolution_deg").number());
  const Reader sampling = root.at("sampling");
  sc.sampling.points_per_segment = sampling.at("points_per_segment").integer();
  sc.sampling.radial_step = deg2rad(sampling.at("radial_step_deg").number());
  sc.sampling.platform_direction_count = sampling.at("platform_direction_count").integer();
  sc.sampling.force_magnitude = sampling.at("force_magnitude_N").number();
  sc.platform_exclusion_length = root.at("platform_exclusion_length_m").number();

  validate_scenario(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("", "cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_text(buf.str());
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  const std::string text = scenario_to_text(scenario);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << text;
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot move '" + tmp + "' to '" + path + "'");
}

}  // namespace prsynth
