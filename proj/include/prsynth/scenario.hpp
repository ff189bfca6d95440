#pragma once

#include "prsynth/geometry.hpp"
#include "prsynth/objectives.hpp"
#include "prsynth/trajectory.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace prsynth {

/// Hard and soft thresholds on the target values.
struct Limits {
  double lowest_ext_torque = 5.0;           // N m, f1 must exceed
  double min_clamp_angle = deg2rad(30.0);   // rad, f2 must exceed
  double min_clamp_dist = 0.03;             // m, f3 must exceed
  double max_act_torque = 30.0;             // N m, f5 must stay below
  double max_pos_err = 500e-6;              // m
  double max_cond = 500.0;
  double max_stress_util = 0.5;
};

struct TimingLimits {
  double dt = 0.01;                 // s
  double max_speed = 1.0;           // m/s
  double max_accel = 5.0;           // m/s^2
  double max_angular_speed = 2.0;   // rad/s, on the Euler-rate norm
  double max_angular_accel = 10.0;  // rad/s^2
};

struct Scenario {
  std::string name;
  int dof = 6;
  double plane_height = 1.2;  // m, planar scenarios only
  std::vector<VecX> reference_points;
  std::vector<VecX> waypoints;
  TimingLimits timing;
  Trajectory trajectory;
  Cuboid interaction_space;
  std::vector<Cuboid> installation_spaces;
  Limits limits;
  double platform_extra_mass = 2.0;                    // kg
  double encoder_resolution = 2.0 * kPi / 65536.0;     // rad, 16 bit
  ContactSamplingPlan sampling;
  double platform_exclusion_length = 0.1;              // m
};

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}
  /// Field path of the offending entry, e.g. "trajectory.samples[12].xd".
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Point-to-point trapezoidal profiles through the waypoints, stopping at
/// each one. Phase durations are rounded up to whole time steps.
Trajectory trapezoid_trajectory(const std::vector<VecX>& waypoints, const TimingLimits& timing,
                                int dof);

/// Throws ScenarioError naming the first sample whose velocity or
/// acceleration disagrees with the positions.
void check_trajectory_consistency(const Trajectory& traj, double tolerance = 1e-6);

/// Pick-and-place benchmark of the spatial robots.
Scenario build_benchmark();
/// Planar test scenario in the plane z = 1.2 m.
Scenario build_planar_scenario();

/// Full validation: dimensions, boxes, limits, trajectory consistency.
void validate_scenario(const Scenario& scenario);

std::string scenario_to_text(const Scenario& scenario);
Scenario scenario_from_text(const std::string& text);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

/// Rounds to 14 significant digits, the precision kept in scenario files.
double canonical_number(double v);

}  // namespace prsynth
