// Engineered designs that fail a chosen evaluation stage after passing all
// earlier ones. Even variants start from the spatial design, odd variants
// from the planar one.
#pragma once

#include "support/oracles.hpp"

namespace prsynth::test {

struct FailureCase {
  DesignPoint point;
  Scenario scenario;
  EvalConfig config;
  Stage expected = Stage::Objectives;
};

inline FailureCase base_case(int variant) {
  FailureCase c;
  const bool spatial = variant % 2 == 0;
  c.point = spatial ? feasible_rus() : planar_midpoint();
  c.scenario = spatial ? build_benchmark() : build_planar_scenario();
  c.config.trajectory_stride = 5;
  return c;
}

inline FailureCase failure_case(Stage stage, int variant) {
  FailureCase c = base_case(variant);
  c.expected = stage;
  const bool spatial = variant % 2 == 0;
  const double m = 1.0 + variant / 2;
  Scenario& sc = c.scenario;
  switch (stage) {
    case Stage::Plausibility:
      // platform radius above the base radius
      c.point.params[1] = spatial ? 0.1 : 0.2;
      c.point.params[2] = c.point.params[1] + 0.01 * m;
      break;
    case Stage::ReferenceIK: {
      VecX far = sc.reference_points.back();
      if (spatial) far[2] -= 2.0 + m;
      else far[0] += 2.0 + m;
      sc.reference_points.push_back(far);
      break;
    }
    case Stage::JointLimits:
      c.config.passive_range_limit = 0.01 * m;
      c.config.spherical_range_limit = 0.01 * m;
      break;
    case Stage::SelfCollision:
      c.config.base_options.clearance = 0.2 * m;
      break;
    case Stage::Installation: {
      const Vec3 centre = 0.5 * (sc.interaction_space.min_corner + sc.interaction_space.max_corner);
      const Vec3 half = Vec3::Constant(0.02 * m);
      sc.installation_spaces = {{centre - half, centre + half, CuboidRole::Installation}};
      break;
    }
    case Stage::TrajectoryIK: {
      VecX far = sc.waypoints.back();
      far[0] += 1.5 + 0.5 * m;
      sc.waypoints.push_back(far);
      sc.trajectory = trapezoid_trajectory(sc.waypoints, sc.timing, sc.dof);
      break;
    }
    case Stage::Condition:
      sc.limits.max_cond = 1.0 + 0.1 * m;
      break;
    case Stage::PositionError:
      sc.limits.max_pos_err = 1e-9 * m;
      break;
    case Stage::DesignStress:
      sc.limits.max_stress_util = 1e-6 * m;
      break;
    case Stage::Objectives:
      break;
  }
  return c;
}

}  // namespace prsynth::test
