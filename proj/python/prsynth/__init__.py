"""Dimensional synthesis of fully parallel robots."""

from ._core import (
    KinematicsError,
    KinematicState,
    RobotModel,
    Scenario,
    ScenarioError,
    benchmark,
    dominance,
    evaluate,
    families,
    hypervolume_2d,
    jacobians,
    load_scenario,
    make_model,
    param_schema,
    planar_scenario,
    save_scenario,
    scenario_from_text,
    schema_midpoint,
    segment_distance,
    solve_ik,
    solve_ik_from,
    synthesize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
