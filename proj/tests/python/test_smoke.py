import math

import numpy as np
import pytest

import prsynth


def test_families_and_schema():
    fams = prsynth.families()
    assert "RUS" in fams and "planar-RRR" in fams
    schema = prsynth.param_schema("RUS")
    assert schema[0]["name"] == "scale"
    assert all(s["lower"] < s["upper"] for s in schema)


def test_planar_ik_matches_closed_form():
    p = prsynth.schema_midpoint("planar-RRR")
    model = prsynth.make_model("planar-RRR", p)
    sc = prsynth.planar_scenario()
    x = np.asarray(sc.reference_points[0])
    st = prsynth.solve_ik(model, x, "uniform-out")
    assert st.q.shape == (model.legs * model.coords_per_leg,)
    jac = prsynth.jacobians(model, st)
    assert jac["J_xqa"].shape == (3, 3)
    assert jac["condition"] >= 1.0


def test_scenario_round_trip(tmp_path):
    sc = prsynth.benchmark()
    path = str(tmp_path / "b.json")
    prsynth.save_scenario(sc, path)
    again = prsynth.load_scenario(path)
    assert again.to_text() == sc.to_text()
    assert again.trajectory_samples == sc.trajectory_samples


def test_bad_scenario_names_field():
    text = prsynth.benchmark().to_text().replace('"limits"', '"limitz"')
    with pytest.raises(prsynth.ScenarioError, match="limits"):
        prsynth.scenario_from_text(text)


def test_stage_one_rejection_is_cheap():
    p = prsynth.schema_midpoint("RUS")
    p[2] = 0.4  # platform radius above the base radius
    p[1] = 0.1
    r = prsynth.evaluate("RUS", p, "uniform-out", prsynth.benchmark())
    assert not r["feasible"]
    assert r["failed_stage"] == "plausibility"
    assert r["fitness"][0] > 1e8


def test_dominance_and_hypervolume():
    assert prsynth.dominance([1, 1], [2, 2]) == "a"
    assert prsynth.dominance([1, 2], [2, 1]) == "incomparable"
    hv = prsynth.hypervolume_2d([(0.0, 1.0), (1.0, 0.0)], (2.0, 2.0))
    assert hv == pytest.approx(3.0)
    assert prsynth.segment_distance((0, 0, 0), (1, 0, 0), (0, 1, 1), (1, 1, 1)) == pytest.approx(math.sqrt(2))


def test_planar_synthesis_smoke():
    out = prsynth.synthesize(prsynth.planar_scenario(), "planar-RRR", particles=10, generations=4, seed=3)
    assert out["evaluations"] == 40
    assert out["archive_csv"].count("\n") == len(out["archive"]) + 1
