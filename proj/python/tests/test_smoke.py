import json
import math

import numpy as np
import pytest

import bimodal


def hover_state(z=1.0):
    x = np.zeros(13)
    x[2] = z
    x[6] = 1.0
    return x


def test_hover_is_an_equilibrium():
    p = bimodal.VehicleParams()
    t = p.mass * p.gravity / 2.0
    xdot = bimodal.derivative(hover_state(), np.array([t, t, 0.0, 0.0]), "aerial", 1, p)
    assert np.max(np.abs(xdot)) < 1e-12


def test_rk4_keeps_unit_quaternion():
    x = hover_state()
    x[10:13] = [0.3, -0.2, 0.5]
    y = bimodal.rk4_step(x, np.array([4.0, 4.2, 0.1, -0.05]), "aerial", 0.01)
    assert abs(np.linalg.norm(y[6:10]) - 1.0) < 1e-12


def test_normals_sum_to_total():
    p = bimodal.VehicleParams()
    x = hover_state(p.contact_height)
    left, right = bimodal.ground_normals(x, np.array([2.0, 2.0, 0.0, 0.0]), p)
    assert left + right == pytest.approx(p.mass * p.gravity - 4.0, rel=1e-12)


def test_width_ordering():
    r = bimodal.width_ratios()
    assert r["bicopter_longitudinal"] == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)
    assert min(r, key=r.get) == "bicopter_longitudinal"


def test_steering_ratio_default():
    assert bimodal.steering_ratio() == pytest.approx(0.07 / 0.012)


def test_bundled_scenarios_validate():
    names = bimodal.bundled_scenarios()
    assert "aerial_8shape" in names
    for n in names:
        bimodal.validate_scenario(bimodal.bundled_scenario_text(n))


def test_unknown_key_rejected():
    with pytest.raises(ValueError):
        bimodal.validate_scenario(json.dumps({"schema_version": 1, "vehical": {}}))


def test_short_track_run():
    cfg = {
        "schema_version": 1,
        "name": "short",
        "duration": 1.0,
        "trajectory": {"segments": [{"type": "line", "mode": "ground", "velocity": [0.5, 0.0, 0.0], "duration": 2.0}]},
    }
    r = bimodal.run_track(json.dumps(cfg))
    assert r["outcome"] == "completed"
    assert r["summary"]["rmse"] < 0.01
    assert r["csv"].startswith("t,ref_x")
