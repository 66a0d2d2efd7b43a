import json

import numpy as np
import pytest

import ac_control as ac


def small():
    c = ac.Config()
    c.cells = 40
    return c


def test_nodes_span_the_interval():
    x = ac.nodes(small())
    assert x.shape == (41,)
    assert x[0] == -1.0 and x[-1] == 1.0
    assert np.all(np.diff(x) > 0)


def test_state_solve_shapes_and_ledger():
    r = ac.solve_state(small())
    assert r["w"].shape == (21, 41)
    assert r["xi"].shape == (20, 41)
    assert r["ledger_passed"]
    assert r["cost"] > 0


def test_controls_are_checked_for_shape():
    with pytest.raises(Exception):
        ac.solve_state(small(), np.zeros((3, 3)))


def test_gradient_matches_a_difference_quotient():
    c = small()
    u = np.zeros((20, 41))
    cost, grad, _ = ac.gradient(c, u)
    h = np.random.default_rng(0).standard_normal(u.shape)
    lam = 1e-6
    plus, _, _ = ac.gradient(c, u + lam * h)
    minus, _, _ = ac.gradient(c, u - lam * h)
    mass = np.full(41, 2.0 / 40)
    mass[[0, -1]] *= 0.5
    slope = float(np.sum(grad * h * mass))
    assert (plus - minus) / (2 * lam) == pytest.approx(slope, rel=1e-5)
    assert cost > 0


def test_optimizer_and_gradcheck():
    c = small()
    r = ac.optimize(c)
    assert r["status"] == "converged"
    assert r["stationarity"] <= 1e-6
    g = ac.gradcheck(c, dirs=3, lam=1e-5)
    assert g["max_relative_error"] <= 1e-5


def test_config_errors_map_to_python_exceptions():
    with pytest.raises(ac.ConfigError, match="unknown key"):
        ac.Config.from_text("[grid]\nwidth = 2\n")
    c = small()
    c.steps = 10
    with pytest.raises(ac.AssumptionError, match="A5"):
        ac.solve_state(c)


def test_config_text_round_trip():
    c = small()
    c.epsilon = 0.1
    back = ac.Config.from_text(c.to_text())
    assert back.to_text() == c.to_text()
    assert json.loads(c.to_json())["regularization"]["epsilon"] == 0.1


def test_single_check():
    assert ac.check_count() == 11
    r = ac.run_check(ac.Config(), 9)
    assert r["name"] == ac.check_name(9)
    assert r["passed"]
