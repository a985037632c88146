import math

import numpy as np
import pytest

import circadian_mfg as cm


@pytest.fixture(scope="module")
def reference():
    return cm.solve_ergodic()


def test_reference_solution(reference):
    assert reference.outcome == "converged"
    assert reference.n == 120
    mu = reference.mu
    assert mu.shape == (120,)
    assert mu.sum() * 2 * math.pi / 120 == pytest.approx(1.0, abs=1e-12)
    assert reference.lambda_ > 0


def test_config_overrides():
    flat = cm.solve_ergodic({"K": 0, "F": 0, "omega_0": "2pi/24"})
    assert np.allclose(flat.mu, 1 / (2 * math.pi), atol=1e-10)
    with pytest.raises(cm.ConfigError):
        cm.solve_ergodic({"bogus": 1})


def test_recovery_via_ergodic_control(reference):
    east = cm.recover_ergodic(reference, 9)
    assert east["tau_w_hours"] == pytest.approx(105.0)
    assert east["densities"].shape == (481, 120)
    assert east["mass_drift"] < 1e-12
    west = cm.recover_ergodic(reference, -9)
    assert east["f_total"] > west["f_total"]


def test_short_mfg(reference):
    run = cm.recover_mfg(reference, 9, T_hours=120)
    assert run["converged"]
    assert run["densities"].shape == (121, 120)


def test_w2_and_order_parameter():
    n = 120
    a = np.zeros(n)
    a[0] = n / (2 * math.pi)
    b = np.roll(a, 3)
    assert cm.circular_w2(a, a) == 0.0
    assert cm.circular_w2(a, b) == pytest.approx(3 * 2 * math.pi / n)
    assert abs(cm.order_parameter(a)) == pytest.approx(1.0)


def test_mathieu_and_closed_form():
    assert cm.mathieu_a0(-100.0) == pytest.approx(-180.25324915225121, rel=1e-12)
    sc = cm.special_case(0.01, 0.1)
    assert sc["q"] == pytest.approx(-100.0)
    ok, text = cm.oracle_check()
    assert ok
    assert "F=0" in text
