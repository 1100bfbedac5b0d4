import json
import math
from pathlib import Path

import numpy as np
import pytest

import mbsa

ROOT = Path(__file__).resolve().parents[2]


def sine(g, x):
    return np.sin(15 * g) + 8 * g + 3


def test_scalar_problem_converges_to_the_root():
    r = mbsa.run_mbsa(sine, lambda g, x: 6 * g, lambda w, x: w / 6, np.zeros(1), np.zeros(1),
                      beta=0.5, tol=1e-8, initial_target=np.zeros(1))
    assert r["status"] == "converged"
    assert r["iterations"] == 146
    assert abs(sine(r["estimate"], None)[0]) < 1e-8
    norms = r["error_norm"]
    assert len(norms) == r["iterations"]


def test_demo_gradient_descent_stalls():
    d = mbsa.demo()
    assert d["mbsa"]["status"] == "converged"
    assert abs(d["gd_f"]) > 0.5


@pytest.mark.parametrize("beta,status", [(0.5, "converged"), (1.9, "converged"), (2.1, "diverged")])
def test_step_size(beta, status):
    r = mbsa.run_mbsa(lambda g, x: g, lambda g, x: g, lambda w, x: w, np.zeros(1), np.ones(1),
                      beta=beta, max_iter=2000, initial_target=np.zeros(1))
    assert r["status"] == status


def test_invalid_step_raises():
    with pytest.raises(mbsa.ConfigError):
        mbsa.run_mbsa(lambda g, x: g, lambda g, x: g, lambda w, x: w, np.zeros(1), np.ones(1), beta=0.0)
    assert issubclass(mbsa.ConfigError, mbsa.Error)


def test_condition_check():
    m, pd, _ = mbsa.check_convergence_condition(lambda g, x: 2 * g, lambda g, x: -g, np.ones(1), np.zeros(1))
    assert not pd
    assert m[0, 0] == pytest.approx(-2.0, rel=1e-8)


def test_beam_quantities():
    assert mbsa.phi_bar() == pytest.approx(0.25, abs=1e-3)
    x = np.linspace(0.0, 1.0, 2049)
    assert mbsa.delta_omega_sq(1.0, 2.0, 1.0, x, np.full_like(x, 3.0)) == pytest.approx(1.5, rel=1e-9)
    lam = mbsa.mode_eigenvalue(1)
    assert 1 + math.cos(lam) * math.cosh(lam) == pytest.approx(0.0, abs=1e-9)


def test_pair_stiffness_closed_forms():
    c, n, g = 100.0, 3.5, 2.0
    assert mbsa.pair_stiffness(0.0, g, c, n) == pytest.approx(-c * n * (n + 1) / g ** (n + 2), rel=1e-12)
    assert mbsa.pair_stiffness(g, 0.0, c, n) == pytest.approx(c * n / g ** (n + 2), rel=1e-12)


def test_calibration_round_trip():
    gaps = np.linspace(0.02, 0.06, 16)
    omega = np.sqrt([mbsa.single_magnet_omega_sq(g) for g in gaps])
    r = mbsa.calibrate(gaps, omega)
    assert r["C"] == pytest.approx(67981.0, rel=1e-3)
    assert r["n"] == pytest.approx(3.35638, abs=1e-3)


def test_error_report():
    r = mbsa.error_report(np.array([1.1, 2.2]), np.array([1.0, 2.0]))
    assert r["percent"] == pytest.approx([10.0, 10.0])
    assert r["median"] == pytest.approx(10.0)


def test_magnetic_scenario(tmp_path):
    report = mbsa.simulate(ROOT / "scenarios" / "magnetic.json", out=tmp_path)
    assert report["ok"]
    assert report["errors"]["median"] <= 5.0
    assert json.loads((tmp_path / "report.json").read_text()) == report


def test_bad_scenario(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"type": "nothing"}')
    with pytest.raises(mbsa.ConfigError):
        mbsa.validate_scenario(str(bad))
