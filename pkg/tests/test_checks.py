import numpy as np
import pytest

from mobknot.checks import CheckReport, run_checks, spectral_resample
from mobknot.curve import circle, ellipse


def test_report_kinds():
    rep = CheckReport()
    rep.add("residual", 1e-9, 1e-8)
    rep.add("control", 0.5, 0.01, kind="control")
    assert rep.passed
    rep.add("control_missed", 1e-4, 0.01, kind="control")
    assert not rep.passed and rep.to_json()["pass"] is False


def test_spectral_resample_exact_for_trig_polynomials():
    t = np.arange(32) / 32
    vals = np.cos(2 * np.pi * 3 * t) + 0.5 * np.sin(2 * np.pi * 5 * t)
    at = np.array([0.013, 0.77])
    exact = np.cos(2 * np.pi * 3 * at) + 0.5 * np.sin(2 * np.pi * 5 * at)
    assert np.allclose(spectral_resample(vals, at), exact, atol=1e-13)


def test_circle_report():
    rep = run_checks(circle(), count=3)
    failed = [k for k, c in rep.checks.items() if not c["pass"]]
    assert not failed
    assert {"circle_V", "circle_E", "circle_fhw", "circle_gradient"} <= set(rep.checks)


@pytest.mark.slow
def test_ellipse_report_seed_42():
    rep = run_checks(ellipse(), seed=42, count=25)
    failed = {k: c for k, c in rep.checks.items() if not c["pass"]}
    assert not failed
    assert rep.checks["phi0_param_dependence"]["kind"] == "control"
    assert rep.environment["seed"] == 42 and not rep.environment["circle"]
