import numpy as np
import pytest
from scipy.integrate import quad

from mobknot.conformal import potential_V_cosine, potential_V_hadamard
from mobknot.curve import KnotError, ReparamMap, circle, evaluate, reparametrize
from mobknot.energy import (MuKernel, energy_E_cosine, energy_E_fhw, energy_E_from_V,
                            energy_E_mu, energy_from_weight, fhw_diagonal)
from mobknot.metric import WeightFunction, weight_psi_mu, weight_V3
from mobknot.moebius import Homothety, MoebiusTransform, random_compact_preserving, transform_curve

SINE = MuKernel("abs_sine")
ACYC = MuKernel("acyclicity")


def circle_fhw_oracle():
    """4 pi int_0^pi (1/(4 sin^2(x/2)) - 1/x^2) dx for the unit circle."""
    g = lambda x: 1 / (4 * np.sin(x / 2) ** 2) - 1 / x ** 2 if x > 1e-4 else 1 / 12 + x * x / 240
    return 4 * np.pi * quad(g, 0, np.pi, epsabs=1e-14, epsrel=1e-14)[0]


def test_circle_fhw_oracle_is_four():
    assert circle_fhw_oracle() == pytest.approx(4.0, abs=1e-12)


def test_circle_energies(circle_knot):
    assert abs(energy_E_cosine(circle_knot).value) < 1e-8
    fhw = energy_E_fhw(circle_knot)
    assert fhw.diagnostics["moebius_energy"] == pytest.approx(circle_fhw_oracle(), abs=1e-6)
    assert abs(fhw.value) < 1e-6
    assert abs(energy_E_from_V(potential_V_cosine(circle_knot), circle_knot).value) < 1e-8


def test_fhw_diagonal_on_unit_circle(circle_knot):
    x = 1e-3
    taylor = 1 / (4 * np.sin(x / 2) ** 2) - 1 / x ** 2
    assert taylor == pytest.approx(1 / 12, abs=1e-6)
    assert np.allclose(fhw_diagonal(circle_knot), (2 * np.pi) ** 2 / 12, rtol=1e-10)


def test_routes_agree(presets):
    for f in presets.values():
        cos = energy_E_cosine(f).value
        assert energy_E_fhw(f).value == pytest.approx(cos, rel=1e-5)
        assert energy_E_from_V(potential_V_cosine(f), f).value == pytest.approx(cos, rel=1e-8)
        assert energy_E_from_V(potential_V_hadamard(f), f).value == pytest.approx(cos, rel=1e-6)


def test_energy_positive_off_circles(presets):
    assert all(energy_E_cosine(f).value > 0.1 for f in presets.values())


def test_from_V_rejects_foreign_profile(ellipse_knot, torus):
    with pytest.raises(KnotError):
        energy_E_from_V(potential_V_cosine(torus), ellipse_knot)


def test_scale_invariance(torus):
    big = evaluate(transform_curve(MoebiusTransform((Homothety(7.0),)), torus.curve))
    assert energy_E_cosine(big).value == pytest.approx(energy_E_cosine(torus).value, rel=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_moebius_invariance(ellipse_knot, seed):
    T = random_compact_preserving(seed, ellipse_knot)
    img = evaluate(transform_curve(T, ellipse_knot.curve))
    for energy in (lambda f: energy_E_cosine(f).value, lambda f: energy_E_mu(f, SINE),
                   lambda f: energy_E_mu(f, ACYC)):
        assert energy(img) == pytest.approx(energy(ellipse_knot), rel=1e-5)


def test_parametrization_invariance(torus):
    g = evaluate(reparametrize(torus.curve, ReparamMap(0.35, 2.0)))
    assert energy_E_cosine(g).value == pytest.approx(energy_E_cosine(torus).value, rel=1e-6)
    assert energy_E_mu(g, SINE) == pytest.approx(energy_E_mu(torus, SINE), rel=1e-6)


def test_E_mu_one_minus_cos_is_E(presets):
    for f in presets.values():
        assert energy_E_mu(f, MuKernel("one_minus_cos")) == pytest.approx(
            energy_E_cosine(f).value, rel=1e-8)


def test_E_mu_circle(circle_knot):
    assert abs(energy_E_mu(circle_knot, SINE)) < 1e-7
    assert abs(energy_E_mu(circle_knot, ACYC)) < 1e-7


def test_kernel_values():
    th = np.linspace(0, np.pi, 7)
    assert np.allclose(SINE(th), np.abs(np.sin(th)))
    assert np.allclose(ACYC(th), np.pi / 4 * (th - th * np.sin(th)))
    assert SINE.slope0 == 1 and ACYC.slope0 == pytest.approx(np.pi / 4)


def test_custom_kernel_table(ellipse_knot):
    th = np.linspace(0, np.pi, 2001)
    custom = MuKernel("custom", th, np.sin(th))
    assert energy_E_mu(ellipse_knot, custom) == pytest.approx(
        energy_E_mu(ellipse_knot, SINE), rel=1e-3)


@pytest.mark.parametrize("mu", [lambda t: t ** 0.4, lambda t: np.sqrt(t)])
def test_custom_kernel_too_steep(mu):
    th = np.linspace(0, np.pi, 50)
    with pytest.raises(KnotError, match="grows like"):
        MuKernel("custom", th, mu(th))


def test_custom_kernel_validation():
    th = np.linspace(0, np.pi, 10)
    with pytest.raises(KnotError):
        MuKernel("custom", th, np.cos(th))
    with pytest.raises(KnotError):
        MuKernel("custom", th[:-1], np.sin(th[:-1]))
    with pytest.raises(KnotError):
        MuKernel("bogus")


def test_energy_from_weight(presets, circle_knot):
    for f in presets.values():
        prof = potential_V_cosine(f)
        assert energy_from_weight(f, weight_V3(prof)) == pytest.approx(
            energy_E_from_V(prof, f).value, rel=1e-12)
    assert abs(energy_from_weight(circle_knot, weight_V3(potential_V_cosine(circle_knot)))) < 1e-7


def test_energy_from_psi_weight_is_invariant(ellipse_knot):
    base = energy_from_weight(ellipse_knot, weight_psi_mu(ellipse_knot, SINE))
    assert base == pytest.approx(energy_E_mu(ellipse_knot, SINE), rel=1e-12)
    T = random_compact_preserving(21, ellipse_knot)
    img = evaluate(transform_curve(T, ellipse_knot.curve))
    assert energy_from_weight(img, weight_psi_mu(img, SINE)) == pytest.approx(base, rel=1e-5)


def test_energy_from_weight_rejects_negative(ellipse_knot):
    bad = WeightFunction("V_cubed", -np.ones(ellipse_knot.n))
    with pytest.raises(KnotError):
        energy_from_weight(ellipse_knot, bad)


def test_radius_does_not_matter():
    for r in (0.01, 100.0):
        assert abs(energy_E_cosine(evaluate(circle(radius=r))).value) < 1e-8
