import numpy as np
import pytest

from mobknot.conformal import potential_V_cosine
from mobknot.curve import KnotError, ReparamMap, circle, evaluate, reparametrize
from mobknot.energy import MuKernel
from mobknot.metric import (TangentField, WeightFunction, check_weight_condition, frenet,
                            l2_inner, project_normal, weight, weight_conformal, weight_phi0,
                            weight_psi_mu, weight_V3, weighted_inner)
from mobknot.moebius import Homothety, MoebiusTransform, pushforward, random_compact_preserving

TWO_PI = 2 * np.pi
SINE = MuKernel("abs_sine")

BUILDERS = {
    "V3": lambda f: weight_V3(potential_V_cosine(f)),
    "psi_sin": lambda f: weight_psi_mu(f, SINE),
    "conformal": lambda f: weight_conformal(frenet(f)),
    "phi0": weight_phi0,
}


def torus_frenet_fd(t, h=1e-3):
    """Curvature, torsion and d(kappa)/ds of the (2,3) torus knot by finite differences."""
    def g(x):
        th = TWO_PI * x
        return np.array([(2 + np.cos(3 * th)) * np.cos(2 * th),
                         (2 + np.cos(3 * th)) * np.sin(2 * th), np.sin(3 * th)])

    def derivs(x):
        pts = np.array([g(x + k * h) for k in range(-3, 4)])
        d1 = (-pts[0] + 9 * pts[1] - 45 * pts[2] + 45 * pts[4] - 9 * pts[5] + pts[6]) / (60 * h)
        d2 = (2 * pts[0] - 27 * pts[1] + 270 * pts[2] - 490 * pts[3] + 270 * pts[4]
              - 27 * pts[5] + 2 * pts[6]) / (180 * h * h)
        d3 = (pts[0] - 8 * pts[1] + 13 * pts[2] - 13 * pts[4] + 8 * pts[5] - pts[6]) / (8 * h ** 3)
        return d1, d2, d3

    def kappa(x):
        d1, d2, _ = derivs(x)
        return np.linalg.norm(np.cross(d1, d2)) / np.linalg.norm(d1) ** 3

    d1, d2, d3 = derivs(t)
    cr = np.cross(d1, d2)
    tau = cr @ d3 / (cr @ cr)
    dk = (kappa(t + h) - kappa(t - h)) / (2 * h) / np.linalg.norm(d1)
    return kappa(t), tau, dk


def test_frenet_circle():
    for r in (1.0, 0.25):
        fd = frenet(evaluate(circle(radius=r, normal=(1, 2, 2))))
        assert np.allclose(fd.kappa, 1 / r, rtol=1e-12)
        assert np.max(np.abs(fd.tau)) < 1e-8 / r
        assert np.max(np.abs(fd.kappa_prime)) < 1e-8 / r ** 2


def test_frenet_torus_against_finite_differences(torus):
    fd = frenet(torus)
    for i in (0, 19, 101, 200):
        k, tau, dk = torus_frenet_fd(i / 256)
        assert fd.kappa[i] == pytest.approx(k, abs=1e-4)
        assert fd.tau[i] == pytest.approx(tau, abs=1e-4)
        assert fd.kappa_prime[i] == pytest.approx(dk, abs=1e-4)


def test_frenet_degenerate_fallback(torus):
    """Points flagged as straight get tau = 0 and a spectral d(kappa)/ds."""
    exact = frenet(torus)
    fd = frenet(torus, kappa_tol=1e6)
    assert fd.degenerate.all() and np.all(fd.tau == 0)
    assert np.allclose(fd.kappa_prime, exact.kappa_prime, atol=1e-8)


def test_project_normal_examples(circle_knot, torus):
    assert np.max(np.abs(project_normal(torus.d1, torus).vectors)) < 1e-12
    normal = project_normal(np.random.default_rng(0).normal(size=(256, 3)), torus)
    assert np.allclose(project_normal(normal.vectors, torus).vectors, normal.vectors)
    assert np.allclose(project_normal(circle_knot.d2, circle_knot).vectors, circle_knot.d2)


def test_tangent_field_rejects_tangential(torus):
    with pytest.raises(KnotError):
        TangentField(torus.d1, torus)
    with pytest.raises(KnotError):
        TangentField(np.zeros((10, 3)), torus)


def test_l2_inner_examples(circle_knot, torus):
    ez = project_normal(np.tile([0.0, 0, 1], (256, 1)), circle_knot)
    assert l2_inner(ez, ez) == pytest.approx(TWO_PI)
    rng = np.random.default_rng(1)
    u, v = (project_normal(rng.normal(size=(256, 3)), torus) for _ in range(2))
    assert l2_inner(u, v) == pytest.approx(l2_inner(v, u))
    with pytest.raises(KnotError):
        l2_inner(u, ez)


def test_l2_scaling_under_homothety(torus):
    rng = np.random.default_rng(2)
    u, v = (project_normal(rng.normal(size=(256, 3)), torus) for _ in range(2))
    k = 2.0
    H = MoebiusTransform((Homothety(k),))
    pu, pv = pushforward(H, torus, u), pushforward(H, torus, v)
    lhs = l2_inner(TangentField(pu.vectors, pu.base), TangentField(pv.vectors, pv.base))
    assert lhs == pytest.approx(k ** 3 * l2_inner(u, v), rel=1e-10)
    # an unweighted product is not invariant: the k^3 shows up in full
    ones = WeightFunction("unit", np.ones(256))
    pu_f = TangentField(pu.vectors, pu.base)
    pv_f = TangentField(pv.vectors, pv.base)
    assert weighted_inner(pu_f, pv_f, ones) / weighted_inner(u, v, ones) == pytest.approx(
        8.0, rel=0.01)


@pytest.mark.parametrize("name", ["V3", "psi_sin", "conformal", "phi0"])
def test_weight_condition(name, presets):
    build = BUILDERS[name]
    for f in presets.values():
        base = build(f).values
        for seed in (1, 2):
            T = random_compact_preserving(seed, f)
            res = check_weight_condition(build, T, f)
            assert np.max(res / (1 + np.abs(base))) < 1e-5


@pytest.mark.parametrize("name", ["V3", "phi0"])
def test_weighted_inner_invariance(name, ellipse_knot):
    rng = np.random.default_rng(3)
    u, v = (project_normal(rng.normal(size=(256, 3)), ellipse_knot) for _ in range(2))
    phi = BUILDERS[name](ellipse_knot)
    ref = weighted_inner(u, v, phi)
    for seed in range(3):
        T = random_compact_preserving(seed, ellipse_knot)
        pu, pv = pushforward(T, ellipse_knot, u), pushforward(T, ellipse_knot, v)
        img = pu.base
        val = weighted_inner(TangentField(pu.vectors, img), TangentField(pv.vectors, img),
                             BUILDERS[name](img))
        assert val == pytest.approx(ref, rel=1e-5)


def test_phi0_inner_is_speed_weighted(ellipse_knot):
    rng = np.random.default_rng(4)
    u, v = (project_normal(rng.normal(size=(256, 3)), ellipse_knot) for _ in range(2))
    direct = np.sum(np.sum(u.vectors * v.vectors, axis=1) / ellipse_knot.speed ** 2) / 256
    assert weighted_inner(u, v, weight_phi0(ellipse_knot)) == pytest.approx(direct, rel=1e-12)


def test_weights_vanish_on_circle(circle_knot):
    rng = np.random.default_rng(5)
    u = project_normal(rng.normal(size=(256, 3)), circle_knot)
    for name in ("V3", "psi_sin", "conformal"):
        phi = BUILDERS[name](circle_knot)
        assert np.max(np.abs(phi.values)) < 1e-12
        assert abs(weighted_inner(u, u, phi)) < 1e-10


def test_weights_positive_off_circle(ellipse_knot, torus):
    assert np.min(BUILDERS["V3"](ellipse_knot).values) > 0
    assert np.min(BUILDERS["psi_sin"](torus).values) > 0


def test_psi_one_minus_cos_is_V3(torus):
    a = weight_psi_mu(torus, MuKernel("one_minus_cos")).values
    b = BUILDERS["V3"](torus).values
    assert np.allclose(a, b, rtol=1e-8)


def test_conformal_planar_is_kappa_prime(ellipse_knot, wobbly):
    for f in (ellipse_knot, wobbly):
        fd = frenet(f)
        assert np.allclose(weight_conformal(fd).values, np.abs(fd.kappa_prime) ** 1.5,
                           rtol=1e-10, atol=1e-14)


def test_parametrization_dependence(torus):
    rho = ReparamMap(0.3, 0.7)
    g = evaluate(reparametrize(torus.curve, rho))
    # weights compared at the same points of the image: |f'|^-3 changes, V^3 does not
    x = np.linspace(0, 1, 256, endpoint=False)
    at = rho(x)
    ref_phi0 = np.linalg.norm(torus.curve(at, 1), axis=1) ** -3
    assert np.max(np.abs(weight_phi0(g).values - ref_phi0) / ref_phi0) > 0.1
    assert not weight_phi0(g).param_independent
    assert BUILDERS["V3"](g).param_independent


def test_weight_dispatch_and_cache(torus):
    a = weight("V_cubed", torus)
    assert weight("V_cubed", torus) is a
    assert weight("psi_cubed", torus).kind == "psi_cubed"
    with pytest.raises(KnotError):
        weight("bogus", torus)
