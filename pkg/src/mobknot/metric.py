"""Weighted inner products on normal fields and the weight functions Phi.

A weight Phi(f, t) gives a Möbius invariant inner product exactly when
Phi(T o f, t) = |T'(f(t))|^-6 Phi(f, t).  Four weights are provided: V^3,
Psi^3 for a conformal-angle kernel mu, |f'|^-3 (not parametrization
independent), and the cubed conformal arc-length density.
"""
from collections import OrderedDict
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from .curve import KnotError, evaluate
from .moebius import transform_curve

ORTHO_TOL = 1e-10
KAPPA_TOL = 1e-6
WEIGHT_KINDS = ("V_cubed", "psi_cubed", "phi0", "conformal_arclength")


@dataclass(frozen=True, eq=False)
class TangentField:
    vectors: np.ndarray
    base: object

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.shape != self.base.points.shape:
            raise KnotError("tangent field must have one vector per grid point")
        dots = np.abs(np.sum(v * self.base.d1, axis=1))
        scale = np.linalg.norm(v, axis=1) * self.base.speed
        if np.any(dots > ORTHO_TOL * np.maximum(scale, 1e-300) + 1e-300):
            i = int(np.argmax(dots - ORTHO_TOL * scale))
            raise KnotError("field is not normal to the knot at index %d" % i, index=i)
        object.__setattr__(self, "vectors", v)


@dataclass(frozen=True, eq=False)
class WeightFunction:
    kind: str
    values: np.ndarray
    param_independent: bool = True
    flags: np.ndarray = field(default=None, repr=False)
    grid_key: tuple = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class FrenetData:
    kappa: np.ndarray
    tau: np.ndarray
    kappa_prime: np.ndarray
    degenerate: np.ndarray


def project_normal(raw, f):
    """P_{f'^perp} applied pointwise."""
    raw = np.asarray(raw, dtype=float)
    tau = f.tangent
    vec = raw - np.sum(raw * tau, axis=1)[:, None] * tau
    vec -= np.sum(vec * tau, axis=1)[:, None] * tau
    # what is left of a tangential input is rounding, not a normal direction
    lost = np.linalg.norm(vec, axis=1) <= 1e-12 * np.linalg.norm(raw, axis=1)
    vec[lost] = 0.0
    return TangentField(vec, f)


def _check_base(u, v):
    if u.base is not v.base and u.base.curve.content_key() != v.base.curve.content_key():
        raise KnotError("tangent fields live on different knots")


def l2_inner(u, v):
    """(u, v)_f = int (u, v) |f'| dt."""
    _check_base(u, v)
    return float(np.sum(np.sum(u.vectors * v.vectors, axis=1) * u.base.speed) * u.base.h)


def weighted_inner(u, v, phi):
    """<u, v>_Phi = int (u, v) Phi |f'| dt."""
    _check_base(u, v)
    if phi.grid_key is not None and phi.grid_key != u.base.curve.content_key():
        raise KnotError("weight was computed on a different knot")
    dots = np.sum(u.vectors * v.vectors, axis=1)
    return float(np.sum(dots * phi.values * u.base.speed) * u.base.h)


def frenet(f, kappa_tol=KAPPA_TOL):
    """Curvature, torsion and d(kappa)/ds from exact spectral derivatives.

    Torsion is set to 0 and flagged where kappa < kappa_tol / L; there the
    arc-length derivative of kappa falls back to spectral differentiation
    of the kappa grid.
    """
    a, b, c = f.d1, f.d2, f.d3
    sp = f.speed
    cr = np.cross(a, b)
    crn = np.linalg.norm(cr, axis=1)
    kappa = crn / sp ** 3
    degenerate = kappa < kappa_tol / f.total_len
    safe = np.where(degenerate, 1.0, crn)
    tau = np.where(degenerate, 0.0, np.sum(cr * c, axis=1) / safe ** 2)
    dk_dt = (np.sum(cr * np.cross(a, c), axis=1) / (safe * sp ** 3)
             - 3 * crn * np.sum(a * b, axis=1) / sp ** 5)
    if degenerate.any():
        k = np.fft.rfftfreq(f.n, 1.0 / f.n)
        spectral = np.fft.irfft(np.fft.rfft(kappa) * 2j * np.pi * k, n=f.n)
        dk_dt = np.where(degenerate, spectral, dk_dt)
    return FrenetData(kappa, tau, dk_dt / sp, degenerate)


def frenet_at(curve, t, kappa_tol=KAPPA_TOL):
    """Frenet data of a KnotCurve at arbitrary parameters t."""
    d1, d2, d3 = (curve(t, k) for k in (1, 2, 3))
    speed = np.linalg.norm(d1, axis=1)
    length = evaluate(curve, order=1).total_len
    return frenet(SimpleNamespace(d1=d1, d2=d2, d3=d3, speed=speed, total_len=length,
                                  n=len(t)), kappa_tol)


def conformal_density(fd):
    """d(rho)/ds = (kappa'^2 + kappa^2 tau^2)^(1/4)."""
    return (fd.kappa_prime ** 2 + fd.kappa ** 2 * fd.tau ** 2) ** 0.25


def weight_V3(profile):
    return WeightFunction("V_cubed", np.asarray(profile.v) ** 3, True,
                          grid_key=profile.grid_key)


def weight_psi_mu(f, mu):
    """(Psi)^3 with Psi(s) = int mu(theta)/|chord|^2 |f'(t)| dt."""
    from .conformal import kernel_potential

    return WeightFunction("psi_cubed", kernel_potential(f, mu) ** 3, True,
                          grid_key=f.curve.content_key())


def weight_phi0(f):
    """|f'|^-3: Möbius covariant but tied to the parametrization."""
    return WeightFunction("phi0", f.speed ** -3.0, False, grid_key=f.curve.content_key())


def weight_conformal(fd, grid_key=None):
    """(kappa'^2 + kappa^2 tau^2)^(3/4), torsion term dropped at flagged points."""
    vals = (fd.kappa_prime ** 2 + fd.kappa ** 2 * fd.tau ** 2) ** 0.75
    return WeightFunction("conformal_arclength", vals, True, flags=fd.degenerate,
                          grid_key=grid_key)


_CACHE = OrderedDict()
_CACHE_SIZE = 64


def weight(kind, f, mu=None):
    """Build (or fetch from the content-keyed cache) a weight on knot ``f``."""
    from .conformal import potential_V_cosine
    from .energy import MuKernel

    key = (f.curve.content_key(), kind, None if mu is None else mu.key())
    hit = _CACHE.get(key)
    if hit is not None:
        _CACHE.move_to_end(key)
        return hit
    if kind == "V_cubed":
        out = weight_V3(potential_V_cosine(f))
    elif kind == "psi_cubed":
        out = weight_psi_mu(f, mu if mu is not None else MuKernel("abs_sine"))
    elif kind == "phi0":
        out = weight_phi0(f)
    elif kind == "conformal_arclength":
        out = weight_conformal(frenet(f), grid_key=f.curve.content_key())
    else:
        raise KnotError("unknown weight kind %r" % kind)
    _CACHE[key] = out
    if len(_CACHE) > _CACHE_SIZE:
        _CACHE.popitem(last=False)
    return out


def check_weight_condition(phi_builder, T, f):
    """|Phi(T o f, t_i) |T'(f(t_i))|^6 - Phi(f, t_i)| on the grid."""
    image = evaluate(transform_curve(T, f.curve))
    lhs = phi_builder(image).values * T.conformal_factor(f.points) ** 6
    return np.abs(lhs - phi_builder(f).values)
