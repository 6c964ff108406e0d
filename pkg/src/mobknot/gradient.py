"""The L2 gradient G_E of the energy, its u1..u4 split, and the weighted gradient.

Two independent routes are provided.  ``grad_E_pv`` evaluates the principal
value integral on the grid: the integrand has a simple pole at t = s, so a
punctured trapezoid sum plus the constant Laurent coefficient at the pole
is spectrally accurate (subtract a multiple of pi cot(pi (t-s)), whose
punctured sum vanishes).  ``grad_E_hadamard`` assembles G_E = 2(u1+u2+u3+u4)
with u1 taken from an epsilon-extrapolated finite part.
"""
from dataclasses import dataclass, field

import numpy as np

from .conformal import potential_V_cosine
from .curve import KnotError, evaluate, from_samples, roundness
from .energy import energy_E_cosine
from .finite_part import Ladder, curvature_vector, finite_parts
from .metric import TangentField
from .moebius import MoebiusTransform, SphereInversion, transform_curve

CIRCLE_TOL = 1e-6
PHI_FLOOR = 1e-12
FD_SCALE = 1e-5
UNIT_INVERSION = MoebiusTransform((SphereInversion((0.0, 0.0, 0.0), 1.0),))


class DegenerateWeightError(KnotError):
    """Phi is below the floor on a knot that is not round."""

    def __init__(self, message, indices):
        super().__init__(message, index=int(indices[0]) if len(indices) else None)
        self.indices = np.asarray(indices)


@dataclass(frozen=True, eq=False)
class GradientField:
    g: TangentField
    route: str
    residual: np.ndarray = field(default=None, repr=False)

    @property
    def vectors(self):
        return self.g.vectors

    @property
    def base(self):
        return self.g.base


@dataclass(frozen=True, eq=False)
class UComponents:
    """u1..u4 at one or several grid points (last axis has length 3)."""

    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    u4: np.ndarray
    flagged: np.ndarray = field(default=None, repr=False)

    def total(self):
        return self.u1 + self.u2 + self.u3 + self.u4

    def gradient(self):
        return 2 * self.total()


def _projector(tau):
    return np.eye(3) - tau[..., :, None] * tau[..., None, :]


def _regular_part(f):
    """Constant Laurent coefficient of the p.v. integrand at t = s, per grid point."""
    a, b, c, d = f.d1, f.d2, f.d3, f.d4
    aa = np.sum(a * a, axis=1)
    alpha = np.sum(a * b, axis=1) / aa
    beta = (np.sum(b * b, axis=1) / 4 + np.sum(a * c, axis=1) / 3) / aa
    P = _projector(f.tangent)
    pb, pc, pd = (np.einsum("nij,nj->ni", P, v) for v in (b, c, d))
    w2 = (2 / aa)[:, None] * (pd / 24 - alpha[:, None] * pc / 6
                              + ((alpha ** 2 - beta) / 2)[:, None] * pb)
    return w2 / f.speed[:, None]


def grad_E_pv(f):
    """Principal value route, punctured symmetric trapezoid with diagonal correction."""
    tau = f.tangent
    kappa = curvature_vector(f.d1, f.d2)
    out = np.empty_like(f.points)
    rows = 64
    for lo in range(0, f.n, rows):
        idx = np.arange(lo, min(lo + rows, f.n))
        chord = f.points[None, :, :] - f.points[idx, None, :]
        r2 = np.sum(chord * chord, axis=-1)
        r2[np.arange(idx.size), idx] = 1.0
        t = tau[idx, None, :]
        normal = chord - np.sum(chord * t, axis=-1, keepdims=True) * t
        core = 2 * normal / r2[..., None] - kappa[idx, None, :]
        integrand = core * (f.speed[None, :] / r2)[..., None]
        integrand[np.arange(idx.size), idx] = 0.0
        out[idx] = integrand.sum(axis=1)
    out = 2 * f.h * (out + _regular_part(f))
    return GradientField(TangentField(_normalize(out, tau), f), "pv")


def _normalize(vec, tau):
    """Remove the rounding-level tangential component."""
    return vec - np.sum(vec * tau, axis=1)[:, None] * tau


def _assemble(f, idx, u1, v):
    a = f.d1[idx]
    tau = a / np.linalg.norm(a, axis=-1, keepdims=True)
    u2 = -(v / np.sum(a * a, axis=-1))[..., None] * f.d2[idx]
    u3 = -np.sum(u1 * tau, axis=-1, keepdims=True) * tau
    u4 = -np.sum(u2 * tau, axis=-1, keepdims=True) * tau
    return u2, u3, u4


def u_components(f, i=None, method="regularized", ladder=Ladder(), tol=1e-8):
    """u1..u4 at grid indices ``i`` (all points when None).

    method "regularized": the finite part as the convergent integral of the
    counterterm-subtracted integrand plus V/2 times the counterterm, summed
    on the grid like the p.v. route.  method "extrapolated": epsilon
    truncation with Richardson extrapolation; points whose spread exceeds
    tol (1 + |u1|) are flagged.
    """
    idx = np.arange(f.n) if i is None else np.atleast_1d(i)
    if method == "extrapolated":
        fp = finite_parts(f.curve, f.t[idx], ladder=ladder, vector=True)
        u1 = 2 * fp["W"]
        v = fp["V"]
        flagged = fp["W_spread"] > tol * (1 + np.linalg.norm(u1, axis=-1))
    elif method == "regularized":
        v = potential_V_cosine(f).v[idx]
        u1 = 2 * _regularized_W(f, idx, v)
        flagged = np.zeros(idx.size, dtype=bool)
    else:
        raise KnotError("unknown u1 method %r" % method)
    u2, u3, u4 = _assemble(f, idx, u1, v)
    comps = UComponents(u1, u2, u3, u4, flagged)
    if i is not None and np.ndim(i) == 0:
        return UComponents(u1[0], u2[0], u3[0], u4[0], flagged[:1])
    return comps


def _regularized_W(f, idx, v):
    """Pf int chord |f'|/|chord|^4 via the subtracted integrand.

    Normal part: the counterterm-subtracted integrand has only a simple pole
    at t = s, so the punctured grid sum plus its constant Laurent
    coefficient converges spectrally.  Tangential part: since
    d/ds |chord|^-2 = 2 (chord, f'(s)) / |chord|^4, it equals V'(s)/(2|f'(s)|)
    along the unit tangent.
    """
    kappa = curvature_vector(f.d1, f.d2)
    a, b, c, d = f.d1[idx], f.d2[idx], f.d3[idx], f.d4[idx]
    chord = f.points[None, :, :] - f.points[idx, None, :]
    r2 = np.sum(chord * chord, axis=-1)
    rows = np.arange(idx.size)
    r2[rows, idx] = 1.0
    integrand = (chord / r2[..., None] ** 2 - kappa[idx, None, :] / (2 * r2[..., None]))
    integrand *= f.speed[None, :, None]
    integrand[rows, idx] = 0.0
    total = integrand.sum(axis=1) + _laurent_W(a, b, c, d, kappa[idx])
    tau = f.tangent[idx]
    normal = _normalize(f.h * total, tau) + 0.5 * v[:, None] * kappa[idx]
    v_all = potential_V_cosine(f).v
    k = np.fft.rfftfreq(f.n, 1.0 / f.n)
    dv = np.fft.irfft(np.fft.rfft(v_all) * 2j * np.pi * k, n=f.n)[idx]
    return normal + (dv / (2 * f.speed[idx]))[:, None] * tau


def _laurent_W(a, b, c, d, kappa):
    # chord = a x + b x^2/2 + c x^3/6 + d x^4/24;  |chord|^2 = A x^2 (1 + p x + q x^2 + r x^3)
    A = np.sum(a * a, axis=-1)
    p = np.sum(a * b, axis=-1) / A
    q = (np.sum(b * b, axis=-1) / 4 + np.sum(a * c, axis=-1) / 3) / A
    r = (np.sum(a * d, axis=-1) / 12 + np.sum(b * c, axis=-1) / 6) / A
    # 1/(1 + p x + q x^2 + r x^3) = 1 + e1 x + e2 x^2 + e3 x^3
    e1 = -p
    e2 = p * p - q
    e3 = -p ** 3 + 2 * p * q - r
    # squared inverse: 1 + g1 x + g2 x^2 + g3 x^3
    g1 = 2 * e1
    g2 = 2 * e2 + e1 * e1
    g3 = 2 * e3 + 2 * e1 * e2
    # speed |f'(s+x)| = |a| (1 + s1 x + s2 x^2 + s3 x^3)
    s1, s2, s3 = _speed_series(a, b, c, d)
    sp = np.sqrt(A)
    col = lambda z: z[..., None]
    # chord/|chord|^4 = (1/(A^2 x^3)) (a + b x/2 + c x^2/6 + d x^3/24)(1 + g1 x + g2 x^2 + g3 x^3)
    n0 = a
    n1 = b / 2 + col(g1) * a
    n2 = c / 6 + col(g1) * b / 2 + col(g2) * a
    n3 = d / 24 + col(g1) * c / 6 + col(g2) * b / 2 + col(g3) * a
    # times (1 + s1 x + s2 x^2 + s3 x^3); x^3 coefficient gives the x^0 term
    vec = n3 + col(s1) * n2 + col(s2) * n1 + col(s3) * n0
    vec = vec / col(A ** 2)
    # kappa/(2|chord|^2) |f'| = kappa/(2 A x^2) (1 + e1 x + e2 x^2)(1 + s1 x + s2 x^2)
    sc = (e2 + e1 * s1 + s2) / (2 * A)
    return sp[..., None] * (vec - col(sc) * kappa)


def _speed_series(a, b, c, d):
    """|f'(s+x)| / |f'(s)| = 1 + s1 x + s2 x^2 + s3 x^3."""
    # |f'(s+x)|^2 = A (1 + P x + Q x^2 + R x^3)
    A = np.sum(a * a, axis=-1)
    P = 2 * np.sum(a * b, axis=-1) / A
    Q = (np.sum(b * b, axis=-1) + np.sum(a * c, axis=-1)) / A
    R = (np.sum(a * d, axis=-1) / 3 + np.sum(b * c, axis=-1)) / A
    s1 = P / 2
    s2 = Q / 2 - P * P / 8
    s3 = R / 2 - P * Q / 4 + P ** 3 / 16
    return s1, s2, s3


def grad_E_hadamard(f, ladder=Ladder(), compare=True):
    """G_E = 2(u1+u2+u3+u4) with u1 and V from extrapolated finite parts.

    When ``compare`` is set the pointwise distance to the p.v. route is stored.
    """
    comps = u_components(f, method="extrapolated", ladder=ladder)
    g = _normalize(comps.gradient(), f.tangent)
    residual = None
    if compare:
        residual = np.linalg.norm(g - grad_E_pv(f).vectors, axis=1)
    return GradientField(TangentField(g, f), "hadamard", residual)


def weighted_gradient(G, phi, f=None, circle_tol=CIRCLE_TOL, floor=PHI_FLOOR):
    """Phi^-1 G; the zero field on (numerically) round knots."""
    f = G.base if f is None else f
    if roundness(f) < circle_tol:
        return TangentField(np.zeros_like(G.vectors), f)
    vals = np.asarray(phi.values, dtype=float)
    bad = np.flatnonzero(vals < floor * np.median(np.abs(vals)))
    if bad.size:
        raise DegenerateWeightError("near-degenerate weight at indices %s"
                                    % bad[:10].tolist(), bad)
    return TangentField(G.vectors / vals[:, None], f)


def random_normal_field(f, seed, modes=6):
    """Smooth random normal field: a random low-mode Fourier series projected normal."""
    rng = np.random.default_rng(seed)
    k = np.arange(1, modes + 1)
    amp = rng.normal(size=(2, modes, 3)) / k[:, None]
    phase = 2 * np.pi * np.outer(f.t, k)
    raw = np.cos(phase) @ amp[0] + np.sin(phase) @ amp[1] + rng.normal(size=3)
    tau = f.tangent
    return TangentField(_normalize(raw, tau), f)


def directional_derivative(curve, u, eps=None):
    """(E(f + eps u) - E(f - eps u)) / (2 eps), E by the cosine route."""
    vec = u.vectors if hasattr(u, "vectors") else np.asarray(u, dtype=float)
    pts = curve.grid_derivative(0)
    if vec.shape != pts.shape:
        raise KnotError("field does not match the knot grid")
    if eps is None:
        length = evaluate(curve, order=1).total_len
        eps = FD_SCALE * length / np.max(np.abs(vec))
    plus = from_samples(pts + eps * vec)
    minus = from_samples(pts - eps * vec)
    e_plus = energy_E_cosine(evaluate(plus, order=2)).value
    e_minus = energy_E_cosine(evaluate(minus, order=2)).value
    return (e_plus - e_minus) / (2 * eps)


_COMPONENTS = ("u1", "u2", "u3", "u4", "G")


def _rule(name, method):
    if callable(name):
        return name
    if name not in _COMPONENTS:
        raise KnotError("unknown component %r" % name)

    def rule(g, idx):
        comps = u_components(g, idx, method=method)
        if name == "G":
            return comps.gradient()
        return getattr(comps, name)

    return rule


def J_operator(rule, f, i, method="extrapolated"):
    """u(I o f, s) - |f|^4 u(f, s) + 2 |f|^2 (u(f, s), f) f at grid indices i.

    ``rule`` is a component name (u1..u4 or G) or a callable (knot, idx) -> vectors;
    I is the inversion in the unit sphere about the origin.
    """
    idx = np.atleast_1d(i)
    dist = np.linalg.norm(f.points, axis=1)
    if np.min(dist) < 1e-9 * f.diameter:
        raise KnotError("knot passes through the origin", index=int(np.argmin(dist)))
    u = _rule(rule, method)
    inverted = evaluate(transform_curve(UNIT_INVERSION, f.curve))
    p = f.points[idx]
    n2 = np.sum(p * p, axis=-1)[:, None]
    base = u(f, idx)
    out = u(inverted, idx) - n2 ** 2 * base + 2 * n2 * np.sum(base * p, axis=-1)[:, None] * p
    return out[0] if np.ndim(i) == 0 else out


def j_closed_form(name, f, i, v=None):
    """Closed-form values of J(u_k, f, s) in terms of V and position data."""
    idx = np.atleast_1d(i)
    if v is None:
        v = potential_V_cosine(f).v[idx]
    v = np.asarray(v)[:, None]
    p, a = f.points[idx], f.d1[idx]
    n2 = np.sum(p * p, axis=-1)[:, None]
    pa = np.sum(p * a, axis=-1)[:, None]
    aa = np.sum(a * a, axis=-1)[:, None]
    tang = 4 * v * pa ** 2 / aa * p - 2 * v * n2 * pa / aa * a
    if name == "u1":
        out = -2 * v * n2 * p
    elif name == "u2":
        out = 2 * v * n2 * p - 8 * v * pa ** 2 / aa * p + 4 * v * n2 * pa / aa * a
    elif name in ("u3", "u4"):
        out = tang
    elif name == "G":
        out = np.zeros_like(p)
    else:
        raise KnotError("unknown component %r" % name)
    return out[0] if np.ndim(i) == 0 else out
