"""Hadamard finite parts by epsilon-truncation and Richardson extrapolation.

For a point f(s) the integrals

    F(eps) = int_{d_f(s,t) >= eps} |f'(t)| / |f(t)-f(s)|^2 dt
    W(eps) = int_{d_f(s,t) >= eps} (f(t)-f(s)) |f'(t)| / |f(t)-f(s)|^4 dt

are computed with composite Gauss-Legendre rules on the exact Fourier
representation; the truncation points are located by inverting the
spectral arc length.  Because the excluded window is symmetric in arc
length, the odd parts of the Laurent expansions cancel and

    F(eps) - 2/eps   = V       + c1 eps + c3 eps^3 + ...
    W(eps) - kappa/eps = u1/2  + d1 eps + d3 eps^3 + ...

so the extrapolation basis is {1, eps, eps^3, eps^5, ...}.
"""
from dataclasses import dataclass

import numpy as np

from .curve import ArcLength

GAUSS_ORDER = 16
OUTER_PANELS = 64
LEVELS = 8
RATIO = 0.5
COARSEST = 1 / 8


@dataclass(frozen=True)
class Ladder:
    """Geometric epsilon ladder; ``coarsest`` is a fraction of the total length."""

    levels: int = LEVELS
    ratio: float = RATIO
    coarsest: float = COARSEST

    def eps(self, total_len):
        return total_len * self.coarsest * self.ratio ** np.arange(self.levels)


def _eval(curve, t):
    """Points and first derivatives at parameters t (shared exponentials)."""
    k = np.arange(curve.modes + 1)
    z = np.exp(2j * np.pi * np.multiply.outer(t, k))
    amp = curve.coeffs[:, :, 0] - 1j * curve.coeffs[:, :, 1]
    pts = (z @ amp.T).real
    der = (z @ (amp * (2j * np.pi * k)).T).real
    return pts, der


def _panels(a, b, count):
    """Split intervals [a, b] (arrays) into ``count`` equal panels."""
    frac = np.linspace(0.0, 1.0, count + 1)
    edges = a[..., None] + (b - a)[..., None] * frac
    return edges[..., :-1], edges[..., 1:]


def truncated_integrals(curve, s, eps, arc=None, vector=True, order=GAUSS_ORDER,
                        outer_panels=OUTER_PANELS, chunk=8):
    """F(eps_k) and W(eps_k) at every parameter in ``s`` for a decreasing ladder ``eps``.

    Returns (F, W) with shapes (len(s), K) and (len(s), K, 3); W is None
    when ``vector`` is false.
    """
    arc = ArcLength(curve) if arc is None else arc
    s = np.atleast_1d(np.asarray(s, dtype=float))
    eps = np.asarray(eps, dtype=float)
    if np.any(np.diff(eps) >= 0):
        raise ValueError("eps ladder must be strictly decreasing")
    if eps[0] >= arc.total / 2 or eps[-1] <= 0:
        raise ValueError("eps must lie in (0, L/2)")
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    # sub-panels per ring so each spans at most a factor 2 in arc distance
    subs = [max(1, int(np.ceil(np.log2(eps[k - 1] / eps[k]) - 1e-12)))
            for k in range(1, len(eps))]
    out_f = np.empty((s.size, eps.size))
    out_w = np.empty((s.size, eps.size, 3)) if vector else None
    for lo in range(0, s.size, chunk):
        sc = s[lo:lo + chunk]
        sig = arc(sc)
        base, _ = _eval(curve, sc)
        # outer region between the coarsest truncation points
        tp0 = arc.inverse(sig + eps[0])
        tm0 = arc.inverse(sig - eps[0]) + 1.0
        a_list = [_panels(tp0, tm0, outer_panels)]
        ring_slices = []
        start = outer_panels
        for k in range(1, len(eps)):
            m = subs[k - 1]
            radii = eps[k] * (eps[k - 1] / eps[k]) ** (np.arange(m + 1) / m)
            tf = arc.inverse(sig[:, None] + radii)
            tb = arc.inverse(sig[:, None] - radii)
            # forward ring [tf_j, tf_{j+1}], backward ring [tb_{j+1}, tb_j]
            a_list.append((np.concatenate([tf[:, :-1], tb[:, 1:]], axis=1),
                           np.concatenate([tf[:, 1:], tb[:, :-1]], axis=1)))
            ring_slices.append(slice(start, start + 2 * m))
            start += 2 * m
        a = np.concatenate([p[0] for p in a_list], axis=1)
        b = np.concatenate([p[1] for p in a_list], axis=1)
        nodes = a[..., None] + (b - a)[..., None] * x
        weights = (b - a)[..., None] * w
        pts, der = _eval(curve, nodes)
        diff = pts - base[:, None, None, :]
        r2 = np.sum(diff * diff, axis=-1)
        sp = np.linalg.norm(der, axis=-1)
        scal = np.sum(weights * sp / r2, axis=-1)
        panel_f = [scal[:, :outer_panels].sum(axis=1)]
        panel_f += [scal[:, sl].sum(axis=1) for sl in ring_slices]
        out_f[lo:lo + chunk] = np.cumsum(np.stack(panel_f, axis=1), axis=1)
        if vector:
            vec = np.sum((weights * sp / r2 ** 2)[..., None] * diff, axis=-2)
            panel_w = [vec[:, :outer_panels].sum(axis=1)]
            panel_w += [vec[:, sl].sum(axis=1) for sl in ring_slices]
            out_w[lo:lo + chunk] = np.cumsum(np.stack(panel_w, axis=1), axis=1)
    return out_f, out_w


def extrapolate(eps, values, powers=None):
    """Value at eps = 0 of the fit values ~ A + sum_p c_p eps^p.

    ``values`` has the ladder on axis 1 (extra trailing axes allowed).
    Returns (A, spread) where spread compares with the fit that drops the
    coarsest level and the highest power.
    """
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    if powers is None:
        powers = tuple(range(1, 2 * len(eps) - 2, 2))
    powers = tuple(powers)
    scale = eps[0]

    def fit(e, v, pw):
        mat = np.column_stack([np.ones_like(e)] + [(e / scale) ** p for p in pw])
        flat = np.moveaxis(v, 1, 0).reshape(len(e), -1)
        sol, *_ = np.linalg.lstsq(mat, flat, rcond=None)
        return sol[0].reshape((v.shape[0],) + v.shape[2:])

    best = fit(eps, values, powers)
    if len(eps) > 2 and len(powers) > 1:
        spread = np.abs(best - fit(eps[1:], values[:, 1:], powers[:-1]))
    else:
        spread = np.full(best.shape, np.inf)
    return best, spread


def curvature_vector(d1, d2):
    """(1/|f'|) d/dt (f'/|f'|) = f''/|f'|^2 - (f',f'') f'/|f'|^4."""
    sp2 = np.sum(d1 * d1, axis=-1)
    dot = np.sum(d1 * d2, axis=-1)
    return d2 / sp2[..., None] - (dot / sp2 ** 2)[..., None] * d1


def finite_parts(curve, s, ladder=Ladder(), vector=True, arc=None, tol=1e-8, refine=2):
    """Finite parts of F and W at parameters ``s``.

    Returns dict with keys V, V_spread and (if vector) W, W_spread, where W
    is Pf int (f(t)-f(s)) |f'(t)| / |f(t)-f(s)|^4 dt (so u1 = 2 W).  Points
    whose spread exceeds tol (1 + |value|) are redone up to ``refine`` times
    with the coarsest window shrunk fourfold.
    """
    arc = ArcLength(curve) if arc is None else arc
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = _finite_parts(curve, s, ladder, vector, arc)
    for _ in range(refine):
        bad = np.flatnonzero(_score(out, vector) > tol)
        if bad.size == 0:
            break
        ladder = Ladder(ladder.levels, ladder.ratio, ladder.coarsest / 4)
        redo = _finite_parts(curve, s[bad], ladder, vector, arc)
        better = _score(redo, vector) < _score(out, vector)[bad]
        for key in redo:
            out[key][bad[better]] = redo[key][better]
    return out


def _score(out, vector):
    """Extrapolation spread relative to 1 + |value|."""
    score = out["V_spread"] / (1 + np.abs(out["V"]))
    if vector:
        score = np.maximum(score, out["W_spread"] / (1 + np.linalg.norm(out["W"], axis=-1)))
    return score


def _finite_parts(curve, s, ladder, vector, arc):
    eps = ladder.eps(arc.total)
    f_vals, w_vals = truncated_integrals(curve, s, eps, arc=arc, vector=vector)
    v, v_spread = extrapolate(eps, f_vals - 2.0 / eps)
    out = {"V": v, "V_spread": v_spread}
    if vector:
        kappa = curvature_vector(curve(s, 1), curve(s, 2))
        w, w_spread = extrapolate(eps, w_vals - kappa[:, None, :] / eps[None, :, None])
        out["W"] = w
        out["W_spread"] = np.max(w_spread, axis=-1)
    return out
