"""Conformal angle and the regularized r^-2 potential V(f, s)."""
from dataclasses import dataclass, field

import numpy as np

from .curve import KnotCurve, KnotError, evaluate
from .finite_part import Ladder, finite_parts, truncated_integrals
from .metric import conformal_density, frenet
from .moebius import transform_curve


@dataclass(frozen=True, eq=False)
class AngleField:
    theta: np.ndarray


@dataclass(frozen=True, eq=False)
class PotentialProfile:
    v: np.ndarray
    method: str
    spread: np.ndarray = field(default=None, repr=False)
    flagged: np.ndarray = field(default=None, repr=False)
    grid_key: tuple = field(default=None, repr=False)


def _angle_parts(chord, tau_s, tau_t):
    """Reflected tangent w and the pieces of theta for chords ``chord``.

    w is the tangent at f(t) of the circle through f(s), f(t) tangent to
    tau_s at f(s); theta is the angle between w and tau_t.
    """
    length = np.linalg.norm(chord, axis=-1, keepdims=True)
    e = chord / np.where(length == 0, 1.0, length)
    w = 2 * np.sum(e * tau_s, axis=-1, keepdims=True) * e - tau_s
    return w, length[..., 0]


def _theta(w, tau_t):
    return 2 * np.arctan2(np.linalg.norm(w - tau_t, axis=-1),
                          np.linalg.norm(w + tau_t, axis=-1))


def conformal_angle(f, i, j):
    """theta_f(t_i, t_j) in [0, pi]."""
    chord = f.points[j] - f.points[i]
    if np.linalg.norm(chord) <= 1e-14 * f.total_len:
        raise KnotError("conformal angle needs distinct points")
    tau = f.tangent
    w, _ = _angle_parts(chord, tau[i], tau[j])
    return float(_theta(w, tau[j]))


def _pair_data(f):
    """Chords, squared chord lengths and 1 - cos(theta) on the full grid."""
    tau = f.tangent
    chord = f.points[None, :, :] - f.points[:, None, :]
    w, length = _angle_parts(chord, tau[:, None, :], tau[None, :, :])
    # 1 - cos(theta) = |w - tau_t|^2 / 2, free of cancellation
    one_minus_cos = 0.5 * np.sum((w - tau[None, :, :]) ** 2, axis=-1)
    np.fill_diagonal(one_minus_cos, 0.0)
    r2 = length ** 2
    np.fill_diagonal(r2, 1.0)
    return chord, r2, one_minus_cos, w


def angle_field(f):
    tau = f.tangent
    chord = f.points[None, :, :] - f.points[:, None, :]
    w, _ = _angle_parts(chord, tau[:, None, :], tau[None, :, :])
    theta = _theta(w, tau[None, :, :])
    np.fill_diagonal(theta, 0.0)
    # the defining circle pair is unordered; symmetrize away rounding
    return AngleField(0.5 * (theta + theta.T))


def tangent_circle_through(p, direction, q):
    """Circle through p and q tangent to ``direction`` at p.

    Returns dict(center, radius, normal) or dict(line=True) when q lies on
    the tangent line.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    c = q - p
    cc = c @ c
    if cc == 0:
        raise KnotError("tangent circle needs distinct points")
    perp = c - (c @ d) * d
    if perp @ perp <= 1e-24 * cc:
        return {"line": True}
    n_in = perp / np.linalg.norm(perp)
    # centre p + r n_in with |q - centre| = r  =>  r = |c|^2 / (2 (c, n_in))
    radius = cc / (2 * (c @ n_in))
    return {"line": False, "center": p + radius * n_in, "radius": abs(radius),
            "normal": np.cross(d, n_in)}


def potential_V_cosine(f):
    """V(f, t_i) = int (1 - cos theta)/|chord|^2 |f'(t)| dt, trapezoid with zero diagonal."""
    _, r2, omc, _ = _pair_data(f)
    v = np.sum(omc / r2 * f.speed[None, :], axis=1) * f.h
    return PotentialProfile(v, "cosine", grid_key=f.curve.content_key())


def potential_V_truncated(f, i, eps):
    """int_{d_f >= eps} |f'|/|chord|^2 dt - 2/eps at grid point i (no limit taken)."""
    spacing = f.total_len / f.n
    if not (2 * spacing <= eps < f.total_len / 2):
        raise ValueError("eps must lie in [2 grid spacings, L/2)")
    coarse = max(eps, min(f.total_len / 8, 0.49 * f.total_len))
    ladder = [coarse]
    while ladder[-1] / 2 > eps:
        ladder.append(ladder[-1] / 2)
    if ladder[-1] != eps:
        ladder.append(eps)
    vals, _ = truncated_integrals(f.curve, f.t[i], np.array(ladder), vector=False)
    return float(vals[0, -1] - 2.0 / eps)


def potential_V_hadamard(f, i=None, ladder=Ladder(), tol=1e-8):
    """V by the finite-part route; whole profile when ``i`` is None.

    Points whose extrapolation spread exceeds tol (1 + |V|) are flagged.
    """
    s = f.t if i is None else f.t[np.atleast_1d(i)]
    fp = finite_parts(f.curve, s, ladder=ladder, vector=False)
    v = fp["V"]
    flagged = fp["V_spread"] > tol * (1 + np.abs(v))
    if i is not None and np.ndim(i) == 0:
        return float(v[0])
    return PotentialProfile(v, "hadamard", spread=fp["V_spread"], flagged=flagged,
                            grid_key=f.curve.content_key())


def verify_V_scaling(T, f, potential=potential_V_cosine):
    """|V(T o f, t_i) - |T'(f(t_i))|^-2 V(f, t_i)| on the grid."""
    image = evaluate(transform_curve(T, f.curve))
    lhs = potential(image).v
    rhs = T.conformal_factor(f.points) ** -2 * potential(f).v
    return np.abs(lhs - rhs)


def _kernel_parts(f, mu, rows=None):
    """theta, mu(theta)/|chord|^2 and theta/|chord|^2 at the given grid rows.

    Diagonal entries hold the limits; near the diagonal
    theta ~ (1/6) (kappa'^2 + kappa^2 tau^2)^(1/2) sigma^2 in arc length sigma.
    """
    rows = np.arange(f.n) if rows is None else np.asarray(rows)
    tau = f.tangent
    chord = f.points[None, :, :] - f.points[rows, None, :]
    w, length = _angle_parts(chord, tau[rows, None, :], tau[None, :, :])
    theta = _theta(w, tau[None, :, :])
    diag = (np.arange(rows.size), rows)
    theta[diag] = 0.0
    length[diag] = 1.0
    out = mu(theta) / length ** 2
    q = theta / length ** 2
    q[diag] = conformal_density(frenet(f))[rows] ** 2 / 6 if mu.slope0 else 0.0
    out[diag] = (mu.slope0 or 0.0) * q[diag]
    return theta, out, q


def kernel_matrix(f, mu):
    """mu(theta_f(t_i, t_j)) / |chord|^2 on the grid, with its diagonal limit.

    Near the diagonal theta ~ (1/6) (kappa'^2 + kappa^2 tau^2)^(1/2) sigma^2
    in arc length sigma, so a kernel with slope mu'(0) has the diagonal
    value mu'(0) times that coefficient.
    """
    if mu.tag == "one_minus_cos":
        _, r2, omc, _ = _pair_data(f)
        return omc / r2
    return _kernel_parts(f, mu)[1]


OVERSAMPLE = 8
_BLOCK = 1 << 18
KINK_RATIO = 0.25

# quartic interpolation on the five nodes x = -2..2
_NODES = np.arange(-2.0, 3.0)
_VANDER_INV = np.linalg.inv(np.vander(_NODES, 5, increasing=True))


def _quartic(coef, x):
    val = coef[:, 4]
    der = np.zeros_like(val)
    for k in range(3, -1, -1):
        der = der * x + val
        val = val * x + coef[:, k]
    return val, der


def _bernoulli2(x):
    x = np.mod(x, 1.0)
    return x * x - x + 1.0 / 6


def _kink_correction(q, speed, slope0, h):
    """Per-row Euler-Maclaurin correction for the kinks of mu(theta) along t.

    ``q`` is theta/|chord|^2 with its diagonal limit.  Where the conformal
    angle touches 0 transversally (planar pieces, and at the diagonal of
    rows where kappa' vanishes) q is |p| for a smooth signed p, and the row
    integrand has a derivative jump J = 2 mu'(0) |p'| |f'| at the zero t*.
    The trapezoid rule then overestimates the row integral by
    (h^2/2) J B2((t* - t_0)/h).  A grid minimum counts as a kink when
    flipping the sign on one side gives a smoother five-point sequence than
    leaving it alone.
    """
    n = q.shape[1]
    out = np.zeros(q.shape[0])
    if not slope0:
        return out
    left, right = np.roll(q, 1, axis=1), np.roll(q, -1, axis=1)
    rows, cols = np.nonzero((q <= left) & (q < right))
    if rows.size == 0:
        return out
    win = (cols[:, None] + np.arange(-2, 3)) % n
    vals = q[rows[:, None], win]
    flip_a = vals * np.array([-1, -1, 1, 1, 1])
    flip_b = vals * np.array([-1, -1, -1, 1, 1])
    cost = [np.abs(np.diff(v, 4, axis=1))[:, 0] for v in (vals, flip_a, flip_b)]
    choice = np.argmin(np.stack(cost), axis=0)
    # a real kink leaves the flipped sequence much smoother; rounding noise does not
    kink = (choice > 0) & (np.minimum(cost[1], cost[2]) < KINK_RATIO * cost[0])
    if not kink.any():
        return out
    rows, win, choice = rows[kink], win[kink], choice[kink]
    signed = np.where((choice == 1)[:, None], flip_a[kink], flip_b[kink])
    coef = signed @ _VANDER_INV.T
    # secant start inside the bracketing cell, then Newton on the quartic
    lo = np.where(choice == 1, 1, 2)
    ya = signed[np.arange(lo.size), lo]
    yb = signed[np.arange(lo.size), lo + 1]
    lo = lo - 2.0
    gap = yb - ya
    x = np.clip(lo - ya / np.where(gap > 0, gap, 1.0), lo, lo + 1)
    for _ in range(4):
        val, der = _quartic(coef, x)
        x = np.clip(x - val / der, lo, lo + 1)
    _, slope = _quartic(coef, x)
    sp, _ = _quartic(speed[win] @ _VANDER_INV.T, x)
    jump = 2 * slope0 * np.abs(slope) / h * sp
    np.add.at(out, rows, 0.5 * h * h * jump * _bernoulli2(x))
    return out


def kernel_potential(f, mu, oversample=OVERSAMPLE):
    """Psi(f, t_i) = int mu(theta)/|chord|^2 |f'(t)| dt on the grid of f.

    Each row is summed on a grid ``oversample`` times finer (the Fourier
    knot is resampled exactly), with the diagonal limit and a correction
    for the derivative kinks of mu(theta) at the zeros of the conformal
    angle.  Nearly touching zeros on non-planar knots are only resolved by
    the finer grid.
    """
    if mu.tag == "one_minus_cos" and oversample == 1:
        return kernel_matrix(f, mu) @ f.speed * f.h
    return kernel_potential_at(f.curve, f.t, mu, oversample, _grid=f)


def kernel_potential_at(curve, s, mu, oversample=OVERSAMPLE, _grid=None):
    """Psi at arbitrary parameters s.

    Rows at grid parameters share one oversampled evaluation; any other row
    is computed on a copy of the grid shifted to pass through it, so every
    row keeps its exact diagonal limit.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    n = curve.grid_size * oversample
    x = s * n
    on = np.abs(x - np.rint(x)) < 1e-9
    out = np.empty(s.size)
    if on.any():
        if _grid is not None and oversample == 1:
            fine = _grid
        else:
            fine = evaluate(KnotCurve(curve.coeffs, n, check=False), order=3)
        idx = np.flatnonzero(on)
        rows = np.rint(x[idx]).astype(int) % n
        block = max(1, _BLOCK // n)
        for lo in range(0, idx.size, block):
            out[idx[lo:lo + block]] = _potential_rows(fine, mu, rows[lo:lo + block])
    for r in np.flatnonzero(~on):
        fine = evaluate(KnotCurve(_shift(curve.coeffs, s[r]), n, check=False), order=3)
        out[r] = _potential_rows(fine, mu, np.array([0]))[0]
    return out


def _shift(coeffs, c):
    """Fourier coefficients of t -> f(t + c)."""
    k = np.arange(coeffs.shape[1])
    cos, sin = np.cos(2 * np.pi * k * c), np.sin(2 * np.pi * k * c)
    a, b = coeffs[..., 0], coeffs[..., 1]
    return np.stack([a * cos + b * sin, b * cos - a * sin], axis=-1)


def _potential_rows(fine, mu, rows):
    theta, mat, q = _kernel_parts(fine, mu, rows)
    vals = mat @ fine.speed * fine.h
    return vals + _kink_correction(q, fine.speed, mu.slope0, fine.h)
