"""Spectral representation of closed space curves.

A knot is stored as a truncated real Fourier series on S^1 = R/Z,

    f(t) = a_0 + sum_{k=1}^{M} a_k cos(2 pi k t) + b_k sin(2 pi k t),

together with the size N of the uniform sampling grid t_i = i/N used by
all quadratures.  Derivatives are exact on the representation.
"""
from dataclasses import dataclass, field
from math import gcd

import numpy as np

DEFAULT_GRID = 256
IMMERSION_TOL = 1e-8
EMBED_RATIO = 0.25
EMBED_WINDOW = 4


class KnotError(ValueError):
    """Invalid curve data.  ``index`` holds the offending grid index, if any."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


def _spectrum(coeffs, n):
    """rfft-layout spectrum of length n//2+1 for coefficient array (3, M+1, 2)."""
    m = coeffs.shape[1] - 1
    spec = np.zeros((3, n // 2 + 1), dtype=complex)
    spec[:, 0] = n * coeffs[:, 0, 0]
    spec[:, 1:m + 1] = 0.5 * n * (coeffs[:, 1:, 0] - 1j * coeffs[:, 1:, 1])
    return spec


@dataclass(frozen=True, eq=False)
class KnotCurve:
    """Closed curve given by Fourier coefficients.

    ``coeffs`` has shape (3, M+1, 2): ``coeffs[c, k] = (a_k, b_k)`` for
    coordinate c and mode k; the mode-0 sine entry is always zero.
    """

    coeffs: np.ndarray
    grid_size: int = DEFAULT_GRID
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 3 or c.shape[0] != 3 or c.shape[2] != 2:
            raise KnotError("coeffs must have shape (3, M+1, 2)")
        n = int(self.grid_size)
        if n <= 0 or n % 2:
            raise KnotError("grid_size must be a positive even integer")
        if c.shape[1] - 1 > n // 2 - 1:
            raise KnotError("too many modes for grid of size %d" % n)
        c[:, 0, 1] = 0.0
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "grid_size", n)
        if self.check:
            validate(self)

    @property
    def modes(self):
        return self.coeffs.shape[1] - 1

    @property
    def t(self):
        return np.arange(self.grid_size) / self.grid_size

    def grid_derivative(self, order=0, n=None):
        """Values of the ``order``-th derivative on the uniform grid of size n."""
        n = self.grid_size if n is None else n
        spec = _spectrum(self.coeffs, n)
        if order:
            k = np.arange(n // 2 + 1)
            spec = spec * (2j * np.pi * k) ** order
        return np.fft.irfft(spec, n=n, axis=1).T

    def __call__(self, t, order=0):
        """Evaluate the ``order``-th derivative at arbitrary parameters t."""
        t = np.asarray(t, dtype=float)
        k = np.arange(self.modes + 1)
        z = np.exp(2j * np.pi * np.multiply.outer(t, k))
        amp = self.coeffs[:, :, 0] - 1j * self.coeffs[:, :, 1]
        if order:
            amp = amp * (2j * np.pi * k) ** order
        return (z @ amp.T).real

    def content_key(self):
        return (self.grid_size, self.coeffs.tobytes())

    def with_grid(self, n):
        return KnotCurve(self.coeffs, n, check=self.check)


@dataclass(frozen=True, eq=False)
class SampledKnot:
    """Grid evaluation of a KnotCurve with arc-length tables."""

    curve: KnotCurve
    points: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    d4: np.ndarray
    speed: np.ndarray
    cum_arclen: np.ndarray
    total_len: float

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def t(self):
        return self.curve.t

    @property
    def h(self):
        return 1.0 / self.n

    @property
    def tangent(self):
        return self.d1 / self.speed[:, None]

    @property
    def diameter(self):
        return float(np.max(np.linalg.norm(self.points[:, None] - self.points[None], axis=-1)))


class ArcLength:
    """Spectral cumulative arc length s(t) and its inverse.

    The speed |f'| is not band-limited, so it is sampled on an oversampled
    grid before its Fourier series is integrated termwise.
    """

    def __init__(self, curve, oversample=4):
        n = curve.grid_size * oversample
        speed = np.linalg.norm(curve.grid_derivative(1, n), axis=1)
        spec = np.fft.rfft(speed) / n
        self.curve = curve
        self.total = float(spec[0].real)
        k = np.arange(1, spec.size)
        # antiderivative coefficients of the zero-mean part
        self._amp = np.zeros(spec.size, dtype=complex)
        self._amp[1:] = 2 * spec[1:] / (2j * np.pi * k)
        self._amp[-1] = 0.0
        self._offset = float(self._periodic(np.array(0.0)))

    def _periodic(self, t):
        k = np.arange(self._amp.size)
        return (np.exp(2j * np.pi * np.multiply.outer(t, k)) @ self._amp).real

    def on_grid(self):
        """s(t) on the curve's own grid, by one inverse FFT."""
        big = 2 * (self._amp.size - 1)
        spec = self._amp * big / 2
        spec[0] = 0.0
        periodic = np.fft.irfft(spec, n=big)[::big // self.curve.grid_size]
        return self.total * self.curve.t + periodic - self._offset

    def __call__(self, t):
        """Arc length from parameter 0 to t (unwrapped, s(t+1) = s(t) + L)."""
        t = np.asarray(t, dtype=float)
        return self.total * t + self._periodic(t) - self._offset

    def speed(self, t):
        return np.linalg.norm(self.curve(t, 1), axis=-1)

    def inverse(self, sigma, iters=50, tol=1e-15):
        """Parameter t with s(t) = sigma, by safeguarded Newton iteration."""
        sigma = np.asarray(sigma, dtype=float)
        t = sigma / self.total
        for _ in range(iters):
            step = (self(t) - sigma) / self.speed(t)
            t = t - step
            if np.all(np.abs(step) < tol):
                break
        else:
            if np.any(np.abs(step) > 1e-10):
                raise KnotError("arc-length inversion failed to converge")
        return t


def evaluate(curve, order=4):
    """Sample ``curve`` and its derivatives up to ``order`` on its grid."""
    derivs = [curve.grid_derivative(k) if k <= order else None for k in range(5)]
    speed = np.linalg.norm(derivs[1], axis=1)
    arc = ArcLength(curve)
    cum = arc.on_grid()
    return SampledKnot(curve, derivs[0], derivs[1], derivs[2], derivs[3], derivs[4],
                       speed, cum, arc.total)


def arc_distance(sampled, i, j):
    """Length of the shorter arc between grid points i and j."""
    one_way = np.abs(sampled.cum_arclen[j] - sampled.cum_arclen[i])
    return np.minimum(one_way, sampled.total_len - one_way)


def arc_distance_matrix(sampled):
    idx = np.arange(sampled.n)
    return arc_distance(sampled, idx[:, None], idx[None, :])


def validate(curve, immersion_tol=IMMERSION_TOL, embed_ratio=EMBED_RATIO,
             window=EMBED_WINDOW):
    """Reject non-immersed or grid-scale self-touching curves."""
    d1 = curve.grid_derivative(1)
    speed = np.linalg.norm(d1, axis=1)
    length = speed.mean()
    if not np.isfinite(length) or length <= 0:
        raise KnotError("degenerate curve (zero length)")
    i = int(np.argmin(speed))
    if speed[i] <= immersion_tol * length:
        raise KnotError("curve is not immersed at grid index %d" % i, index=i)
    n = curve.grid_size
    pts = curve.grid_derivative(0)
    # arc distance from the trapezoidal cumulative sum is enough for the window test
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (speed + np.roll(speed, -1)) / n)])[:-1]
    one_way = np.abs(cum[:, None] - cum[None, :])
    arc = np.minimum(one_way, length - one_way)
    chord = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    spacing = length / n
    bad = (arc >= window * spacing) & (chord < embed_ratio * spacing)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise KnotError("curve self-intersects near grid indices %d and %d" % (i, j),
                        index=int(i))
    return curve


def from_samples(points, check=True):
    """Fourier interpolant through N uniformly spaced samples (N even).

    The Nyquist mode is dropped, so M = N/2 - 1 modes are kept.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise KnotError("points must be an N x 3 array")
    n = pts.shape[0]
    if n < 4 or n % 2:
        raise KnotError("number of samples must be even and at least 4")
    spec = np.fft.rfft(pts, axis=0).T / n
    m = n // 2 - 1
    coeffs = np.zeros((3, m + 1, 2))
    coeffs[:, 0, 0] = spec[:, 0].real
    coeffs[:, 1:, 0] = 2 * spec[:, 1:m + 1].real
    coeffs[:, 1:, 1] = -2 * spec[:, 1:m + 1].imag
    return KnotCurve(coeffs, n, check=check)


def resample_by_arclength(curve):
    """Same image, reparametrized proportionally to arc length."""
    arc = ArcLength(curve)
    n = curve.grid_size
    sigma = arc.total * np.arange(n) / n
    t = arc.inverse(sigma)
    if np.any(np.diff(t) <= 0):
        raise KnotError("arc-length inversion is not monotone", index=int(np.argmin(np.diff(t))))
    return from_samples(curve(t), check=curve.check)


@dataclass(frozen=True)
class ReparamMap:
    """Orientation-preserving diffeomorphism t + a sin(2 pi t + b) / (2 pi) of S^1."""

    a: float
    b: float = 0.0

    def __post_init__(self):
        if not abs(self.a) < 1:
            raise KnotError("reparametrization needs |a| < 1")

    def __call__(self, t):
        return t + self.a * np.sin(2 * np.pi * t + self.b) / (2 * np.pi)

    def derivative(self, t):
        return 1 + self.a * np.cos(2 * np.pi * t + self.b)


def reparametrize(curve, rho):
    """The curve f o rho, refit on the same grid."""
    return from_samples(curve(rho(curve.t)), check=curve.check)


def roundness(sampled):
    """Normalized RMS distance of the grid points from their best-fit circle.

    Plane from the second moments, then an algebraic (Kasa) circle fit in
    that plane.  Zero exactly when the points are concyclic.
    """
    pts = sampled.points if isinstance(sampled, SampledKnot) else np.asarray(sampled)
    centroid = pts.mean(axis=0)
    x = pts - centroid
    _, sv, vt = np.linalg.svd(x, full_matrices=False)
    scale = sv[0] / np.sqrt(len(pts))
    if scale == 0 or sv[1] <= 1e-12 * sv[0]:
        raise KnotError("point cloud is degenerate (collinear or coincident)")
    u, v = x @ vt[0], x @ vt[1]
    off_plane = x @ vt[2]
    a = np.column_stack([u, v, np.ones_like(u)])
    sol, *_ = np.linalg.lstsq(a, u ** 2 + v ** 2, rcond=None)
    cu, cv = sol[0] / 2, sol[1] / 2
    radius = np.sqrt(sol[2] + cu ** 2 + cv ** 2)
    radial = np.hypot(u - cu, v - cv) - radius
    return float(np.sqrt(np.mean(radial ** 2 + off_plane ** 2)) / radius)


def _from_function(func, n):
    t = np.arange(n) / n
    return from_samples(np.column_stack(func(2 * np.pi * t)))


def circle(center=(0.0, 0.0, 0.0), radius=1.0, normal=(0.0, 0.0, 1.0), n=DEFAULT_GRID):
    if radius <= 0:
        raise KnotError("radius must be positive")
    nrm = np.asarray(normal, dtype=float)
    if np.linalg.norm(nrm) == 0:
        raise KnotError("normal must be nonzero")
    nrm = nrm / np.linalg.norm(nrm)
    e1 = np.eye(3)[0] if abs(nrm[0]) < 0.9 else np.eye(3)[1]
    e1 = e1 - (e1 @ nrm) * nrm
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(nrm, e1)
    c = np.asarray(center, dtype=float)
    t = np.arange(n) / n
    th = 2 * np.pi * t[:, None]
    return from_samples(c + radius * (np.cos(th) * e1 + np.sin(th) * e2))


def ellipse(a=2.0, b=1.0, center=(0.0, 0.0, 0.0), n=DEFAULT_GRID):
    if a <= 0 or b <= 0:
        raise KnotError("semi-axes must be positive")
    c = np.asarray(center, dtype=float)
    return _from_function(lambda th: (c[0] + a * np.cos(th), c[1] + b * np.sin(th),
                                      c[2] + 0 * th), n)


def torus_knot(p=2, q=3, R=2.0, r=1.0, n=DEFAULT_GRID):
    if p < 1 or q < 1 or gcd(p, q) != 1:
        raise KnotError("torus knot needs coprime positive p, q")
    if not 0 < r < R:
        raise KnotError("torus knot needs 0 < r < R")
    if p + q >= n // 2:
        raise KnotError("grid too coarse for this torus knot")
    return _from_function(lambda th: ((R + r * np.cos(q * th)) * np.cos(p * th),
                                      (R + r * np.cos(q * th)) * np.sin(p * th),
                                      r * np.sin(q * th)), n)


def perturbed_circle(amplitude=0.1, mode=3, kind="radial", n=DEFAULT_GRID):
    """Unit circle with a single-mode bump, in-plane ("radial") or out of plane ("normal")."""
    if mode < 2 or mode + 1 >= n // 2:
        raise KnotError("perturbation mode must be >= 2 and below the grid Nyquist")
    if kind == "radial":
        if not abs(amplitude) < 1:
            raise KnotError("radial amplitude must be below 1")
        return _from_function(lambda th: ((1 + amplitude * np.cos(mode * th)) * np.cos(th),
                                          (1 + amplitude * np.cos(mode * th)) * np.sin(th),
                                          0 * th), n)
    if kind == "normal":
        return _from_function(lambda th: (np.cos(th), np.sin(th),
                                          amplitude * np.sin(mode * th)), n)
    raise KnotError("unknown perturbation kind %r" % kind)


PRESETS = {
    "circle": circle,
    "ellipse": ellipse,
    "torus_knot": torus_knot,
    "perturbed_circle": perturbed_circle,
}


def preset(name, **params):
    try:
        builder = PRESETS[name]
    except KeyError:
        raise KnotError("unknown preset %r" % name) from None
    return builder(**params)
