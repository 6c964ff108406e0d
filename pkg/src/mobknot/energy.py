"""Knot energy E by three routes, and the conformal-angle kernel energies E_mu."""
from dataclasses import dataclass, field

import numpy as np

from .conformal import _pair_data, kernel_potential
from .curve import ArcLength, KnotError
from .metric import frenet

KERNEL_TAGS = ("one_minus_cos", "abs_sine", "acyclicity", "custom")
_GROWTH_EXPONENT = 0.5


@dataclass(frozen=True, eq=False)
class MuKernel:
    """A kernel mu on [0, pi].

    ``slope0`` is mu'(0); it fixes the diagonal value of mu(theta)/|chord|^2.
    Custom kernels are tabulated on ``table_theta`` and interpolated linearly.
    """

    tag: str
    table_theta: np.ndarray = field(default=None, repr=False)
    table_mu: np.ndarray = field(default=None, repr=False)
    slope0: float = None

    def __post_init__(self):
        if self.tag not in KERNEL_TAGS:
            raise KnotError("unknown kernel %r" % self.tag)
        if self.tag == "custom":
            self._check_table()
        elif self.slope0 is None:
            slope = {"one_minus_cos": 0.0, "abs_sine": 1.0, "acyclicity": np.pi / 4}
            object.__setattr__(self, "slope0", slope[self.tag])

    def _check_table(self):
        th = np.asarray(self.table_theta, dtype=float)
        mu = np.asarray(self.table_mu, dtype=float)
        if th.ndim != 1 or th.shape != mu.shape or th.size < 4:
            raise KnotError("custom kernel needs matching 1-D tables")
        if th[0] != 0 or not np.isclose(th[-1], np.pi) or np.any(np.diff(th) <= 0):
            raise KnotError("custom kernel table must increase from 0 to pi")
        if abs(mu[0]) > 1e-14 or np.any(mu[1:-1] <= 0) or np.any(mu < 0):
            raise KnotError("custom kernel must vanish at 0 and be positive on (0, pi)")
        # local power law from the smallest positive samples
        head = slice(1, min(4, th.size - 1))
        expo = np.polyfit(np.log(th[head]), np.log(mu[head]), 1)[0]
        if expo <= _GROWTH_EXPONENT:
            raise KnotError("custom kernel grows like theta^%.3f near 0; "
                            "need O(theta^(1/2+eps))" % expo)
        object.__setattr__(self, "table_theta", th)
        object.__setattr__(self, "table_mu", mu)
        if self.slope0 is None:
            object.__setattr__(self, "slope0", 0.0)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.tag == "one_minus_cos":
            return 1 - np.cos(theta)
        if self.tag == "abs_sine":
            return np.abs(np.sin(theta))
        if self.tag == "acyclicity":
            return np.pi / 4 * (theta - theta * np.sin(theta))
        return np.interp(theta, self.table_theta, self.table_mu)

    def key(self):
        if self.tag != "custom":
            return self.tag
        return (self.tag, self.table_theta.tobytes(), self.table_mu.tobytes())


@dataclass(frozen=True)
class EnergyReport:
    value: float
    method: str
    grid_size: int
    diagnostics: dict = field(default_factory=dict)

    def to_json(self):
        return {"value": self.value, "method": self.method, "grid_size": self.grid_size,
                "cross_check": self.diagnostics.get("cross_check")}


def energy_E_cosine(f):
    """Double trapezoid of (1 - cos theta)/|chord|^2 |f'(s)||f'(t)|, zero diagonal."""
    _, r2, omc, _ = _pair_data(f)
    val = float(f.speed @ (omc / r2) @ f.speed) * f.h ** 2
    return EnergyReport(val, "cosine", f.n)


def energy_E_from_V(profile, f):
    """int V(f, s) |f'(s)| ds."""
    if profile.grid_key is not None and profile.grid_key != f.curve.content_key():
        raise KnotError("potential profile belongs to a different knot")
    v = np.asarray(profile.v)
    if v.shape != (f.n,):
        raise KnotError("potential profile does not match the grid")
    return EnergyReport(float(v @ f.speed) * f.h, "from_V", f.n)


def fhw_diagonal(f):
    """Continuous diagonal value kappa^2 |f'|^2 / 12 of the FHW integrand."""
    return frenet(f).kappa ** 2 * f.speed ** 2 / 12


def _bernoulli2(x):
    x = np.mod(x, 1.0)
    return x * x - x + 1.0 / 6


def energy_E_fhw(f):
    """E = iint (1/|chord|^2 - 1/d_f^2) |f'||f'| - 4.

    The shorter-arc distance d_f has a derivative kink at the antipodal
    point of every row; its O(h^2) trapezoid error is removed by
    subtracting a periodic Bernoulli polynomial with the same kink.
    """
    n, L, h = f.n, f.total_len, f.h
    chord = f.points[None, :, :] - f.points[:, None, :]
    r2 = np.sum(chord * chord, axis=-1)
    one_way = np.mod(f.cum_arclen[None, :] - f.cum_arclen[:, None], L)
    d = np.minimum(one_way, L - one_way)
    np.fill_diagonal(r2, 1.0)
    np.fill_diagonal(d, 1.0)
    core = (d * d - r2) / (r2 * d * d)
    np.fill_diagonal(core, 0.0)
    integrand = core * f.speed[:, None] * f.speed[None, :]
    integrand[np.diag_indices(n)] = fhw_diagonal(f)
    rows = integrand.sum(axis=1) * h
    # kink of -|f'(s)||f'(t)|/d^2 at the antipode t*: jump of d/dt is -32 |f'(s)||f'(t*)|^2 / L^3
    arc = ArcLength(f.curve)
    t_star = arc.inverse(f.cum_arclen + L / 2)
    sp_star = arc.speed(t_star)
    c = 16 * f.speed * sp_star ** 2 / L ** 3
    b2_sum = _bernoulli2(f.t[None, :] - t_star[:, None]).sum(axis=1) * h
    rows = rows - c * b2_sum
    total = float(np.sum(rows)) * h
    return EnergyReport(total - 4.0, "fhw", n, {"moebius_energy": total})


def energy_E_mu(f, mu):
    """iint mu(theta) |f'(s)||f'(t)| / |chord|^2, from the kink-corrected rows."""
    return float(kernel_potential(f, mu) @ f.speed) * f.h


def energy_from_weight(f, phi):
    """int Phi^(1/3) |f'| dt."""
    vals = np.asarray(phi.values, dtype=float)
    if np.any(vals < -1e-10):
        i = int(np.argmin(vals))
        raise KnotError("negative weight at grid index %d" % i, index=i)
    return float(np.cbrt(np.maximum(vals, 0.0)) @ f.speed) * f.h
