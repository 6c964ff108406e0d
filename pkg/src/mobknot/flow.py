"""Descent along the Möbius invariant gradient, with traces and an equivariance probe."""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.spatial.distance import directed_hausdorff

from .curve import KnotError, evaluate, from_samples, resample_by_arclength, roundness
from .energy import energy_E_cosine
from .gradient import grad_E_pv, weighted_gradient
from .metric import weight
from .moebius import PoleError, transform_curve


class StepFailure(KnotError):
    """Backtracking ran out of halvings; ``state`` holds the last good data."""

    def __init__(self, message, state):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class FlowConfig:
    step_size: float = 1e-3
    max_steps: int = 500
    resample_every: int = 10
    stop_roundness: float = 1e-3
    stop_gradient_norm: float = 1e-10
    weight: str = "V_cubed"
    max_halvings: int = 20
    growth: float = 2.0
    snapshot_every: int = 0
    max_move: float = 0.1
    implicit: bool = True

    def __post_init__(self):
        if not self.step_size > 0:
            raise KnotError("step_size must be positive")
        if not (self.stop_roundness > 0 and self.stop_gradient_norm > 0):
            raise KnotError("stopping thresholds must be positive")
        if self.max_steps < 0 or self.resample_every < 0 or self.max_halvings < 0:
            raise KnotError("step counts must be non-negative")
        if not self.growth >= 1:
            raise KnotError("growth must be at least 1")

    @classmethod
    def from_dict(cls, data):
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)


@dataclass(frozen=True, eq=False)
class FlowStep:
    """Outcome of one accepted step (or of a converged no-op)."""

    curve: object
    energy: float
    grad_norm: float
    roundness: float
    step_used: float
    halvings: int = 0
    converged: bool = False


@dataclass(eq=False)
class FlowTrace:
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    final: object = None
    converged: bool = False
    reason: str = ""

    def column(self, name):
        return np.array([r[name] for r in self.records])

    def energy_monotone(self, slack=1e-12):
        e = self.column("E")
        return bool(np.all(np.diff(e) <= slack * (1 + np.abs(e[:-1]))))


def _weighted(f, kind):
    """G_E(f), Phi and the weighted gradient G/Phi on the sampled knot f."""
    G = grad_E_pv(f)
    phi = weight(kind, f)
    return G.vectors, phi.values, weighted_gradient(G, phi, f).vectors


def _update(f, G, phi, tau, implicit):
    """Displacement per unit step.

    Explicit: D^2 G with D = Phi^-1/2.  Semi-implicit: the stiff principal
    part of G, (2 pi/3)(-d^2/ds^2)^(3/2) in arc length s (on the unit circle
    it is exactly (2 pi/3)(k^3 - k) on mode k), is written as S A S with A
    the constant-speed operator on the parameter circle and
    S = |f'|^-3/2, and taken implicitly in the symmetric form
    D (I + tau D S A S D)^-1 D G.  The update stays a descent direction,
    the matrix only involves the Möbius invariant product Phi |f'|^3, and
    the step agrees with the explicit one as tau -> 0.
    """
    root = 1 / np.sqrt(phi)
    if not implicit:
        return G * (root ** 2)[:, None]
    k = np.fft.rfftfreq(f.n, 1.0 / f.n)
    col = np.fft.irfft(2 * np.pi / 3 * (k ** 3 - k) * (2 * np.pi) ** 3, n=f.n)
    idx = np.arange(f.n)
    stiff = col[(idx[:, None] - idx[None, :]) % f.n]
    scale = root * f.speed ** -1.5
    system = np.eye(f.n) + tau * scale[:, None] * stiff * scale[None, :]
    sol = cho_solve(cho_factor(system), G * root[:, None])
    return sol * root[:, None]


def _cap(f, G, phi, trial, limit, implicit):
    """Shrink ``trial`` until the largest displacement is at most ``limit``."""
    for _ in range(200):
        move = trial * np.max(np.linalg.norm(_update(f, G, phi, trial, implicit), axis=1))
        if move <= limit:
            break
        # displacement grows at most linearly in the step
        trial *= max(0.5 * limit / move, 1e-3) if not implicit else 0.5
    return trial


def flow_step(curve, cfg=FlowConfig(), step=None, fixed=False):
    """One Euler step along -G^Phi(f), halving while E does not decrease.

    ``step`` overrides cfg.step_size as the first trial; with ``fixed`` the
    step is taken as given without backtracking.
    """
    f = evaluate(curve)
    rnd = roundness(f)
    e0 = energy_E_cosine(f).value
    if rnd < cfg.stop_roundness:
        return FlowStep(curve, e0, 0.0, rnd, 0.0, converged=True)
    G, phi, direction = _weighted(f, cfg.weight)
    gnorm = float(np.max(np.linalg.norm(direction, axis=1)))
    if gnorm < cfg.stop_gradient_norm:
        return FlowStep(curve, e0, gnorm, rnd, 0.0, converged=True)
    trial = cfg.step_size if step is None else float(step)
    if not fixed:
        trial = _cap(f, G, phi, trial, cfg.max_move * rnd * f.diameter / 2, cfg.implicit)
    for halvings in range(cfg.max_halvings + 1):
        try:
            move = _update(f, G, phi, trial, cfg.implicit)
            nxt = from_samples(f.points - trial * move)
            e1 = energy_E_cosine(evaluate(nxt, order=2)).value
        except KnotError:
            if fixed:
                raise
            e1 = np.inf
        if fixed or e1 < e0:
            return FlowStep(nxt, e1, gnorm, rnd, trial, halvings)
        trial /= 2
    raise StepFailure("backtracking exhausted after %d halvings" % cfg.max_halvings,
                      {"coeffs": curve.coeffs.tolist(), "energy": e0, "roundness": rnd,
                       "grad_norm": gnorm, "last_trial": trial})


def run_flow(f0, cfg=FlowConfig()):
    """Iterate flow_step until a stop condition or cfg.max_steps.

    Each trial step starts from ``growth`` times the last accepted one
    (capped by cfg.step_size).
    """
    trace = FlowTrace()
    curve = f0
    trial = cfg.step_size
    for k in range(cfg.max_steps):
        out = flow_step(curve, cfg, step=trial)
        if out.converged:
            trace.converged = True
            trace.reason = "roundness" if out.roundness < cfg.stop_roundness else "gradient"
            break
        trace.records.append({"step": k, "E": out.energy, "grad_norm": out.grad_norm,
                              "roundness": out.roundness, "step_size_used": out.step_used})
        curve = out.curve
        if cfg.resample_every and (k + 1) % cfg.resample_every == 0:
            curve = resample_by_arclength(curve)
        if cfg.snapshot_every and (k + 1) % cfg.snapshot_every == 0:
            trace.snapshots.append((k + 1, curve))
        trial = min(out.step_used * cfg.growth, cfg.step_size)
    else:
        trace.reason = "max_steps"
    trace.final = curve
    return trace


def hausdorff(a, b, samples=4):
    """Symmetric Hausdorff distance between the images of two knots, over diam(a)."""
    pa = _dense(a, samples)
    pb = _dense(b, samples)
    d = max(directed_hausdorff(pa, pb)[0], directed_hausdorff(pb, pa)[0])
    diam = np.max(np.linalg.norm(pa[:, None] - pa[None], axis=-1))
    return d / diam


def _dense(curve, samples):
    n = curve.grid_size * samples
    return curve(np.arange(n) / n)


def invariance_probe(f0, T, cfg=FlowConfig(), steps=None):
    """Compare T(flow(f0)) with flow(T o f0), step by step.

    The flow from f0 chooses the step sizes; the flow from T o f0 replays
    them, so both follow the same time grid.  Returns per-step relative
    Hausdorff distances and energy differences.
    """
    if steps is not None:
        cfg = FlowConfig(**{**cfg.__dict__, "max_steps": steps})
    base = [f0]
    trace = FlowTrace()
    curve = f0
    trial = cfg.step_size
    for k in range(cfg.max_steps):
        out = flow_step(curve, cfg, step=trial)
        if out.converged:
            break
        trace.records.append({"step": k, "E": out.energy, "step_size_used": out.step_used})
        curve = out.curve
        base.append(curve)
        trial = min(out.step_used * cfg.growth, cfg.step_size)
    try:
        image = transform_curve(T, f0)
    except PoleError as exc:
        raise PoleError("transformed knot not compact at step 0") from exc
    dist, de = [hausdorff(image, image)], [0.0]
    cur = image
    for k, rec in enumerate(trace.records):
        out = flow_step(cur, cfg, step=rec["step_size_used"], fixed=True)
        if out.converged:
            break
        cur = out.curve
        try:
            mapped = transform_curve(T, base[k + 1])
        except PoleError as exc:
            raise PoleError("image left the compact regime at step %d" % (k + 1)) from exc
        dist.append(hausdorff(mapped, cur))
        de.append(abs(out.energy - rec["E"]))
    return {"hausdorff": np.array(dist), "energy_diff": np.array(de),
            "steps": len(trace.records), "step_sizes": trace.column("step_size_used")
            if trace.records else np.array([])}
