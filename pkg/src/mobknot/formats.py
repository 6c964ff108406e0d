"""Knot and transform JSON, CSV emitters."""
import csv
import io
import json

import numpy as np

from .curve import DEFAULT_GRID, KnotCurve, KnotError, from_samples, preset
from .moebius import MoebiusTransform

_AXES = ("x", "y", "z")


def knot_to_json(curve):
    """Canonical Fourier form; each axis lists [a_k, b_k] for k = 0..M."""
    return {
        "representation": "fourier",
        "modes": curve.modes,
        "coeffs": {ax: curve.coeffs[c].tolist() for c, ax in enumerate(_AXES)},
        "grid_size": curve.grid_size,
    }


def knot_from_json(data, grid=None):
    """Parse either representation; ``grid`` overrides the stored grid size.

    A Fourier axis list of length M+1 starts at mode 0; a list of length M
    starts at mode 1 and the curve has zero mean on that axis.
    """
    if not isinstance(data, dict):
        raise KnotError("knot JSON must be an object")
    rep = data.get("representation")
    if rep == "fourier":
        try:
            modes = int(data["modes"])
            axes = [np.asarray(data["coeffs"][ax], dtype=float) for ax in _AXES]
        except (KeyError, TypeError, ValueError) as exc:
            raise KnotError("malformed fourier knot: %s" % exc) from None
        coeffs = np.zeros((3, modes + 1, 2))
        for c, arr in enumerate(axes):
            if arr.ndim != 2 or arr.shape[1] != 2:
                raise KnotError("coefficients of %s must be [a, b] pairs" % _AXES[c])
            if arr.shape[0] == modes + 1:
                coeffs[c] = arr
            elif arr.shape[0] == modes:
                coeffs[c, 1:] = arr
            else:
                raise KnotError("axis %s has %d pairs for %d modes"
                                % (_AXES[c], arr.shape[0], modes))
        n = int(grid or data.get("grid_size", DEFAULT_GRID))
        return KnotCurve(coeffs, n)
    if rep == "samples":
        try:
            pts = np.asarray(data["points"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise KnotError("malformed sample knot: %s" % exc) from None
        curve = from_samples(pts)
        return curve.with_grid(int(grid)) if grid else curve
    raise KnotError("unknown representation %r" % rep)


def load_knot(path, grid=None):
    """Read a knot JSON file, or build a preset from ``preset:name``."""
    if path.startswith("preset:"):
        name = path.split(":", 1)[1]
        return preset(name, n=int(grid or DEFAULT_GRID))
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise KnotError("invalid JSON in %s: %s" % (path, exc)) from None
    return knot_from_json(data, grid)


def load_transform(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise KnotError("invalid JSON in %s: %s" % (path, exc)) from None
    try:
        return MoebiusTransform.from_json(data)
    except (KeyError, TypeError) as exc:
        raise KnotError("malformed transform: %s" % exc) from None


def dumps(obj):
    return json.dumps(obj, indent=2, default=_plain) + "\n"


def _plain(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError("cannot serialize %r" % type(x))


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def potential_csv(t, v):
    return _csv(("t", "V"), zip(t, v))


def angle_csv(theta):
    n = theta.shape[0]
    rows = ((i, j, theta[i, j]) for i in range(n) for j in range(n))
    return _csv(("i", "j", "theta"), rows)


def weight_csv(t, phi):
    return _csv(("t", "phi"), zip(t, phi))


def gradient_csv(t, g, residual=None):
    norm = np.linalg.norm(g, axis=1)
    res = [None] * len(t) if residual is None else residual
    return _csv(("t", "gx", "gy", "gz", "norm", "route_residual"),
                ((ti, *gi, ni, ri) for ti, gi, ni, ri in zip(t, g, norm, res)))


def trace_csv(records):
    cols = ("step", "E", "grad_norm", "roundness", "step_size_used")
    return _csv(cols, ([r[c] for c in cols] for r in records))
