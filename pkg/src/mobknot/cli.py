"""Command-line entry point: ``mobknot <command> --input KNOT ...``.

Reports are JSON, fields and traces CSV.  Every failure on bad input exits
with status 2 and a JSON error object on stderr; ``check`` exits 1 when any
check fails.
"""
import argparse
import json
import os
import sys

import numpy as np

from .checks import CheckReport, run_checks
from .config import load_config
from .conformal import angle_field, potential_V_cosine, potential_V_hadamard
from .curve import KnotError, evaluate
from .energy import MuKernel, energy_E_cosine, energy_E_fhw, energy_E_from_V
from .finite_part import Ladder
from .flow import FlowConfig, run_flow
from .formats import (angle_csv, dumps, gradient_csv, knot_to_json, load_knot, load_transform,
                      potential_csv, trace_csv, weight_csv)
from .gradient import grad_E_hadamard, grad_E_pv, weighted_gradient
from .metric import weight
from .moebius import transform_curve

WEIGHTS = {
    "v3": ("V_cubed", None),
    "phi0": ("phi0", None),
    "psi-sin": ("psi_cubed", "abs_sine"),
    "psi-acyclic": ("psi_cubed", "acyclicity"),
    "conformal": ("conformal_arclength", None),
}


def _weight(name, f):
    kind, tag = WEIGHTS[name]
    return weight(kind, f, None if tag is None else MuKernel(tag))


def _ladder(cfg):
    return Ladder(**cfg["ladder"])


def _knot(args, cfg, path=None):
    """--grid wins; otherwise files keep their stored grid and presets use the config."""
    path = path or args.input
    default = cfg["grid"] if path.startswith("preset:") else None
    return load_knot(path, args.grid or default)


def cmd_energy(args, cfg):
    f = evaluate(_knot(args, cfg))
    cosine = energy_E_cosine(f)
    if args.method == "cosine":
        rep, other = cosine, energy_E_fhw(f)
    elif args.method == "fhw":
        rep, other = energy_E_fhw(f), cosine
    elif args.method == "from-v":
        rep, other = energy_E_from_V(potential_V_cosine(f), f), cosine
    else:
        profile = potential_V_hadamard(f, ladder=_ladder(cfg))
        rep, other = energy_E_from_V(profile, f), cosine
    out = rep.to_json()
    if args.method in ("from-v", "hadamard"):
        out["potential"] = "cosine" if args.method == "from-v" else "hadamard"
    out["cross_check"] = {"method": other.method, "value": other.value,
                          "residual": abs(rep.value - other.value)}
    return dumps(out)


def cmd_potential(args, cfg):
    f = evaluate(_knot(args, cfg))
    if args.method == "cosine":
        v = potential_V_cosine(f).v
    elif args.method == "hadamard":
        v = potential_V_hadamard(f, ladder=_ladder(cfg)).v
    else:
        raise KnotError("potential supports --method cosine or hadamard")
    return potential_csv(f.t, v)


def cmd_angle(args, cfg):
    return angle_csv(angle_field(evaluate(_knot(args, cfg))).theta)


def cmd_weight(args, cfg):
    f = evaluate(_knot(args, cfg))
    return weight_csv(f.t, _weight(args.weight or "v3", f).values)


def cmd_grad(args, cfg):
    f = evaluate(_knot(args, cfg))
    if args.route == "hadamard":
        G = grad_E_hadamard(f, ladder=_ladder(cfg))
    else:
        G = grad_E_pv(f)
    vec = G.vectors
    if args.weight:
        vec = weighted_gradient(G, _weight(args.weight, f), f).vectors
    return gradient_csv(f.t, vec, G.residual)


def cmd_transform(args, cfg):
    if not args.transform:
        raise KnotError("transform needs --transform FILE")
    T = load_transform(args.transform)
    return dumps(knot_to_json(transform_curve(T, _knot(args, cfg))))


def cmd_check(args, cfg):
    paths = args.inputs
    seed = cfg["seed"] if args.seed is None else args.seed
    count = cfg["count"] if args.count is None else args.count
    reports = []
    for path in paths:
        rep = run_checks(_knot(args, cfg, path), seed=seed, count=count,
                         tolerances=cfg["tolerances"], ladder=_ladder(cfg))
        reports.append((path, rep))
    if len(reports) == 1:
        merged = reports[0][1]
        merged.environment["input"] = paths[0]
    else:
        merged = CheckReport(environment={"inputs": {p: r.environment for p, r in reports}})
        for path, rep in reports:
            for name, c in rep.checks.items():
                merged.checks["%s:%s" % (path, name)] = c
    return dumps(merged.to_json()), merged.passed


def cmd_flow(args, cfg):
    settings = dict(cfg["flow"])
    if args.weight:
        kind, tag = WEIGHTS[args.weight]
        if tag not in (None, "abs_sine"):
            raise KnotError("flow supports the weights v3, phi0, psi-sin and conformal")
        settings["weight"] = kind
    fc = FlowConfig.from_dict(settings)
    trace = run_flow(_knot(args, cfg), fc)
    if args.snapshots:
        os.makedirs(args.snapshots, exist_ok=True)
        for step, curve in trace.snapshots:
            _write(os.path.join(args.snapshots, "step_%05d.json" % step),
                   dumps(knot_to_json(curve)))
        _write(os.path.join(args.snapshots, "final.json"), dumps(knot_to_json(trace.final)))
    return trace_csv(trace.records)


COMMANDS = {
    "energy": cmd_energy,
    "potential": cmd_potential,
    "angle": cmd_angle,
    "weight": cmd_weight,
    "grad": cmd_grad,
    "transform": cmd_transform,
    "check": cmd_check,
    "flow": cmd_flow,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class UsageError(Exception):
    pass


def build_parser():
    p = _Parser(prog="mobknot", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        if name == "check":
            s.add_argument("--input", dest="inputs", action="append",
                           help="knot JSON or preset:NAME (repeatable)")
        else:
            s.add_argument("--input", required=True, help="knot JSON or preset:NAME")
        s.add_argument("--output", "--out", help="write here instead of stdout")
        s.add_argument("--grid", type=int, help="grid size N")
        s.add_argument("--config", help="JSON config (default $MOBKNOT_CONFIG)")
        if name in ("energy", "potential"):
            s.add_argument("--method", default="cosine",
                           choices=("cosine", "fhw", "from-v", "hadamard"))
        if name in ("grad", "weight", "flow"):
            s.add_argument("--weight", choices=tuple(WEIGHTS))
        if name == "grad":
            s.add_argument("--route", default="pv", choices=("pv", "hadamard"))
        if name == "transform":
            s.add_argument("--transform", help="Möbius word JSON")
        if name == "check":
            s.add_argument("--seed", type=int)
            s.add_argument("--count", type=int)
        if name == "flow":
            s.add_argument("--snapshots", help="directory for snapshot knot JSON")
    return p


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _fail(exc):
    err = {"error": type(exc).__name__, "message": str(exc)}
    index = getattr(exc, "index", None)
    if index is not None:
        err["index"] = int(index)
    sys.stderr.write(json.dumps(err) + "\n")
    return 2


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(exc)
    if args.command == "check" and not args.inputs:
        return _fail(KnotError("check needs at least one --input"))
    if args.command != "check":
        args.inputs = None
    try:
        cfg = load_config(args.config)
        with np.errstate(all="ignore"):
            result = COMMANDS[args.command](args, cfg)
        text, ok = result if isinstance(result, tuple) else (result, True)
        if args.output:
            _write(args.output, text)
        else:
            sys.stdout.write(text)
    except (KnotError, OSError, ValueError) as exc:
        return _fail(exc)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
