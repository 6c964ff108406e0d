"""Run-time defaults and tolerances, overridable from a JSON file.

The file named by ``--config`` (or the MOBKNOT_CONFIG environment variable)
is merged key by key into DEFAULTS; unknown keys are rejected.
"""
import copy
import json
import os

from .curve import KnotError

ENV_VAR = "MOBKNOT_CONFIG"

DEFAULTS = {
    "grid": 256,
    "seed": 42,
    "count": 25,
    "tolerances": {
        "distance_identity": 1e-10,
        "speed_identity": 1e-8,
        "V_scaling": 1e-6,
        "E_invariance": 1e-5,
        "weight_condition": 1e-5,
        "inner_product": 1e-5,
        "l2_scaling": 1e-10,
        "param_independence": 1e-6,
        "phi0_param_dependence": 1e-3,
        "gradient_fd": 1e-4,
        "route_agreement": 1e-4,
        "J_identities": 1e-4,
        "gradient_equivariance": 1e-4,
        "translation_invariance": 1e-8,
        "homothety_scaling": 1e-6,
        "circle_V": 1e-8,
        "circle_E": 1e-8,
        "circle_fhw": 1e-6,
        "circle_gradient": 1e-6,
        "circle_roundness": 1e-6,
    },
    "ladder": {"levels": 8, "ratio": 0.5, "coarsest": 0.125},
    "flow": {},
}


def _merge(base, extra, path=""):
    for key, val in extra.items():
        if key not in base:
            raise KnotError("unknown config key %r" % (path + key))
        if isinstance(base[key], dict) and key != "flow":
            if not isinstance(val, dict):
                raise KnotError("config key %r must be an object" % (path + key))
            _merge(base[key], val, path + key + ".")
        else:
            base[key] = val
    return base


def load_config(path=None):
    """DEFAULTS merged with the file at ``path`` (or $MOBKNOT_CONFIG)."""
    cfg = copy.deepcopy(DEFAULTS)
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return cfg
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise KnotError("cannot read config %s: %s" % (path, exc)) from None
    except json.JSONDecodeError as exc:
        raise KnotError("invalid JSON in config %s: %s" % (path, exc)) from None
    if not isinstance(data, dict):
        raise KnotError("config must be a JSON object")
    return _merge(cfg, data)
