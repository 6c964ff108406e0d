import json

import numpy as np
import pytest

from mobknot.curve import KnotError, torus_knot
from mobknot.formats import (dumps, gradient_csv, knot_from_json, knot_to_json, load_knot,
                             load_transform, trace_csv)


def test_knot_json_round_trip():
    c = torus_knot(n=64)
    back = knot_from_json(json.loads(dumps(knot_to_json(c))))
    assert np.array_equal(back.coeffs, c.coeffs) and back.grid_size == 64


def test_fourier_lists_without_mode_zero():
    data = {"representation": "fourier", "modes": 1,
            "coeffs": {"x": [[1, 0]], "y": [[0, 1]], "z": [[0, 0]]}}
    c = knot_from_json(data, grid=32)
    assert c.grid_size == 32 and c.coeffs[0, 1, 0] == 1 and c.coeffs[0, 0, 0] == 0


def test_samples_representation():
    t = np.arange(16) / 16
    pts = np.column_stack([np.cos(2 * np.pi * t), np.sin(2 * np.pi * t), 0 * t])
    c = knot_from_json({"representation": "samples", "points": pts.tolist()}, grid=64)
    assert c.grid_size == 64


@pytest.mark.parametrize("data", [[], {"representation": "spline"},
                                  {"representation": "fourier", "modes": 2,
                                   "coeffs": {"x": [[1, 0]], "y": [[0, 1]], "z": [[0, 0]]}},
                                  {"representation": "samples"}])
def test_malformed_knots(data):
    with pytest.raises(KnotError):
        knot_from_json(data)


def test_load_knot_preset_and_files(tmp_path):
    assert load_knot("preset:ellipse", 128).grid_size == 128
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(KnotError):
        load_knot(str(bad))
    tr = tmp_path / "t.json"
    tr.write_text(json.dumps({"word": [{"type": "homothety", "k": 2}]}))
    assert load_transform(str(tr)).apply(np.ones(3)) == pytest.approx([2, 2, 2])
    tr.write_text(json.dumps({"word": [{"type": "shear"}]}))
    with pytest.raises(KnotError):
        load_transform(str(tr))


def test_csv_writers():
    text = gradient_csv(np.array([0.0, 0.5]), np.array([[3.0, 4, 0], [0, 0, 1]]))
    lines = text.splitlines()
    assert lines[0] == "t,gx,gy,gz,norm,route_residual"
    assert lines[1] == "0.0,3.0,4.0,0.0,5.0,"
    rec = [{"step": 0, "E": 1.5, "grad_norm": 2.0, "roundness": 0.1, "step_size_used": 1e-3}]
    assert trace_csv(rec).splitlines()[1] == "0,1.5,2.0,0.1,0.001"
