import json

import numpy as np
import pytest

from mobknot.cli import main
from mobknot.curve import ellipse
from mobknot.formats import dumps, knot_to_json


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def ellipse_file(tmp_path):
    path = tmp_path / "ellipse.json"
    path.write_text(dumps(knot_to_json(ellipse(n=64))))
    return str(path)


def test_energy_json(capsys, ellipse_file):
    code, out, _ = run(capsys, "energy", "--input", ellipse_file)
    rep = json.loads(out)
    assert code == 0 and rep["method"] == "cosine" and rep["grid_size"] == 64
    assert rep["cross_check"]["method"] == "fhw" and rep["cross_check"]["residual"] < 1e-5


@pytest.mark.parametrize("method", ["fhw", "from-v", "hadamard"])
def test_energy_methods(capsys, method):
    code, out, _ = run(capsys, "energy", "--input", "preset:ellipse", "--grid", "64",
                       "--method", method)
    rep = json.loads(out)
    assert code == 0 and rep["cross_check"]["residual"] < 1e-5


def test_energy_is_deterministic(capsys, ellipse_file):
    first = run(capsys, "energy", "--input", ellipse_file)[1]
    assert run(capsys, "energy", "--input", ellipse_file)[1] == first


def test_potential_and_weight_csv(capsys, ellipse_file):
    code, out, _ = run(capsys, "potential", "--input", ellipse_file)
    rows = out.splitlines()
    assert code == 0 and rows[0] == "t,V" and len(rows) == 65
    assert all(float(r.split(",")[1]) > 0 for r in rows[1:])
    code, out, _ = run(capsys, "weight", "--input", ellipse_file, "--weight", "conformal")
    assert code == 0 and out.splitlines()[0] == "t,phi"


def test_angle_csv(capsys):
    code, out, _ = run(capsys, "angle", "--input", "preset:circle", "--grid", "16")
    rows = out.splitlines()
    assert code == 0 and len(rows) == 1 + 16 * 16
    assert max(float(r.split(",")[2]) for r in rows[1:]) < 1e-6


@pytest.mark.parametrize("extra", [[], ["--weight", "v3"], ["--route", "hadamard"]])
def test_grad_csv(capsys, ellipse_file, extra):
    code, out, _ = run(capsys, "grad", "--input", ellipse_file, *extra)
    rows = out.splitlines()
    assert code == 0 and rows[0].startswith("t,gx") and len(rows) == 65


def test_transform(capsys, tmp_path, ellipse_file):
    tr = tmp_path / "t.json"
    tr.write_text(json.dumps({"word": [{"type": "homothety", "k": 3.0}]}))
    code, out, _ = run(capsys, "transform", "--input", ellipse_file, "--transform", str(tr))
    data = json.loads(out)
    assert code == 0 and data["coeffs"]["x"][1][0] == pytest.approx(6.0)


def test_output_file(capsys, tmp_path, ellipse_file):
    dest = tmp_path / "e.json"
    code, out, _ = run(capsys, "energy", "--input", ellipse_file, "--output", str(dest))
    assert code == 0 and out == "" and json.loads(dest.read_text())["value"] > 0


def test_check_circle(capsys):
    code, out, _ = run(capsys, "check", "--input", "preset:circle", "--grid", "64",
                       "--count", "2")
    rep = json.loads(out)
    assert code == 0 and rep["pass"] and rep["environment"]["circle"]
    for name in ("circle_V", "circle_E", "circle_fhw", "circle_gradient"):
        assert rep["checks"][name]["pass"]


def test_check_failure_exit_code(capsys, tmp_path, ellipse_file):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tolerances": {"distance_identity": 0.0}}))
    code, out, _ = run(capsys, "check", "--input", ellipse_file, "--count", "1",
                       "--config", str(cfg))
    rep = json.loads(out)
    assert code == 1 and not rep["pass"]
    assert not rep["checks"]["distance_identity"]["pass"]


def test_config_from_environment(capsys, monkeypatch, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"grid": 32}))
    monkeypatch.setenv("MOBKNOT_CONFIG", str(cfg))
    rep = json.loads(run(capsys, "energy", "--input", "preset:torus_knot")[1])
    assert rep["grid_size"] == 32


def test_flow(capsys, tmp_path):
    snaps = tmp_path / "snaps"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"flow": {"max_steps": 4, "snapshot_every": 2}}))
    code, out, _ = run(capsys, "flow", "--input", "preset:perturbed_circle", "--grid", "64",
                       "--config", str(cfg), "--snapshots", str(snaps))
    rows = out.splitlines()
    assert code == 0 and rows[0] == "step,E,grad_norm,roundness,step_size_used"
    energies = [float(r.split(",")[1]) for r in rows[1:]]
    assert len(energies) == 4 and np.all(np.diff(energies) < 0)
    assert sorted(p.name for p in snaps.iterdir()) == ["final.json", "step_00002.json",
                                                       "step_00004.json"]


def error_of(err):
    data = json.loads(err)
    assert set(data) >= {"error", "message"}
    return data


@pytest.mark.parametrize("argv", [
    ["energy"],
    ["energy", "--input", "preset:nothing"],
    ["energy", "--input", "/no/such/file.json"],
    ["check"],
    ["energy", "--input", "preset:ellipse", "--method", "guess"],
    ["transform", "--input", "preset:ellipse"],
    ["flow", "--input", "preset:ellipse", "--weight", "psi-acyclic"],
])
def test_bad_input_exits_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    error_of(err)


def test_self_intersecting_samples_rejected(capsys, tmp_path):
    t = np.arange(64) / 64
    pts = np.column_stack([np.sin(2 * np.pi * t), np.sin(4 * np.pi * t), 0 * t])
    path = tmp_path / "eight.json"
    path.write_text(json.dumps({"representation": "samples", "points": pts.tolist()}))
    code, _, err = run(capsys, "energy", "--input", str(path))
    data = error_of(err)
    assert code == 2 and data["error"] == "KnotError" and "index" in data


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": 1}))
    code, _, err = run(capsys, "energy", "--input", "preset:ellipse", "--config", str(cfg))
    assert code == 2 and "colour" in error_of(err)["message"]
