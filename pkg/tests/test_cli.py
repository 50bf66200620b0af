"""Tests for the command-line interface."""

import json
import os

import numpy as np
import pytest

from rkhs_oed.cli import main


def _design_config(tmp_path, **overrides):
    spec = {
        "objective": "E",
        "estimator": "ridge",
        "lam": 1.0,
        "sigma": 1.0,
        "functional": [[1.0, 0.0], [0.0, 1.0]],
        "candidates": [[1.0, 0.0], [0.0, 1.0]],
        "solver": "mirror",
        "iters": 100,
    }
    spec.update(overrides)
    path = tmp_path / "design.json"
    path.write_text(json.dumps(spec))
    return str(path)


def test_design_subcommand_writes_result(tmp_path):
    cfg = _design_config(tmp_path, budget=10)
    out = tmp_path / "result.json"
    main(["design", "--config", cfg, "--out", str(out)])
    result = json.load(open(out))
    assert set(result) == {"eta", "counts", "objective_value", "trace"}
    eta = np.array(result["eta"])
    assert abs(eta.sum() - 1.0) <= 1e-10
    assert np.abs(eta - 0.5).max() <= 1e-3          # symmetric instance
    assert sum(result["counts"]) >= 10
    assert result["objective_value"] == pytest.approx(1.5, abs=1e-6)
    assert len(result["trace"]) == 101              # start value + per-iter


def test_design_subcommand_stdout(tmp_path, capsys):
    cfg = _design_config(tmp_path)
    main(["design", "--config", cfg])
    result = json.loads(capsys.readouterr().out)
    assert result["counts"] is None
    assert result["objective_value"] == pytest.approx(1.5, abs=1e-6)


def test_design_subcommand_greedy(tmp_path):
    cfg = _design_config(tmp_path, solver="greedy", budget=6)
    out = tmp_path / "result.json"
    main(["design", "--config", cfg, "--out", str(out)])
    result = json.load(open(out))
    assert result["counts"] == [3, 3]
    trace = result["trace"]
    assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))


def test_design_subcommand_rejects_bad_configs(tmp_path):
    with pytest.raises(SystemExit, match="unknown design config keys"):
        main(["design", "--config", _design_config(tmp_path, typo=1)])
    with pytest.raises(SystemExit, match="needs a budget"):
        main(["design", "--config",
              _design_config(tmp_path, solver="greedy")])
    with pytest.raises(SystemExit, match="unknown solver"):
        main(["design", "--config",
              _design_config(tmp_path, solver="simplex", budget=5)])


def test_scenario_subcommand_runs_ellipse(tmp_path, capsys):
    cfg = {
        "schema": 1,
        "scenario": "ellipse",
        "seed": 3,
        "params": {"n_points": 12},
    }
    cfg_path = tmp_path / "ellipse.json"
    cfg_path.write_text(json.dumps(cfg))
    out_dir = tmp_path / "out"
    main(["ellipse", "--config", str(cfg_path), "--out", str(out_dir)])
    assert os.path.exists(out_dir / "ellipse.csv")
    meta = json.load(open(out_dir / "meta.json"))
    assert meta["config"]["seed"] == 3
    assert "wrote outputs" in capsys.readouterr().out


def test_scenario_subcommand_seed_override(tmp_path):
    cfg = {"schema": 1, "scenario": "ellipse", "seed": 3,
           "params": {"n_points": 12}}
    cfg_path = tmp_path / "ellipse.json"
    cfg_path.write_text(json.dumps(cfg))
    out_dir = tmp_path / "out"
    main(["ellipse", "--config", str(cfg_path), "--out", str(out_dir),
          "--seed", "99"])
    meta = json.load(open(out_dir / "meta.json"))
    assert meta["config"]["seed"] == 99


def test_scenario_subcommand_defaults_without_config(tmp_path):
    # no --config: built-in defaults; only ellipse is fast enough to run raw
    out_dir = tmp_path / "out"
    main(["ellipse", "--out", str(out_dir)])
    assert os.path.exists(out_dir / "ellipse.csv")


def test_scenario_config_mismatch_exits(tmp_path):
    cfg = {"schema": 1, "scenario": "ellipse"}
    cfg_path = tmp_path / "c.json"
    cfg_path.write_text(json.dumps(cfg))
    with pytest.raises(SystemExit, match="config is for scenario"):
        main(["gradient", "--config", str(cfg_path), "--out", str(tmp_path)])


def test_scenario_requires_out(tmp_path):
    cfg = {"schema": 1, "scenario": "ellipse"}
    cfg_path = tmp_path / "c.json"
    cfg_path.write_text(json.dumps(cfg))
    with pytest.raises(SystemExit, match="need --out"):
        main(["ellipse", "--config", str(cfg_path)])


def test_unknown_command_exits():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
