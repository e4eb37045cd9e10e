import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml

from lesionsim import ConfigError, estimate_survival, load_config, parse_config, run
from lesionsim.csvio import fmt, read_rows
from lesionsim.engine import ReplicateResult
from lesionsim.rng import replicate_streams
from lesionsim.runner import run_replicates

BASE = {
    "schema_version": 1,
    "mode": "spatial_mc",
    "seed": 7,
    "replicates": 10,
    "t_end": 1.0,
    "output_times": [0.5, 1.0],
    "dt_diff": 0.1,
    "domain": {"shape": "box", "lo": [0.0, 0.0], "hi": [1.0, 1.0]},
    "motion": {"sigma_x": 0.3, "sigma_y": 0.3},
    "rates": {
        "r": {"base": 2.0},
        "a": {"base": 0.1},
        "b": {"kernel": {"form": "ball", "amplitude": 0.2, "epsilon": 0.4}},
    },
    "initial": {"form": "fixed", "n_x": 5, "n_y": 0},
}


def test_round_trip_identical():
    cfg = parse_config(BASE)
    tree = cfg.to_dict()
    again = parse_config(tree)
    assert again.to_dict() == tree
    assert again.canonical_json() == cfg.canonical_json()


def test_unknown_keys_rejected():
    bad = dict(BASE, typo_key=1)
    with pytest.raises(ConfigError, match="typo_key"):
        parse_config(bad)
    bad2 = json.loads(json.dumps(BASE))
    bad2["rates"]["r"]["rate"] = 3.0  # misspelled parameter must not pass silently
    with pytest.raises(ConfigError, match="rate"):
        parse_config(bad2)


def test_schema_version_required():
    bad = {k: v for k, v in BASE.items() if k != "schema_version"}
    with pytest.raises(ConfigError, match="schema_version"):
        parse_config(bad)
    with pytest.raises(ConfigError):
        parse_config(dict(BASE, schema_version=99))


def test_mode_validation():
    with pytest.raises(ConfigError, match="mode"):
        parse_config(dict(BASE, mode="warp_drive"))
    bad = json.loads(json.dumps(BASE))
    bad["mode"] = "nonspatial_mc"
    bad["rates"]["r"]["kernel"] = {"form": "ball", "epsilon": 0.5}
    bad["rates"]["r"]["response"] = {"form": "saturating_up"}
    with pytest.raises(ConfigError, match="constant"):
        parse_config(bad)


def test_float_format_round_trip():
    vals = [1 / 3, 1e-17, 123456.789012345678, np.pi]
    for v in vals:
        assert float(fmt(v)) == v


def test_survival_estimate_formula():
    times = np.array([1.0])
    results = []
    for i in range(100):
        ny = np.array([0 if i < 25 else 1])
        results.append(ReplicateResult(times=times, n_x=np.array([0]), n_y=ny))
    est = estimate_survival(results)
    assert est.survival[0] == pytest.approx(0.25)
    assert est.se[0] == pytest.approx(np.sqrt(0.25 * 0.75 / 100), abs=1e-6)
    assert est.se[0] == pytest.approx(0.0433, abs=1e-4)


def test_replicate_stream_uniqueness():
    seen = set()
    for rep in range(10_000):
        s = replicate_streams(1234, rep)
        seen.add(int(s.clock.integers(1 << 62)))
    assert len(seen) == 10_000


def test_run_writes_artifacts(tmp_path):
    cfg = parse_config(dict(BASE, replicates=5))
    summary = run(cfg, tmp_path / "out")
    assert summary["status"] == "complete"
    for name in ("trajectory.csv", "survival.csv", "manifest.json", "summary.json"):
        assert (tmp_path / "out" / name).exists()
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["rng"].startswith("numpy.random.Philox")
    assert manifest["config"]["seed"] == 7
    assert len(manifest["config_sha256"]) == 64
    header, rows = read_rows(tmp_path / "out" / "trajectory.csv")
    assert header == ["replicate", "t", "n_x", "n_y"]
    assert len(rows) == 5 * 2


def test_byte_reproducibility(tmp_path):
    cfg = parse_config(dict(BASE, replicates=8))
    run(cfg, tmp_path / "a")
    run(cfg, tmp_path / "b")
    for name in ("trajectory.csv", "survival.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_threads_do_not_change_results():
    cfg = parse_config(dict(BASE, replicates=12))
    seq = run_replicates(cfg, threads=1)
    par = run_replicates(cfg, threads=3)
    for a, b in zip(seq, par):
        np.testing.assert_array_equal(a.n_x, b.n_x)
        np.testing.assert_array_equal(a.n_y, b.n_y)


def test_k_scaling_effective_rates():
    cfg = parse_config(dict(BASE, scaling_k=10))
    eff = cfg.effective()
    assert eff["b_amplitude"] == pytest.approx(0.02)
    assert eff["initial_n_x"] == 50


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "lesionsim.cli", *args],
                          capture_output=True, text=True)


def test_cli_validate_and_exit_codes(tmp_path):
    good = tmp_path / "good.yaml"
    good.write_text(yaml.safe_dump(BASE))
    res = _cli("validate", "--config", str(good))
    assert res.returncode == 0 and "config ok" in res.stdout
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump(dict(BASE, mode="nope")))
    res = _cli("validate", "--config", str(bad))
    assert res.returncode == 2
    assert "config error" in res.stderr


def test_cli_run_and_seed_override(tmp_path):
    cfg_file = tmp_path / "cfg.yaml"
    cfg_file.write_text(yaml.safe_dump(dict(BASE, replicates=4)))
    out1 = tmp_path / "o1"
    res = _cli("run", "--config", str(cfg_file), "--out", str(out1), "--seed", "99")
    assert res.returncode == 0, res.stderr
    manifest = json.loads((out1 / "manifest.json").read_text())
    assert manifest["master_seed"] == 99


def test_cli_sweep_dt(tmp_path):
    cfg_file = tmp_path / "cfg.yaml"
    cfg_file.write_text(yaml.safe_dump(dict(BASE, replicates=30, t_end=3.0,
                                            output_times=[3.0])))
    out = tmp_path / "sweep"
    res = _cli("sweep", "--config", str(cfg_file), "--param", "dt_diff",
               "--values", "0.1,0.05", "--out", str(out))
    assert res.returncode == 0, res.stderr
    assert (out / "dtsweep.csv").exists()
    summary = json.loads((out / "dtsweep_summary.json").read_text())
    assert len(summary["means"]) == 2


def test_cli_sweep_k(tmp_path):
    tree = json.loads(json.dumps(BASE))
    tree["rates"]["b"]["kernel"] = {"form": "constant", "amplitude": 0.05}
    tree["motion"] = {"sigma_x": 0.0, "sigma_y": 0.0}
    tree.update(replicates=40, t_end=1.0, output_times=[0.5, 1.0], dt_diff=0.25)
    cfg_file = tmp_path / "cfg.yaml"
    cfg_file.write_text(yaml.safe_dump(tree))
    out = tmp_path / "ksweep"
    res = _cli("sweep", "--config", str(cfg_file), "--param", "k", "--values", "5,20", "--out", str(out))
    assert res.returncode == 0, res.stderr
    summary = json.loads((out / "ksweep_summary.json").read_text())
    assert summary["slope"] < 0  # error shrinks with K
    header, rows = read_rows(out / "ksweep.csv")
    assert header == ["k", "n_replicates", "e_rms", "err_of_mean", "se_mean"]
    assert len(rows) == 2


def test_other_modes_run(tmp_path):
    for mode, extra in (
        ("nonspatial_mc", {}),
        ("master", {}),
        ("mkm", {"mkm": {"variant": "literal", "x0": 20.0, "y0": 0.0}}),
        ("limit_homog", {"limit": {"ux0": 5.0, "uy0": 0.0}}),
        ("limit_spatial", {"limit": {"ux0": 5.0, "uy0": 0.0}, "grid_cells": 6}),
    ):
        tree = json.loads(json.dumps(BASE))
        tree["rates"]["b"]["kernel"] = {"form": "constant", "amplitude": 0.1}
        tree["motion"] = {"sigma_x": 0.1, "sigma_y": 0.1}
        tree.update(mode=mode, **extra)
        cfg = parse_config(tree)
        summary = run(cfg, tmp_path / mode)
        assert summary["status"] == "complete"
