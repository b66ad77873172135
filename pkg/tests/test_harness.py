import json
import subprocess
import sys

import numpy as np
import pytest

from qlz.errors import ConfigInvalid
from qlz.harness import ExperimentConfig, ResultTable, StaleGolden, acceptance, read_table, run
import importlib

acc_mod = importlib.import_module("qlz.harness.acceptance")
from qlz.harness.cli import EXIT_CONFIG, EXIT_OK, main


def field_of(cfg):
    with pytest.raises(ConfigInvalid) as info:
        cfg.validate()
    return info.value.field


def test_validation_errors_name_the_field():
    assert field_of(ExperimentConfig("nope", {})) == "experiment"
    assert field_of(ExperimentConfig("spectral", {})) == "seed"
    assert field_of(ExperimentConfig("spectral", {"seed": -1})) == "seed"
    assert field_of(ExperimentConfig("spectral", {"seed": 1, "colour": 3})) == "colour"
    assert field_of(ExperimentConfig("evolve", {"seed": 1, "L": 0})) == "L"
    assert field_of(ExperimentConfig("evolve", {"seed": 1, "lam": float("nan")})) == "lam"
    assert field_of(ExperimentConfig("evolve", {"seed": 1, "threads": 0})) == "threads"
    ExperimentConfig("census", {"k": 3}).validate()


def test_scaling_guard():
    ok = ExperimentConfig("kinetic-compare", {"seed": 1, "lam": 0.3, "t": 10.0, "T": 0.9})
    ok.validate()
    assert field_of(ExperimentConfig("kinetic-compare", {"seed": 1, "lam": 0.3, "t": 10.0, "T": 1.0})) == "T"
    diffusive = {"seed": 1, "lam": 0.5, "t": 8.0, "scaling": "diffusive"}
    assert field_of(ExperimentConfig("kinetic-compare", {**diffusive, "T": 1.0})) == "kappa"
    ExperimentConfig("kinetic-compare", {**diffusive, "kappa": 1.0, "T": 1.0}).validate()


def test_config_hash_and_json(tmp_path):
    a = ExperimentConfig("census", {"k": 4})
    b = ExperimentConfig("census", {})
    c = ExperimentConfig("census", {"k": 5})
    assert ExperimentConfig("census", {"k": 6}).config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()
    path = tmp_path / "c.json"
    path.write_text(json.dumps(a.to_dict()))
    assert ExperimentConfig.from_json(path).config_hash() == a.config_hash()
    path.write_text("{not json")
    with pytest.raises(ConfigInvalid):
        ExperimentConfig.from_json(path)


def test_thread_cap(monkeypatch):
    cfg = ExperimentConfig("evolve", {"seed": 1, "threads": 8})
    monkeypatch.setenv("QLZ_THREADS", "2")
    assert cfg.effective_threads() == 2
    monkeypatch.delenv("QLZ_THREADS")
    assert cfg.effective_threads() == 8


def test_result_table_requires_error_columns(tmp_path):
    with pytest.raises(ValueError):
        ResultTable({"x": [1.0], "y": [2.0]}, stochastic=("y",))
    with pytest.raises(ValueError):
        ResultTable({"x": [1.0, 2.0], "y": [2.0]})
    t = ResultTable({"x": [1.0, 2.0], "y": [0.5, 0.25], "y_err": [0.1, 0.1]}, {"x": "s"}, ("y",),
                    {"config_hash": "abc"})
    path = tmp_path / "t.csv"
    t.to_csv(path)
    back = read_table(path, config_hash="abc")
    assert back.units == {"x": "s"} and back.stochastic == ("y",)
    np.testing.assert_array_equal(back["y"], [0.5, 0.25])
    with pytest.raises(StaleGolden):
        read_table(path, config_hash="def")


def test_census_run_is_byte_identical(tmp_path):
    cfg = ExperimentConfig("census", {"k": 6}, str(tmp_path))
    table = run(cfg)
    first = (tmp_path / "census.csv").read_bytes()
    run(cfg)
    assert (tmp_path / "census.csv").read_bytes() == first
    from qlz import graphs
    assert dict(zip(table["degree"], table["count"])) == graphs.degree_census(6)
    assert table["count"].sum() == 720
    meta = json.loads((tmp_path / "census.json").read_text())
    assert meta["metadata"]["config_hash"] == cfg.config_hash() and "wall_time_s" in meta


def test_spectral_run_is_reproducible(tmp_path):
    cfg = ExperimentConfig("spectral", {"seed": 3, "energies": [1.0, 3.0], "n_samples": 100_000}, str(tmp_path))
    a = run(cfg, write=False)
    b = run(cfg, write=False)
    np.testing.assert_array_equal(a["phi"], b["phi"])
    assert "phi_err" in a.columns


def test_evolve_run_writes_field(tmp_path):
    from qlz import fieldio
    cfg = ExperimentConfig("evolve", {"seed": 1, "L": 8, "t": 0.2, "dt": 0.05, "n_frames": 2}, str(tmp_path))
    table = run(cfg)
    np.testing.assert_allclose(table["norm"], 1.0, atol=1e-10)
    psi = fieldio.read_field(tmp_path / "evolve.final_state.qlzf")
    assert psi.amplitudes.shape == (8, 8, 8)


def test_boltzmann_run_slope(tmp_path):
    cfg = ExperimentConfig("boltzmann", {"seed": 5, "energy": 3.0, "T": 20.0, "n_paths": 10_000}, str(tmp_path))
    table = run(cfg)
    m = table.metadata
    assert abs(m["slope"] / m["predicted_slope"] - 1) <= 0.05
    assert "msd_err" in table.columns


def test_cli_exit_codes(tmp_path):
    out = str(tmp_path)
    assert main(["census", "--k", "3", "--output", out]) == EXIT_OK
    assert main(["spectral", "--output", out]) == EXIT_CONFIG
    assert main(["kinetic-compare", "--seed", "1", "--lam", "0.3", "--t", "10", "--T", "1.0",
                 "--output", out]) == EXIT_CONFIG
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"parameters": {"k": 4}}))
    assert main(["census", "--k", "3", "--config", str(cfg), "--output", out]) == EXIT_OK
    assert read_table(tmp_path / "census.csv")["count"].sum() == 24


def test_console_script(tmp_path):
    res = subprocess.run([sys.executable, "-m", "qlz.harness.cli", "census", "--k", "2", "--output", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "census.csv").exists()


def test_acceptance_runner_reports_failures_without_raising(monkeypatch, tmp_path):
    @acc_mod._timed(99, "always fails")
    def broken():
        raise RuntimeError("boom")

    res = broken()
    assert not res.passed and "boom" in res.details["error"]
    lines = []
    monkeypatch.setattr(acc_mod, "FAST", (acc_mod.criterion_quantum,))
    report = tmp_path / "r.json"
    results = acceptance("", report_path=str(report), echo=lines.append)
    assert [r.number for r in results] == [4] and lines[0].startswith("[PASS] criterion 4")
    assert json.loads(report.read_text())["suite"] == "fast"
    with pytest.raises(ValueError):
        acceptance("medium")
