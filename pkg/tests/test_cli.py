import csv
import json
import os

import numpy as np
import pytest

import app
from fotune.exceptions import OptimizerError


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("horizon_seconds=2\npso.population=6\npso.max_evaluations=30\npso.seed=1\n")
    return str(path)


@pytest.fixture
def data_csv(tmp_path, small_config):
    path = str(tmp_path / "data.csv")
    assert app.main(["simulate-data", "--plant", "reduced", "--config", small_config, "--out", path]) == 0
    return path


def test_simulate_then_tune(tmp_path, small_config, data_csv, capsys):
    out_dir = str(tmp_path / "fr")
    code = app.main(["tune", "--data", data_csv, "--config", small_config, "--out", out_dir])
    assert code == 0
    with open(os.path.join(out_dir, "outcome.json")) as f:
        summary = json.load(f)
    assert summary["strategy"] == "FR-ITAE-min"
    assert summary["evaluations"] <= 30
    assert "FR-ITAE-min" in capsys.readouterr().out


def test_tune_with_overrides(tmp_path, small_config, data_csv):
    out_dir = str(tmp_path / "iae")
    code = app.main(["tune", "--data", data_csv, "--config", small_config, "--out", out_dir,
                     "--criterion", "iae", "--label", "run-A", "--seed", "3", "--population", "4",
                     "--max-evaluations", "8"])
    assert code == 0
    with open(os.path.join(out_dir, "outcome.json")) as f:
        summary = json.load(f)
    assert summary["strategy"] == "run-A"
    assert summary["criterion"] == "iae"
    assert summary["config"]["pso"]["seed"] == 3
    assert summary["evaluations"] == 8


def test_zero_first_input_is_a_data_error(tmp_path, capsys):
    path = tmp_path / "zero.csv"
    path.write_text("# sample_time=0.01\nk,t,u,y\n0,0,0,0\n1,0.01,1,0.1\n")
    code = app.main(["tune", "--data", str(path), "--out", str(tmp_path / "out")])
    assert code == 2
    assert "u_0" in capsys.readouterr().err


def test_optimizer_failure_exit_code(tmp_path, small_config, data_csv, monkeypatch):
    def failing(data, cfg):
        raise OptimizerError("no feasible controller")

    monkeypatch.setattr(app, "tune_fr", failing)
    code = app.main(["tune", "--data", data_csv, "--config", small_config, "--out", str(tmp_path / "x")])
    assert code == 3


def test_unknown_config_key(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("pso.swarm=10\n")
    code = app.main(["evaluate", "--config", str(path), "--phi", "1,0,1,0,1"])
    assert code == 1
    assert "unknown key" in capsys.readouterr().err


def test_usage_errors():
    assert app.main([]) == 2
    assert app.main(["tune"]) == 2


def test_evaluate(small_config, capsys):
    code = app.main(["evaluate", "--plant", "full", "--config", small_config, "--phi", "1,0,1,0,1"])
    assert code == 0
    out = capsys.readouterr().out
    assert "evaluation on P_full" in out
    assert "ITAE" in out


def test_evaluate_rejects_bad_phi(small_config):
    assert app.main(["evaluate", "--config", small_config, "--phi", "1,0,1,0,5"]) == 1


def test_tune_sim_and_compare(tmp_path, small_config, data_csv, capsys):
    fr_dir, mb_dir, cmp_dir = (str(tmp_path / name) for name in ("fr", "mb", "cmp"))
    assert app.main(["tune", "--data", data_csv, "--config", small_config, "--out", fr_dir]) == 0
    assert app.main(["tune-sim", "--plant", "full", "--evaluation-plant", "reduced",
                     "--config", small_config, "--out", mb_dir]) == 0
    capsys.readouterr()
    code = app.main(["compare", "--outcomes", fr_dir, mb_dir, "--plant", "reduced",
                     "--config", small_config, "--out", cmp_dir])
    assert code == 0
    out = capsys.readouterr().out
    assert "FR-ITAE-min" in out and "MB-ITAE-min" in out
    assert sorted(os.listdir(cmp_dir)) == ["comparison.csv", "comparison.txt", "step_responses.csv"]


def test_compare_missing_outcome(tmp_path, small_config):
    code = app.main(["compare", "--outcomes", str(tmp_path), "--config", small_config,
                     "--out", str(tmp_path / "cmp")])
    assert code == 1


def test_open_loop_noisy_data(tmp_path, small_config):
    path = str(tmp_path / "ol.csv")
    code = app.main(["simulate-data", "--plant", "full", "--config", small_config, "--out", path,
                     "--open-loop-step", "1.0", "--noise-std", "0.001", "--noise-seed", "5"])
    assert code == 0
    with open(path) as f:
        lines = f.read().splitlines()
    assert lines[0] == "# sample_time=0.01"
    assert lines[2] == "k,t,u,y"
    assert len(lines) == 3 + 201


def test_freq_response_half_order(tmp_path, capsys):
    path = tmp_path / "fr.csv"
    assert app.main(["freq-response", "--gamma", "0.5", "--out", str(path)]) == 0
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 200
    omegas = np.array([float(r["omega"]) for r in rows])
    phases = np.array([float(r["phase_deg"]) for r in rows])
    mid = int(np.argmin(np.abs(np.log10(omegas) - np.log10(np.sqrt(1e-6 * 1e3)))))
    assert phases[mid] == pytest.approx(45.0, abs=1.0)
    assert "s^0.5" in capsys.readouterr().out


def test_freq_response_bad_range(tmp_path):
    code = app.main(["freq-response", "--gamma", "0.5", "--out", str(tmp_path / "f.csv"),
                     "--omega-min", "10", "--omega-max", "1"])
    assert code == 1
