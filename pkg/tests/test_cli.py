import json
import subprocess
import sys

import pytest

from ihgmm.cli import main
from ihgmm.model import NoiseSpec, generate_dataset
from ihgmm.rng import substream


def _config(tmp_path, **kw):
    cfg = {
        "name": "clitest",
        "cells": [{"n": 40, "p": 30, "K": 2, "R": 5.0, "noise": "SHe"}],
        "replicates": 2,
        "base_seed": 5,
        "kmeans": {"restarts": 2},
    }
    cfg.update(kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_experiment_run_from_config(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["experiment", "run", str(_config(tmp_path)), "--out", str(out), "--methods", "ihsc,psc"])
    assert code == 0
    assert (out / "clitest.csv").is_file() and (out / "clitest.json").is_file()
    rep = json.loads((out / "clitest.json").read_text())
    assert rep["config"]["methods"] == ["ihsc", "psc"]
    assert len(rep["rows"]) == 2
    assert "IhSC" in capsys.readouterr().out


def test_experiment_overrides(tmp_path):
    out = tmp_path / "o"
    assert main(["experiment", "run", str(_config(tmp_path)), "--replicates", "1", "--seed", "9",
                 "--out", str(out), "--no-diagnostics"]) == 0
    rep = json.loads((out / "clitest.json").read_text())
    assert rep["config"]["replicates"] == 1 and rep["config"]["base_seed"] == 9
    assert "diagnostics" not in rep["replicate_log"][0]


def test_experiment_list(capsys):
    assert main(["experiment", "list"]) == 0
    assert "exp3\t20 cells" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        ["experiment", "run", "exp99"],
        ["experiment", "run", "exp3", "--methods", ""],
        ["experiment", "run", "exp3", "--methods", "ihsc,foo"],
        ["experiment", "run", "exp3", "--replicates", "0"],
        ["experiment", "run", "exp3", "--jobs", "0"],
        ["benchmark", "run", "--data", "/nonexistent.csv"],
        ["diagnose", "--n", "5", "--p", "5", "--K", "6"],
    ],
)
def test_validation_errors_exit_1(argv, tmp_path):
    assert main(argv + (["--out", str(tmp_path)] if argv[0] == "experiment" else [])) == 1


def test_bad_config_file_exit_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["experiment", "run", str(bad), "--out", str(tmp_path)]) == 1
    assert main(["experiment", "run", str(_config(tmp_path, cells=[{"n": 3, "p": 3, "K": 5}]))]) == 1


def test_usage_error_exit_1(capsys):
    with pytest.raises(SystemExit) as err:
        main(["benchmark", "run"])
    assert err.value.code == 1


def test_runtime_failure_exit_2(tmp_path, monkeypatch):
    from ihgmm import cli
    from ihgmm.exceptions import ConvergenceFailure

    def boom(*a, **k):
        raise ConvergenceFailure("forced")

    monkeypatch.setattr(cli, "run_experiment", boom)
    assert main(["experiment", "run", str(_config(tmp_path)), "--out", str(tmp_path)]) == 2


def test_benchmark_iris(data_dir, capsys):
    code = main(["benchmark", "run", "--data", str(data_dir / "iris.csv"), "--label-col", "label",
                 "--k", "3", "--standardize", "false", "--json"])
    assert code == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["method"] for r in rows] == ["IhSC", "PSC", "KMeansRaw"]
    assert all(r["n"] == 150 for r in rows)


def test_benchmark_cardinality_mismatch_exit_1(data_dir):
    assert main(["benchmark", "run", "--data", str(data_dir / "iris.csv"), "--label-col", "label", "--k", "4"]) == 1


def test_diagnose_noiseless_instance(capsys):
    assert main(["diagnose", "--n", "60", "--p", "40", "--K", "3", "--R", "1", "--beta", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["mu1"] == pytest.approx(1.0)
    assert all(out["lemma_checks"].values())


def test_diagnose_ground_truth_file(tmp_path, capsys):
    _, t = generate_dataset(50, 20, 2, 4.0, 3.0, 0.6, NoiseSpec("GHe"), substream(1))
    path = tmp_path / "truth.json"
    path.write_text(t.to_json())
    assert main(["diagnose", "--data", str(path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["delta"] == pytest.approx(4.0)
    assert out["cluster_sizes"] == t.cluster_sizes().tolist()


def test_diagnose_malformed_file_exit_1(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"labels": [0]}')
    assert main(["diagnose", "--data", str(path)]) == 1


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "ihgmm.cli", "experiment", "list"], capture_output=True, text=True)
    assert out.returncode == 0 and "exp4" in out.stdout


def test_degenerate_truth_exit_1(tmp_path):
    path = tmp_path / "flat.json"
    path.write_text(json.dumps({"K": 2, "labels": [0, 1], "scales": [1, 1], "centers": [[1, 1], [1, 1]]}))
    assert main(["diagnose", "--data", str(path)]) == 1
