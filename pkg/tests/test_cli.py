import csv
import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from dpda.cli import main
from dpda.data_io import load_benchmark


def run(*argv):
    return main([str(a) for a in argv])


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture
def trained(tmp_path):
    bench, model = tmp_path / "bench", tmp_path / "model"
    assert run("--seed", 7, "synth", "--n", 100, "--group-size", 1, "--out", bench) == 0
    assert run("train", "--bench", bench, "--family", "lssvm", "--seed", 7, "--out", model) == 0
    return bench, model / "model.json"


def test_synth_singletons(trained):
    bench = load_benchmark(trained[0])
    assert len(bench.groups) == 100
    assert all(len(g) == 1 for g in bench.groups)
    assert bench.manifest.seed == 7


def test_synth_odd_n_is_invalid(tmp_path, capsys):
    assert run("synth", "--n", 101, "--out", tmp_path) == 3
    assert "even" in capsys.readouterr().err


def test_unknown_family_is_usage_error(trained):
    assert run("train", "--bench", trained[0], "--family", "svm") == 2


def test_missing_subcommand_is_usage_error():
    assert run() == 2


def test_train_accuracy_reported(trained, tmp_path, capsys):
    assert run("train", "--bench", trained[0], "--family", "lssvm", "--seed", 7, "--out", tmp_path / "m2") == 0
    out = json.loads(capsys.readouterr().out)
    assert out["train_accuracy"] >= 0.95
    assert digest(tmp_path / "m2" / "model.json") == digest(trained[1])


@pytest.mark.parametrize("family", ["forest", "mlp"])
def test_train_same_seed_same_file(family, trained, tmp_path):
    for d in ("a", "b"):
        assert run("train", "--bench", trained[0], "--family", family, "--epochs", 5, "--seed", 1,
                   "--out", tmp_path / d) == 0
    assert digest(tmp_path / "a" / "model.json") == digest(tmp_path / "b" / "model.json")


def test_audit_artifacts(trained, tmp_path):
    out = tmp_path / "audit"
    assert run("audit", "--bench", trained[0], "--model", trained[1], "--method", "add", "--access", "wb",
               "--seed", 7, "--out", out) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["method"] == "add" and rep["metric"] == "l2" and rep["curve_ref"] == "curve.csv"
    assert rep["config_echo"]["run"]["epsilon"] == 0.5
    with (out / "scores.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 100 and set(rows[0]) == {"group_id", "truth", "score", "decided"}
    with (out / "curve.csv").open() as fh:
        assert len(list(csv.DictReader(fh))) == 97


def test_audit_white_box_f_measure(trained, tmp_path):
    out = tmp_path / "audit"
    assert run("audit", "--bench", trained[0], "--model", trained[1], "--method", "add", "--access", "wb",
               "--seed", 7, "--out", out) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["metrics"]["f_measure"] >= 0.9, rep["metrics"]


def test_audit_confidence_scores(trained, tmp_path):
    assert run("audit", "--bench", trained[0], "--model", trained[1], "--method", "cc", "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert all(0.5 <= v["score"] <= 1.0 for v in rep["verdicts"])


def test_audit_multiplicative_black_box(trained, tmp_path):
    assert run("audit", "--bench", trained[0], "--model", trained[1], "--method", "mul", "--access", "bb",
               "--mul-iters", 3, "--out", tmp_path) == 0
    W = json.loads((tmp_path / "W.json").read_text())
    assert np.asarray(W["W"]).shape == (2, 2)
    assert 1 <= len(W["objective_trace"]) <= 3
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["extras"]["W_ref"] == "W.json"
    assert rep["extras"]["objective_trace"] == W["objective_trace"]
    assert "surrogate_fidelity" in rep["extras"]


def test_audit_dimension_mismatch(trained, tmp_path):
    other = tmp_path / "b3"
    assert run("synth", "--source", "blobs", "--dim", 3, "--out", other) == 0
    assert run("audit", "--bench", other, "--model", trained[1], "--out", tmp_path) == 3


def test_numerical_failure_exit_code(tmp_path):
    p = tmp_path / "flat.csv"
    p.write_text("f0,label\n" + "".join(f"1.0,{i % 2}\n" for i in range(20)))
    assert run("synth", "--source", "csv", "--path", p, "--classes", "0,1", "--out", tmp_path / "b") == 0
    assert run("train", "--bench", tmp_path / "b", "--family", "lssvm", "--C", 1e20, "--out", tmp_path) == 4


def test_eval_reproduces_report_metrics(trained, tmp_path):
    assert run("audit", "--bench", trained[0], "--model", trained[1], "--seed", 7, "--out", tmp_path) == 0
    assert run("eval", "--report", tmp_path / "report.json", "--bench", trained[0], "--out", tmp_path) == 0
    ev = json.loads((tmp_path / "eval.json").read_text())
    rep = json.loads((tmp_path / "report.json").read_text())
    assert ev["metrics"] == rep["metrics"]
    assert ev["significance"] == rep["significance"]
    assert ev["data_similarity"] > 0


def test_sweep_data_size(tmp_path):
    assert run("sweep", "--axis", "data_size", "--values", "100,200,400", "--out", tmp_path) == 0
    with (tmp_path / "sweep.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["value"]) for r in rows] == [100, 200, 400]
    assert all(0 <= float(r["auc"]) <= 1 for r in rows)


def test_sweep_single_value_equals_audit(tmp_path):
    common = ["--seed", 3]
    assert run(*common, "synth", "--n", 80, "--group-size", 4, "--out", tmp_path / "b") == 0
    assert run(*common, "train", "--bench", tmp_path / "b", "--family", "lssvm", "--out", tmp_path / "m") == 0
    assert run(*common, "audit", "--bench", tmp_path / "b", "--model", tmp_path / "m" / "model.json",
               "--method", "add", "--out", tmp_path / "a") == 0
    assert run(*common, "sweep", "--axis", "data_size", "--values", 80, "--group-size", 4,
               "--method", "add", "--out", tmp_path / "s") == 0
    rep = json.loads((tmp_path / "a" / "report.json").read_text())
    with (tmp_path / "s" / "sweep.csv").open() as fh:
        (row,) = list(csv.DictReader(fh))
    for key in ("auc", "f_measure", "precision", "recall"):
        assert float(row[key]) == rep["metrics"][key]
    assert float(row["threshold"]) == rep["threshold"]


def test_idx_source(tmp_path):
    from dpda.data_io import write_idx

    rng = np.random.default_rng(0)
    write_idx(rng.integers(0, 256, (40, 28, 28)), np.repeat([3, 8], 20), tmp_path / "i", tmp_path / "l")
    assert run("synth", "--source", "idx", "--images", tmp_path / "i", "--labels", tmp_path / "l",
               "--classes", "3,8", "--out", tmp_path / "b") == 0
    b = load_benchmark(tmp_path / "b")
    assert b.manifest.dim == 784 and b.manifest.classes == [3, 8]


def test_global_flags_after_subcommand(tmp_path):
    assert run("--seed", 5, "synth", "--out", tmp_path / "a") == 0
    assert run("synth", "--seed", 5, "--out", tmp_path / "b") == 0
    assert digest(tmp_path / "a" / "groups.csv") == digest(tmp_path / "b" / "groups.csv")


def test_csv_format_output(trained, tmp_path, capsys):
    assert run("audit", "--bench", trained[0], "--model", trained[1], "--format", "csv", "--out", tmp_path) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "group_id,truth,score,decided"
    assert len(lines) == 101


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "dpda.cli", "synth", "--n", "20", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["n_groups"] == 2
