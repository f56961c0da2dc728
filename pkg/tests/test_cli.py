import csv
import json

import pytest

from heuristics_lab.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_oracle_rls_n3(capsys):
    code, out, _ = run_cli(capsys, "oracle", "--alg", "rls", "--bench", "onemax", "--n", "3", "--start", "000")
    assert code == 0
    doc = json.loads(out)
    assert doc["expected_hitting_time"] == pytest.approx(5.5, abs=1e-9)
    assert doc["chain"] == "lumped" and doc["bound_holds"]


def test_oracle_full_chain_path_probability(capsys):
    code, out, _ = run_cli(capsys, "oracle", "--alg.kind", "rls", "--bench.kind", "onemax", "--bench.n", "4",
                           "--start", "0000", "--horizon", "4", "--chain", "full", "--matrix")
    doc = json.loads(out)
    assert code == 0 and doc["chain"] == "full" and len(doc["matrix"]["probs"]) == 16
    assert doc["path_probability"]["exact_prob"] == pytest.approx(0.09375)


def test_oracle_unreachable_target(capsys):
    code, out, _ = run_cli(capsys, "oracle", "--alg", "rls", "--bench", "jump", "--n", "5", "--k", "2", "--start", "11100")
    assert code == 0 and json.loads(out)["expected_hitting_time"] is None


def test_run_missing_config(capsys):
    code, _, err = run_cli(capsys, "run", "--config", "/nonexistent/exp.cfg")
    assert code == 2 and "config file not found" in err


@pytest.mark.parametrize("argv", [["frobnicate"], ["run", "--bogus", "1"], [], ["oracle", "--alg", "rls"]])
def test_usage_errors(capsys, argv):
    code, _, _ = run_cli(capsys, *argv)
    assert code == 2


def test_invalid_spec_value_exits_2(capsys):
    code, _, err = run_cli(capsys, "run", "--alg", "rls", "--bench", "jump", "--n", "5", "--k", "9")
    assert code == 2 and "k" in err


def test_run_with_config_and_override(tmp_path, capsys):
    path = tmp_path / "exp.cfg"
    path.write_text("alg.kind=rls\nbench.kind=onemax\nbench.n=3\nrun.replicates=10\nrun.seed=4\n")
    out_file = tmp_path / "res.csv"
    code, _, err = run_cli(capsys, "run", "-c", str(path), "--replicates", "7", "--out", str(out_file), "--workers", "1")
    assert code == 0
    rows = list(csv.reader(out_file.open(newline="")))
    assert rows[0] == ["replicate_index", "hitting_time", "censored", "evaluations", "seed"]
    assert len(rows) == 8 and rows[1][4] == "4"
    assert json.loads(err)["replicates"] == 7


def test_run_stdout_is_deterministic(capsys):
    argv = ["run", "--alg", "ea", "--bench", "leadingones", "--n", "5", "--replicates", "20", "--seed", "9"]
    _, first, _ = run_cli(capsys, *argv, "--workers", "1")
    _, second, _ = run_cli(capsys, *argv, "--workers", "2")
    assert first == second and first.startswith("replicate_index,")


def test_dist_writes_tables_and_plot(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "dist", "--alg", "rls", "--bench", "onemax", "--n", "5", "--replicates", "300",
                           "--workers", "1", "--out-dir", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"]["passed"] and doc["bound"]["scale"] == 5
    assert {p.name for p in tmp_path.iterdir()} == {"records.csv", "quantiles.csv", "survival.csv", "verdict.json", "survival.png"}
    assert (tmp_path / "survival.png").read_bytes()[:4] == b"\x89PNG"


def test_dist_no_plot(tmp_path, capsys):
    code, _, _ = run_cli(capsys, "dist", "--alg", "ea", "--bench", "onemax", "--n", "4", "--replicates", "100",
                         "--workers", "1", "--out-dir", str(tmp_path), "--no-plot")
    assert code == 0 and not (tmp_path / "survival.png").exists()


def test_drift_with_exact_column(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "drift", "--alg", "comma", "--lambda", "5", "--bench", "onemax", "--n", "100",
                           "--levels", "1,50", "--samples", "2000", "--epsilon", "0.5", "--out-dir", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["d0"] == pytest.approx(29.556, abs=1e-3)
    assert [r["level"] for r in doc["per_level"]] == [1, 50]
    assert all("exact" in r for r in doc["per_level"])
    assert (tmp_path / "drift.png").exists() and (tmp_path / "drift.csv").exists()


def test_verify_subset(capsys):
    code, out, _ = run_cli(capsys, "verify", "--only", "2,10")
    assert code == 0
    assert out.count("[PASS]") == 2 and "2/2 checks passed" in out
