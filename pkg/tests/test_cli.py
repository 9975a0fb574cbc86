"""
CLI tests — commands, output files and exit codes.
Run with:  python -m pytest tests/test_cli.py -v
"""

import csv
import json

import pytest

from core.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, RESULTS_HEADER, SUMMARY_HEADER, main

RUN_YAML = """\
env:
  kind: riverswim
algo:
  kind: ucrlv
run:
  horizon: 1024
  trials: 1
"""

SWEEP_YAML = """\
env:
  kind: game_of_skill_v2
algo:
  kind: ucrlv
run:
  horizon: 256
  trials: 1
sweep:
  ds: [8]
"""


@pytest.fixture
def run_config(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(RUN_YAML, encoding="utf-8")
    return path


def _rows(path):
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.reader(f))


# ── run ────────────────────────────────────────────────────────────

class TestRun:
    def test_writes_csvs(self, run_config, tmp_path):
        out = tmp_path / "out"
        assert main(["run", str(run_config), "--out", str(out), "--workers", "1"]) == EXIT_OK
        results = _rows(out / "results.csv")
        assert results[0] == RESULTS_HEADER
        # checkpoints 1, 2, 4, ..., 1024
        assert len(results) == 1 + 11
        assert [int(r[3]) for r in results[1:]] == [2 ** k for k in range(11)]
        assert {r[0] for r in results[1:]} == {"ucrlv"}
        assert _rows(out / "summary.csv")[0] == SUMMARY_HEADER
        assert (out / "run_log.jsonl").exists()

    def test_reruns_are_byte_identical(self, run_config, tmp_path):
        for name in ("a", "b"):
            assert main(["run", str(run_config), "--out", str(tmp_path / name), "--workers", "1"]) == EXIT_OK
        for csv_name in ("results.csv", "summary.csv"):
            first = (tmp_path / "a" / csv_name).read_bytes()
            assert first == (tmp_path / "b" / csv_name).read_bytes()

    def test_run_log_events(self, run_config, tmp_path):
        out = tmp_path / "out"
        main(["run", str(run_config), "--out", str(out), "--workers", "1"])
        lines = (out / "run_log.jsonl").read_text(encoding="utf-8").splitlines()
        events = [json.loads(line)["event"] for line in lines]
        assert events == ["experiment_started", "trial_finished", "experiment_finished"]

    def test_missing_horizon(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text(RUN_YAML.replace("  horizon: 1024\n", ""), encoding="utf-8")
        assert main(["run", str(path), "--out", str(tmp_path / "out")]) == EXIT_USAGE
        assert "run.horizon" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["run", str(tmp_path / "none.yaml"), "--out", str(tmp_path)]) == EXIT_USAGE


# ── parser ─────────────────────────────────────────────────────────

class TestParser:
    def test_no_command(self):
        assert main([]) == EXIT_USAGE

    def test_help(self):
        assert main(["--help"]) == EXIT_OK

    def test_run_help_lists_algorithms(self, capsys):
        assert main(["run", "--help"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "algorithms (algo.kind):" in out
        for name in ("ucrlv", "ucrl2", "tsde", "optimal"):
            assert name in out

    def test_unknown_preset(self, run_config):
        assert main(["run", str(run_config), "--preset", "huge"]) == EXIT_USAGE


# ── verify ─────────────────────────────────────────────────────────

class TestVerify:
    def test_passing_suite(self, tmp_path):
        out = tmp_path / "out"
        assert main(["verify", "--scope", "coverage", "--cases", "500", "--out", str(out)]) == EXIT_OK
        assert not (out / "verify_failures").exists()

    def test_corrupted_suite_dumps_counterexamples(self, tmp_path):
        out = tmp_path / "out"
        code = main(["verify", "--scope", "coverage", "--cases", "500", "--corrupt", "--out", str(out)])
        assert code == EXIT_FAILURE
        dump = json.loads((out / "verify_failures" / "coverage.json").read_text(encoding="utf-8"))
        assert dump["corrupt"] is True
        assert dump["failures"]

    def test_unknown_scope(self, tmp_path):
        assert main(["verify", "--scope", "everything", "--out", str(tmp_path)]) == EXIT_USAGE

    def test_bad_case_count(self, tmp_path):
        assert main(["verify", "--scope", "evi", "--cases", "0", "--out", str(tmp_path)]) == EXIT_USAGE


# ── sweep ──────────────────────────────────────────────────────────

class TestSweep:
    def test_sweep_with_reference(self, tmp_path):
        path = tmp_path / "sweep.yaml"
        path.write_text(SWEEP_YAML, encoding="utf-8")
        out = tmp_path / "out"
        assert main(["sweep", str(path), "--reference", "--workers", "1", "--out", str(out)]) == EXIT_OK
        rows = _rows(out / "ds_sweep.csv")
        assert rows[0] == ["algo", "ds", "s", "d", "norm_regret", "reference"]
        assert len(rows) == 2
        assert rows[1][0] == "ucrlv"
        assert int(rows[1][2]) == 2
        assert float(rows[1][5]) == pytest.approx(float(rows[1][4]))

    def test_sweep_needs_ds(self, run_config, tmp_path):
        assert main(["sweep", str(run_config), "--out", str(tmp_path)]) == EXIT_USAGE
