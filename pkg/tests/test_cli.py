import json

import numpy as np
import pytest
from click.testing import CliRunner

from todex import example_library, save_problem
from todex.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def problem_file(tmp_path):
    def write(name, **overrides):
        spec = example_library()[name]
        if overrides:
            from dataclasses import replace

            spec = replace(spec, **overrides)
        path = tmp_path / f"{name}.json"
        save_problem(spec, path)
        return str(path)

    return write


def run_ok(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return json.loads(result.stdout)


class TestTridiag:
    def test_example1_partial_depth(self, runner, problem_file, tmp_path):
        out = tmp_path / "out"
        payload = run_ok(
            runner,
            [
                "tridiag", "--problem", problem_file("example1"), "--nodes", "41",
                "--depth", "2", "--out", str(out),
            ],
        )
        assert payload["status"] == "completed"
        assert payload["achieved_depth"] == 2
        assert sorted(payload["files"]) == ["alpha_0", "alpha_1", "beta_1", "beta_2"]
        alpha0 = np.loadtxt(out / "alpha_0.csv", delimiter=",")
        assert alpha0.shape == (41, 41)
        assert alpha0[5, 3] == -1.0
        assert (out / "summary.json").exists()

    def test_example1_full_depth(self, runner, problem_file, tmp_path):
        # at full depth the final residual pair vanishes up to rounding, so
        # coarse grids legitimately classify the run as exact
        payload = run_ok(
            runner,
            ["tridiag", "--problem", problem_file("example1"), "--nodes", "41", "--out", str(tmp_path / "o")],
        )
        assert payload["status"] in ("completed", "lucky-breakdown")
        assert payload["achieved_depth"] == 3
        assert payload["biorthogonality_deviation"] <= 1e-6

    def test_diag2_lucky(self, runner, problem_file, tmp_path):
        payload = run_ok(
            runner,
            ["tridiag", "--problem", problem_file("diag2"), "--nodes", "31", "--out", str(tmp_path / "o")],
        )
        assert payload["status"] == "lucky-breakdown"
        assert payload["breakdown_step"] == 1

    def test_normalization_violation_fails_before_compute(self, runner, tmp_path):
        bad = {
            "interval": [0, 1],
            "n_nodes": 11,
            "matrix": [["1", "0"], ["0", "1"]],
            "w": [0, 1],
            "v": [1, 0],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        result = runner.invoke(main, ["tridiag", "--problem", str(path), "--out", str(tmp_path / "o")])
        assert result.exit_code == 1
        error = json.loads(result.stderr)
        assert error["error"]["code"] == "normalization-violation"

    def test_missing_file_reports_error_object(self, runner, tmp_path):
        result = runner.invoke(main, ["tridiag", "--problem", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
        assert result.exit_code == 1
        assert "error" in json.loads(result.stderr)

    def test_malformed_json_reports_problem_format(self, runner, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        result = runner.invoke(main, ["tridiag", "--problem", str(path), "--out", str(tmp_path / "o")])
        assert result.exit_code == 1
        error = json.loads(result.stderr)
        assert error["error"]["code"] == "problem-format"


class TestSolve:
    def test_zero_matrix_constant_one(self, runner, problem_file, tmp_path):
        payload = run_ok(
            runner,
            [
                "solve", "--problem", problem_file("zero3"), "--nodes", "51",
                "--oracle", "--out", str(tmp_path / "o"),
            ],
        )
        assert payload["max_abs_diff"] <= 1e-12
        series = np.loadtxt(tmp_path / "o" / "series.csv", delimiter=",", skiprows=1)
        assert np.allclose(series[:, 1], 1.0)

    def test_example1_against_oracle(self, runner, problem_file, tmp_path):
        payload = run_ok(
            runner,
            [
                "solve", "--problem", problem_file("example1"), "--nodes", "101",
                "--depth", "3", "--oracle", "--out", str(tmp_path / "o"),
            ],
        )
        assert payload["max_abs_diff"] <= 0.06
        assert payload["value_at_end"] == pytest.approx(1.1567594199225917, abs=0.06)


class TestMoments:
    def test_example1_guaranteed_range(self, runner, problem_file, tmp_path):
        payload = run_ok(
            runner,
            [
                "moments", "--problem", problem_file("example1"), "--nodes", "41",
                "--depth", "2", "--jmax", "4", "--out", str(tmp_path / "o"),
            ],
        )
        table = {row["j"]: row for row in payload["table"]}
        for j in range(4):
            assert table[j]["guaranteed"] is (j < 4)
            if j < 4:
                assert table[j]["relative_deviation"] <= 1e-8
        assert table[4]["guaranteed"] is False

    def test_example2_j_up_to_nine(self, runner, problem_file, tmp_path):
        payload = run_ok(
            runner,
            [
                "moments", "--problem", problem_file("example2"), "--nodes", "51",
                "--jmax", "9", "--out", str(tmp_path / "o"),
            ],
        )
        assert all(row["relative_deviation"] <= 1e-8 for row in payload["table"])


class TestBound:
    def test_report_shape(self, runner, problem_file, tmp_path):
        payload = run_ok(
            runner,
            [
                "bound", "--problem", problem_file("example1"), "--nodes", "101",
                "--depths", "1,2", "--samples", "5", "--out", str(tmp_path / "o"),
            ],
        )
        assert [entry["depth"] for entry in payload["report"]] == [1, 2]
        for entry in payload["report"]:
            # every row of the constant 3x3 matrix sums to 3 in absolute value
            assert entry["C"] == pytest.approx(3.0)
            assert entry["D"] > 0.0
            for row in entry["rows"]:
                assert row["bound"] >= 0.0
                assert row["empirical_error"] >= 0.0


class TestConv:
    def test_first_order_on_example1(self, runner, problem_file, tmp_path):
        payload = run_ok(
            runner,
            [
                "conv", "--problem", problem_file("example1"), "--grids", "101,201,401",
                "--out", str(tmp_path / "o"),
            ],
        )
        assert 0.7 <= payload["observed_order"] <= 1.3

    def test_first_order_on_scalar_problem(self, runner, problem_file, tmp_path):
        payload = run_ok(
            runner,
            [
                "conv", "--problem", problem_file("const1"), "--grids", "51,101,201",
                "--out", str(tmp_path / "o"),
            ],
        )
        assert 0.7 <= payload["observed_order"] <= 1.3

    def test_zero_matrix_skips_fit(self, runner, problem_file, tmp_path):
        payload = run_ok(
            runner,
            [
                "conv", "--problem", problem_file("zero3"), "--grids", "21,41",
                "--out", str(tmp_path / "o"),
            ],
        )
        assert payload["observed_order"] is None
        assert "skipped" in payload["note"]


class TestDeterminism:
    def test_byte_identical_summaries(self, runner, problem_file, tmp_path):
        args_base = ["solve", "--problem", problem_file("example1"), "--nodes", "41", "--oracle"]
        blobs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            result = runner.invoke(main, args_base + ["--out", str(out)], catch_exceptions=False)
            assert result.exit_code == 0
            blobs.append((out / "summary.json").read_bytes())
            blobs.append((out / "series.csv").read_bytes())
        assert blobs[0] == blobs[2]
        assert blobs[1] == blobs[3]


class TestExamplesCommand:
    def test_dumps_loadable_problems(self, runner, tmp_path):
        from todex import load_problem

        out = tmp_path / "problems"
        payload = run_ok(runner, ["examples", "--out", str(out)])
        assert "example1" in payload["files"]
        for name in payload["files"].values():
            spec = load_problem(out / name)
            assert spec.dim >= 1
