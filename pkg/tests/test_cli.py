"""Tests for the command-line entry point."""

import json

import numpy as np
import pytest

from src.core.solver_manager import SolverManager
from src.main import EXIT_CONVERGED, EXIT_ERROR, EXIT_NOT_CONVERGED, build_parser, main


def _write(path, rows):
    path.write_text("".join(" ".join(repr(float(v)) for v in np.atleast_1d(row)) + "\n" for row in rows))
    return str(path)


@pytest.fixture
def mot_files(tmp_path, small_mot):
    return {
        "--cost": _write(tmp_path / "C.txt", small_mot.C),
        "--row": _write(tmp_path / "r.txt", [small_mot.r]),
        "--col": _write(tmp_path / "c.txt", [small_mot.c]),
        "--v": _write(tmp_path / "V.txt", small_mot.V),
        "--w": _write(tmp_path / "W.txt", small_mot.W),
    }


def _solve_args(files, *extra):
    args = ["solve", "mot"]
    for flag, path in files.items():
        args += [flag, path]
    return args + ["--eta", "5", "--epsilon", "0.05", *extra]


def test_solve_converges_and_is_reproducible(tmp_path, mot_files):
    """Two identical runs write byte-identical trace and summary files."""
    outputs = []
    for run in ("a", "b"):
        trace, summary = tmp_path / f"{run}.csv", tmp_path / f"{run}.json"
        code = main(_solve_args(mot_files, "--n2", "50", "--tol", "1e-9", "--trace", str(trace), "--summary", str(summary)))
        assert code == EXIT_CONVERGED
        outputs.append((trace.read_bytes(), summary.read_bytes()))
    assert outputs[0] == outputs[1]

    summary = json.loads(outputs[0][1])
    assert summary["status"] == "converged"
    assert summary["solver"] == "sns"
    assert summary["grad_inf"] <= 1e-9
    assert summary["solve_ms"] == 0.0
    rows = outputs[0][0].decode().splitlines()
    assert rows[0].startswith("1,sinkhorn,")
    assert all(row.endswith(",nan,0") for row in rows)


def test_solve_not_converged(tmp_path, mot_files):
    summary = tmp_path / "s.json"
    code = main(_solve_args(mot_files, "--solver", "sinkhorn", "--max-outer", "1", "--summary", str(summary)))
    assert code == EXIT_NOT_CONVERGED
    assert json.loads(summary.read_text())["status"] == "max_iter"


def test_solve_with_reference_and_timings(tmp_path, mot_files):
    trace = tmp_path / "t.csv"
    code = main(_solve_args(mot_files, "--reference", "--timings", "--n2", "50", "--trace", str(trace)))
    assert code == EXIT_CONVERGED
    last = trace.read_text().splitlines()[-1].split(",")
    assert float(last[4]) < 1e-6


def test_solve_maximize_reports_original_cost(tmp_path, mot_files):
    summary = tmp_path / "max.json"
    assert main(_solve_args(mot_files, "--maximize", "--n2", "50", "--summary", str(summary))) == EXIT_CONVERGED
    minimized = tmp_path / "min.json"
    assert main(_solve_args(mot_files, "--n2", "50", "--summary", str(minimized))) == EXIT_CONVERGED
    upper = json.loads(summary.read_text())["transport_cost"]
    lower = json.loads(minimized.read_text())["transport_cost"]
    assert upper > lower > 0.0


def test_usage_errors(mot_files):
    assert main([]) == EXIT_ERROR
    assert main(["solve", "mot", "--eta", "5"]) == EXIT_ERROR
    assert main(_solve_args(mot_files, "--solver", "gradient")) == EXIT_ERROR


def test_solve_mot_requires_positive_epsilon(tmp_path, mot_files):
    summary = tmp_path / "s.json"
    assert main(_solve_args(mot_files, "--epsilon", "0", "--summary", str(summary))) == EXIT_ERROR
    assert main(_solve_args(mot_files, "--epsilon", "-0.1", "--summary", str(summary))) == EXIT_ERROR
    no_budget = ["solve", "mot", *[item for pair in mot_files.items() for item in pair], "--eta", "5"]
    assert main(no_budget) == EXIT_ERROR
    assert not summary.exists()


def test_missing_and_malformed_inputs(tmp_path, mot_files):
    missing = dict(mot_files, **{"--cost": str(tmp_path / "absent.txt")})
    assert main(_solve_args(missing)) == EXIT_ERROR

    bad = tmp_path / "bad.txt"
    bad.write_text("0.1 0.2\n0.3\n")
    assert main(_solve_args(dict(mot_files, **{"--cost": str(bad)}))) == EXIT_ERROR


def test_experiment_ranking(tmp_path):
    out = tmp_path / "ranking"
    code = main(["experiment", "ranking", "--n", "6", "--eta", "20", "--out", str(out)])
    assert code in (EXIT_CONVERGED, EXIT_NOT_CONVERGED)
    positions = [float(v) for v in (out / "positions.csv").read_text().split()]
    assert len(positions) == 6
    assert all(1.0 <= p <= 6.0 for p in positions)
    assert json.loads((out / "summary.json").read_text())["solver"] == "sinkhorn"


@pytest.mark.parametrize("name", ["option-pricing", "balance"])
def test_experiment_mot(tmp_path, name):
    out = tmp_path / name
    code = main(["experiment", name, "--n", "8", "--eta", "30", "--out", str(out)])
    assert code in (EXIT_CONVERGED, EXIT_NOT_CONVERGED)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["problem"] == name
    assert summary["n"] == 8
    assert (out / "trace.csv").read_text()


def test_verify_theorem1(tmp_path):
    out = tmp_path / "verify"
    code = main(["verify", "theorem1", "--out", str(out)])
    assert code == EXIT_CONVERGED
    rows = (out / "theorem1.csv").read_text().splitlines()
    assert [float(row.split(",")[0]) for row in rows] == [16.0 * 2 ** k for k in range(9)]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["n"] == 5
    assert summary["slope"] < 0.0
    assert summary["r_squared"] >= 0.9
    assert summary["decreasing"] is True


def test_solver_flag_lists_registered_solvers():
    manager = SolverManager().load_defaults()
    solve = build_parser()._subparsers._group_actions[0].choices["solve"]
    flag = next(action for action in solve._actions if "--solver" in action.option_strings)
    assert flag.choices == ["apdagd", "sinkhorn", "sns"]
    assert flag.help == manager.get_help_text()
