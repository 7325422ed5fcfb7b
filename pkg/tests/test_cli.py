"""
Tests for src/expert_advice_lab/cli.py

Coverage
--------
- bounds: printed values, warning when the instance bound does not apply
- solver-check: passes on a small trial count
- generate / reduce / capacity: files written and readable
- run: flags and config file, exit code 1 on invalid input
"""

import csv
import json

import pytest

from src.expert_advice_lab.bounds import theorem1_bound
from src.expert_advice_lab.cli import build_argument_parser, main
from src.expert_advice_lab.instance_io import read_header, read_instance


@pytest.fixture(autouse=True)
def _isolated_settings(tmp_path, monkeypatch):
    monkeypatch.setenv("LAB_OUTPUT_DIR", str(tmp_path / "results"))
    monkeypatch.setenv("LAB_LOG_FILE", str(tmp_path / "lab.log"))


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def test_parser_maps_short_dimension_flags() -> None:
    args = build_argument_parser().parse_args(["run", "--N", "16", "--K", "4", "--T", "100", "--J", "2"])
    assert (args.n_experts, args.n_actions, args.horizon, args.initial_guess) == (16, 4, 100, 2.0)
    assert args.capacity_diagnostics is None


def test_trend_defaults() -> None:
    args = build_argument_parser().parse_args(["trend"])
    assert args.n_list == [8, 32, 128]
    assert (args.n_actions, args.horizon) == (4, 20_000)
    assert args.seeds == list(range(50))


# ---------------------------------------------------------------------------
# bounds / solver-check
# ---------------------------------------------------------------------------


def test_bounds_prints_theorem1(capsys) -> None:
    assert main(["bounds", "--N", "16", "--K", "4", "--T", "10000"]) == 0
    out = capsys.readouterr().out
    assert f"{theorem1_bound(16, 4, 10_000):.4f}" in out
    assert "restricted lower-bound rate" in out


def test_bounds_warns_when_horizon_too_short(capsys) -> None:
    assert main(["bounds", "--N", "16", "--K", "4", "--T", "3", "--J", "1"]) == 0
    assert "does not apply" in capsys.readouterr().err


def test_bounds_rejects_guess_above_n(capsys) -> None:
    assert main(["bounds", "--N", "4", "--K", "2", "--T", "100", "--J", "5"]) == 1
    assert "error:" in capsys.readouterr().err


def test_solver_check_passes(capsys) -> None:
    assert main(["solver-check", "--trials", "50", "--seed", "3"]) == 0
    assert "0 failure(s)" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# Instance files
# ---------------------------------------------------------------------------


def test_generate_writes_instance(tmp_path) -> None:
    path = tmp_path / "instance.txt"
    assert main(["generate", "--N", "3", "--K", "4", "--T", "12", "--out", str(path), "--seed", "2"]) == 0
    assert read_header(path) == (12, 3, 4)


def test_reduce_then_capacity(tmp_path) -> None:
    instance_path = tmp_path / "reduced.txt"
    assert main(["reduce", "--N", "6", "--K", "4", "--T", "8", "--out", str(instance_path)]) == 0
    instance = read_instance(instance_path)
    assert instance.n_experts == 6 and instance.n_actions == 4

    out_dir = tmp_path / "capacity"
    assert main(["capacity", str(instance_path), "--out", str(out_dir), "--max-iters", "50"]) == 0
    with (out_dir / "capacity.csv").open(encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 8
    for row in rows:
        # Dirac advice: Q and capacity never exceed min(N, K) - 1
        assert 0.0 <= float(row["q_uniform"]) <= float(row["capacity_estimate"]) + 1e-9 <= 3.0 + 1e-6


def test_reduce_rejects_n_not_above_k() -> None:
    assert main(["reduce", "--N", "4", "--K", "4", "--T", "8", "--out", "unused.txt"]) == 1


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def test_run_with_flags(tmp_path, capsys) -> None:
    out_dir = tmp_path / "run"
    code = main(["run", "--policy", "exp4", "--N", "4", "--K", "2", "--T", "40", "--seeds", "0..1",
                 "--out", str(out_dir)])
    assert code == 0
    summary = json.loads((out_dir / "summary.json").read_text(encoding="utf-8"))
    assert summary["policy"] == "exp4"
    assert len(summary["seeds"]) == 2
    assert "mean regret" in capsys.readouterr().out


def test_run_with_config_file(tmp_path) -> None:
    config = tmp_path / "run.env"
    config.write_text("policy=qftrl-doubling\nN=8\nK=4\nT=60\nJ=2\nseeds=5\n", encoding="utf-8")
    out_dir = tmp_path / "run"
    assert main(["run", "--config", str(config), "--out", str(out_dir)]) == 0
    summary = json.loads((out_dir / "summary.json").read_text(encoding="utf-8"))
    assert summary["policy"] == "qftrl-doubling"
    assert summary["bounds"]["initial_guess"] == 2.0


def test_run_rejects_doubling_under_restricted(tmp_path, capsys) -> None:
    code = main(["run", "--policy", "qftrl-doubling", "--protocol", "restricted", "--out", str(tmp_path)])
    assert code == 1
    assert "full advice" in capsys.readouterr().err


def test_run_rejects_invalid_guess(tmp_path) -> None:
    assert main(["run", "--N", "4", "--J", "9", "--out", str(tmp_path)]) == 1
