#!/usr/bin/env python3
"""
Test script for the command-line pipeline: ingest, train, evaluate, backtest, report
"""

import json
import sys
from pathlib import Path

import pytest

from dataio.ohlc_loader import SAMPLE_DATA_PATH, clean_series
from main import COMMANDS, EXIT_USAGE, first_test_index, lstm_data, main

# Small models so a full run stays quick
FAST = [
    "--window-len", "20",
    "--lstm-hidden", "6",
    "--lstm-epochs", "2",
    "--lstm-batch-size", "64",
    "--gbc-estimators", "40",
    "--gbc-learning-rate", "0.1",
    "--quiet",
]
def run_all(out: Path, *extra: str) -> None:
    for command in COMMANDS:
        assert main([command, "--out", str(out), *FAST, *extra]) == 0, command


def read_tree(out: Path) -> dict:
    return {
        p.relative_to(out).as_posix(): p.read_bytes()
        for p in sorted(out.rglob("*"))
        if p.is_file()
    }


@pytest.mark.slow
def test_full_run_writes_every_artifact(tmp_path):
    out = tmp_path / "run"
    run_all(out)
    for name in (
        "series.csv",
        "validation_report.json",
        "manifest.json",
        "models/lstm.json",
        "models/gbc.json",
        "models/arima.json",
        "logs/lstm_training.csv",
        "evaluation/metrics.csv",
        "evaluation/metrics.json",
        "evaluation/dm_test.json",
        "evaluation/hurst.json",
        "evaluation/hurst.svg",
        "evaluation/predictions.csv",
        "backtest/ledger.csv",
        "backtest/summary.json",
        "backtest/equity.svg",
        "backtest/returns_histogram.svg",
        "backtest/overlay.svg",
        "report.md",
    ):
        assert (out / name).is_file(), name

    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert set(manifest["models"]) == {"lstm", "gbc", "arima"}
    assert "manifest.json" not in manifest["artifacts"]
    assert len(manifest["input_hash"]) == 64

    metrics = json.loads((out / "evaluation/metrics.json").read_text(encoding="utf-8"))
    rows = {row["model"]: row for row in metrics["rows"]}
    assert rows["gbc"]["rmse"] is None
    assert rows["lstm"]["n"] == rows["arima"]["n"]
    assert isinstance(metrics["lstm_beats_arima"], bool)

    dm = json.loads((out / "evaluation/dm_test.json").read_text(encoding="utf-8"))
    assert 0.0 <= dm["p_value"] <= 1.0
    hurst = json.loads((out / "evaluation/hurst.json").read_text(encoding="utf-8"))
    assert hurst["H"] > 0.5

    summary = json.loads((out / "backtest/summary.json").read_text(encoding="utf-8"))
    ledger_lines = (out / "backtest/ledger.csv").read_text(encoding="utf-8").splitlines()
    assert ledger_lines[0] == "index,return,label,pred,won,pnl,equity"
    assert len(ledger_lines) - 1 == summary["n_trades"]
    equity = (out / "backtest/equity.svg").read_text(encoding="utf-8")
    assert equity.count("<polyline") == 1

    report = (out / "report.md").read_text(encoding="utf-8")
    from utils.file_manager import sha256_bytes

    assert sha256_bytes((out / "manifest.json").read_bytes()) in report


@pytest.mark.slow
def test_default_lstm_beats_arima_on_sample(tmp_path):
    out = tmp_path / "run"
    for command in ("ingest", "train", "evaluate"):
        assert main([command, "--out", str(out), "--models", "lstm,arima", "--quiet"]) == 0, command
    metrics = json.loads((out / "evaluation/metrics.json").read_text(encoding="utf-8"))
    rows = {row["model"]: row for row in metrics["rows"]}
    assert rows["lstm"]["rmse"] < rows["arima"]["rmse"]
    assert metrics["lstm_beats_arima"] is True


@pytest.mark.slow
def test_same_seed_gives_identical_outputs(tmp_path):
    run_all(tmp_path / "a", "--seed", "3")
    run_all(tmp_path / "b", "--seed", "3")
    a, b = read_tree(tmp_path / "a"), read_tree(tmp_path / "b")
    assert a.keys() == b.keys()
    for name in a:
        assert a[name] == b[name], name


@pytest.mark.slow
def test_training_log_timings_are_opt_in(tmp_path):
    out = tmp_path / "run"
    assert main(["ingest", "--out", str(out), "--quiet"]) == 0
    assert main(["train", "--out", str(out), *FAST, "--models", "lstm"]) == 0
    rows = (out / "logs/lstm_training.csv").read_text(encoding="utf-8").splitlines()
    assert rows[0] == "epoch,loss,seconds"
    assert all(row.endswith(",") for row in rows[1:])
    assert main(["train", "--out", str(out), *FAST, "--models", "lstm", "--record-timings"]) == 0
    rows = (out / "logs/lstm_training.csv").read_text(encoding="utf-8").splitlines()
    assert all(float(row.split(",")[2]) >= 0.0 for row in rows[1:])


@pytest.mark.slow
def test_report_is_idempotent(tmp_path):
    out = tmp_path / "run"
    run_all(out)
    first = (out / "report.md").read_bytes()
    assert main(["report", "--out", str(out), "--quiet"]) == 0
    assert (out / "report.md").read_bytes() == first


@pytest.mark.slow
def test_classifier_only_run(tmp_path):
    out = tmp_path / "gbc"
    run_all(out, "--models", "gbc")
    dm = json.loads((out / "evaluation/dm_test.json").read_text(encoding="utf-8"))
    assert "skipped" in dm
    assert not (out / "models/lstm.json").exists()


def test_ingest_writes_oriented_series(tmp_path):
    out = tmp_path / "run"
    assert main(["ingest", "--out", str(out), "--quiet"]) == 0
    assert (out / "series.csv").read_text(encoding="utf-8").startswith("# orientation=BDT/USD\n")
    report = json.loads((out / "validation_report.json").read_text(encoding="utf-8"))
    assert report["dropped_rows"] == 3


def test_sample_test_split_stays_inside_scaler_range():
    series, _ = clean_series(SAMPLE_DATA_PATH.read_text(encoding="utf-8"))
    data = lstm_data(series, 50, 0.8, "rates", unsafe_fit_all=False)
    assert data.test.targets.min() >= 0.0
    assert data.test.targets.max() <= 1.0
    assert data.test.inputs.min() >= 0.0


def test_first_test_index_matches_lstm_layout():
    # 100 rates, window 10: 90 samples, 72 train, first test target at rate 82
    assert first_test_index(100, 10, 0.8, "rates") == 82
    # Returns mode loses the first rate: 89 samples, 71 train, target return 81 is rate 82
    assert first_test_index(100, 10, 0.8, "returns") == 82


def test_missing_source_is_a_data_error(tmp_path):
    code = main(["ingest", "--out", str(tmp_path / "run"), "--source", str(tmp_path / "absent.csv"), "--quiet"])
    assert code == 2


def test_non_utf8_source_is_a_data_error(tmp_path):
    source = tmp_path / "latin1.csv"
    source.write_bytes(SAMPLE_DATA_PATH.read_bytes() + b"2024-01-01,caf\xe9,1,1,1,1,0\n")
    assert main(["ingest", "--out", str(tmp_path / "run"), "--source", str(source), "--quiet"]) == 2


def test_too_short_series_fails_train_with_training_exit(tmp_path):
    source = tmp_path / "short.csv"
    source.write_text("".join(SAMPLE_DATA_PATH.read_text(encoding="utf-8").splitlines(keepends=True)[:26]), encoding="utf-8")
    out = tmp_path / "run"
    assert main(["ingest", "--out", str(out), "--source", str(source), "--quiet"]) == 0
    assert main(["train", "--out", str(out), "--window-len", "30", "--quiet"]) == 3
    assert not (out / "models").exists() or not any((out / "models").iterdir())


def test_bad_setting_is_a_config_error(tmp_path):
    assert main(["ingest", "--out", str(tmp_path / "run"), "--window-len", "wide", "--quiet"]) == 3


def test_train_before_ingest_is_a_missing_artifact(tmp_path):
    assert main(["train", "--out", str(tmp_path / "run"), "--quiet"]) == 4


def test_locked_output_directory(tmp_path):
    out = tmp_path / "run"
    out.mkdir()
    (out / ".fxcast.lock").write_text("1234", encoding="utf-8")
    assert main(["ingest", "--out", str(out), "--quiet"]) == 4


def test_failed_command_leaves_previous_outputs(tmp_path):
    out = tmp_path / "run"
    assert main(["ingest", "--out", str(out), "--quiet"]) == 0
    before = (out / "series.csv").read_bytes()
    assert main(["ingest", "--out", str(out), "--source", str(tmp_path / "absent.csv"), "--quiet"]) == 2
    assert (out / "series.csv").read_bytes() == before


@pytest.mark.parametrize("argv", [[], ["forecast"], ["train", "--no-such-flag"]])
def test_usage_errors_exit_64(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == EXIT_USAGE


if __name__ == "__main__":
    sys.exit(pytest.main([__file__]))
