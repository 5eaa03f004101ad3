#!/usr/bin/env python3
"""
fxcast command-line entry point
Wires ingest, train, evaluate, backtest and report over one output directory
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from arima.baseline import ArimaParams, fit_css, forecast_csv_rows, rolling_forecasts
from backtest.ledger import equity_curve, ledger_csv_rows, run_backtest, summarize, summary_to_dict
from dataio.ohlc_loader import Orientation, RateSeries, clean_series, load_source, series_from_csv, series_to_csv
from evaluation.diagnostics import diebold_mariano, hurst_exponent
from evaluation.metrics import METRICS_HEADER, MetricsReport, forecast_report, mae, rmse
from gboost import classifier as gbc
from lstm import trainer as lstm_trainer
from preprocess.features import (
    LabeledDataset,
    ScalerParams,
    WindowedDataset,
    chrono_split,
    daily_returns,
    direction_dataset,
    features_csv_rows,
    minmax_fit,
    minmax_transform,
    sliding_windows,
)
from reporting.chart_renderer import ChartRenderer
from reporting.report_writer import ReportWriter
from utils.errors import DataError, DataFormatError, FxcastError, InsufficientDataError, TrainingDataError
from utils.file_manager import FileManager, sha256_bytes
from utils.log import setup_logging
from utils.settings import RunConfig, SettingsManager

logger = logging.getLogger("fxcast")

TOOL_VERSION = "1.0.0"
EXIT_USAGE = 64

SERIES_FILE = "series.csv"
VALIDATION_FILE = "validation_report.json"
MANIFEST_FILE = "manifest.json"
REPORT_FILE = "report.md"
MODEL_FILES = {
    "lstm": "models/lstm.json",
    "gbc": "models/gbc.json",
    "arima": "models/arima.json",
}
LSTM_LOG = "logs/lstm_training.csv"
FEATURES_DUMP = "features/lstm_windows.csv"
METRICS_CSV = "evaluation/metrics.csv"
METRICS_JSON = "evaluation/metrics.json"
DM_JSON = "evaluation/dm_test.json"
HURST_JSON = "evaluation/hurst.json"
HURST_SVG = "evaluation/hurst.svg"
PREDICTIONS_CSV = "evaluation/predictions.csv"
ARIMA_FORECAST_CSV = "evaluation/arima_forecast.csv"
GBC_PREDICTIONS_CSV = "evaluation/gbc_predictions.csv"
LEDGER_CSV = "backtest/ledger.csv"
SUMMARY_JSON = "backtest/summary.json"
EQUITY_SVG = "backtest/equity.svg"
HISTOGRAM_SVG = "backtest/returns_histogram.svg"
OVERLAY_SVG = "backtest/overlay.svg"

# Not listed in the manifest: the manifest itself and the report that hashes it
UNLISTED = {MANIFEST_FILE, REPORT_FILE}

COMMANDS = ("ingest", "train", "evaluate", "backtest", "report")


@dataclass(frozen=True, eq=False)
class LstmData:
    scaler: ScalerParams
    windows: WindowedDataset
    train: WindowedDataset
    test: WindowedDataset
    # Index into the rate series of each test target
    level_index: np.ndarray


@dataclass(frozen=True, eq=False)
class Forecast:
    index: np.ndarray
    actual: np.ndarray
    predicted: np.ndarray
    prior: float


def first_test_index(n_levels: int, window_len: int, train_fraction: float, lstm_input: str) -> int:
    """Series index of the first test target for the LSTM layout"""
    offset = 0 if lstm_input == "rates" else 1
    split = chrono_split(n_levels - offset - window_len, train_fraction)
    return split.test.start + window_len + offset


def lstm_data(series: RateSeries, window_len: int, train_fraction: float, mode: str, unsafe_fit_all: bool) -> LstmData:
    """Scaled windows over rates (or returns), scaler fitted on the training span only"""
    x = np.asarray(series.values)
    base = x if mode == "rates" else daily_returns(x)
    offset = 0 if mode == "rates" else 1
    if base.size <= window_len:
        raise InsufficientDataError(f"{base.size} values cannot fill windows of {window_len}")
    split = chrono_split(base.size - window_len, train_fraction)
    fit_values = base if unsafe_fit_all else base[: split.train.stop + window_len]
    scaler = minmax_fit(fit_values)
    windows = sliding_windows(minmax_transform(scaler, base), window_len)
    return LstmData(
        scaler=scaler,
        windows=windows,
        train=windows.subset(split.train),
        test=windows.subset(split.test),
        level_index=windows.origin_indices[split.test.start:split.test.stop] + offset,
    )


def gbc_data(
    series: RateSeries, window_len: int, train_fraction: float, mode: str, unsafe_fit_all: bool
) -> Tuple[LabeledDataset, LabeledDataset]:
    n_samples = len(series) - 1 - window_len
    if n_samples < 2:
        raise InsufficientDataError(f"{len(series)} rates are too few for direction windows of {window_len}")
    split = chrono_split(n_samples, train_fraction)
    scaler = None
    if mode == "rates":
        x = np.asarray(series.values)
        scaler = minmax_fit(x if unsafe_fit_all else x[: split.train.stop + window_len])
    dataset = direction_dataset(series, window_len, mode, scaler)
    return dataset.subset(split.train), dataset.subset(split.test)


def arima_series(series: RateSeries, arima_on: str) -> Tuple[np.ndarray, bool]:
    """Series the baseline is fitted on, and whether it is the reciprocal of `series`"""
    inverted = series.orientation is Orientation.BDT_PER_USD
    flip = (arima_on == "inverted") != inverted
    x = np.asarray(series.values)
    return (1.0 / x if flip else x), flip


class FxcastArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 64"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class FxcastApp:
    """Main application class running one pipeline command per invocation"""

    def __init__(self, config: RunConfig, out_dir: Path, cache_dir: Optional[Path] = None):
        self.config = config
        self.file_manager = FileManager(out_dir)
        self.cache_dir = cache_dir
        self.chart_renderer = ChartRenderer()
        self.report_writer = ReportWriter()

    def run(self, command: str) -> None:
        if command not in COMMANDS:
            raise ValueError(f"unknown command {command!r}")
        with self.file_manager:
            getattr(self, f"cmd_{command}")()

    # Shared helpers

    def _load_series(self) -> RateSeries:
        return series_from_csv(self.file_manager.read_text(SERIES_FILE))

    def _load_model(self, name: str) -> Dict:
        return self.file_manager.read_json(MODEL_FILES[name])

    def _update_manifest(self, **sections) -> None:
        manifest = self.file_manager.read_json_or(MANIFEST_FILE, {})
        manifest["tool_version"] = TOOL_VERSION
        manifest["config"] = self.config.to_dict()
        for key, value in sections.items():
            if isinstance(value, dict) and isinstance(manifest.get(key), dict):
                manifest[key].update(value)
            else:
                manifest[key] = value
        manifest["artifacts"] = [a for a in self.file_manager.list_artifacts() if a not in UNLISTED]
        self.file_manager.write_json(MANIFEST_FILE, manifest)

    def _lstm_forecast(self, series: RateSeries) -> Forecast:
        payload = self._load_model("lstm")
        params, config, scaler = lstm_trainer.model_from_dict(payload)
        data_settings = payload["extra"]
        data = lstm_data(
            series,
            config.window_len,
            data_settings["train_fraction"],
            data_settings["input"],
            data_settings["unsafe_fit_all"],
        )
        if scaler != data.scaler:
            raise DataFormatError("the rate series changed since the LSTM was trained; re-run train")
        predicted = lstm_trainer.predict_series(params, scaler, data.test, config)
        x = np.asarray(series.values)
        if data_settings["input"] == "returns":
            # X_t = X_{t-1} * (1 + r_t)
            predicted = x[data.level_index - 1] * (1.0 + predicted)
        start = int(data.level_index[0])
        return Forecast(index=data.level_index, actual=x[data.level_index], predicted=predicted, prior=float(x[start - 1]))

    def _arima_forecast(self, series: RateSeries) -> Forecast:
        payload = self._load_model("arima")
        params = ArimaParams.from_dict(payload)
        start = int(payload["test_start"])
        fitted, flip = arima_series(series, payload["fit_on"])
        predicted = rolling_forecasts(params, fitted, start)
        if flip:
            predicted = 1.0 / predicted
        x = np.asarray(series.values)
        index = np.arange(start, x.size)
        return Forecast(index=index, actual=x[start:], predicted=predicted, prior=float(x[start - 1]))

    def _gbc_test(self, series: RateSeries):
        payload = self._load_model("gbc")
        model = gbc.model_from_dict(payload)
        data_settings = payload["data"]
        _, test = gbc_data(
            series,
            data_settings["window_len"],
            data_settings["train_fraction"],
            data_settings["features"],
            data_settings["unsafe_fit_all"],
        )
        return model, test

    # Commands

    def cmd_ingest(self) -> None:
        """Clean and orient the source feed into series.csv plus a validation report"""
        text = load_source(self.config.source, self.cache_dir)
        series, report = clean_series(text, invert=self.config.invert)
        logger.info(
            "ingested %d rows -> %d rates (%s), %d leading rows dropped",
            report.rows_in,
            len(series),
            series.orientation.value,
            len(report.dropped_dates),
        )
        self.file_manager.write_text(SERIES_FILE, series_to_csv(series))
        self.file_manager.write_json(VALIDATION_FILE, report.to_dict())
        self._update_manifest(input_hash=sha256_bytes(text.encode("utf-8")))

    def cmd_train(self) -> None:
        """Fit the selected models on the chronological training split"""
        series = self._load_series()
        try:
            models = self._train_models(series)
        except DataError as e:
            raise TrainingDataError(str(e)) from e
        for entry in models.values():
            entry["sha256"] = self.file_manager.file_hash(entry["file"])
        self._update_manifest(models=models)

    def _train_models(self, series: RateSeries) -> Dict[str, Dict]:
        cfg = self.config
        models: Dict[str, Dict] = {}

        if "lstm" in cfg.models:
            data = lstm_data(series, cfg.window_len, cfg.train_fraction, cfg.lstm_input, cfg.unsafe_fit_all)
            if cfg.dump_features:
                header, rows = features_csv_rows(data.windows)
                self.file_manager.write_csv(FEATURES_DUMP, header, rows)
            logger.info("training LSTM on %d windows", data.train.n_samples)
            result = lstm_trainer.train(data.train, cfg.lstm)
            extra = {
                "input": cfg.lstm_input,
                "train_fraction": cfg.train_fraction,
                "unsafe_fit_all": cfg.unsafe_fit_all,
            }
            self.file_manager.write_json(
                MODEL_FILES["lstm"], lstm_trainer.model_to_dict(result.params, cfg.lstm, data.scaler, extra)
            )
            self.file_manager.write_csv(
                LSTM_LOG, ["epoch", "loss", "seconds"], result.history.csv_rows(cfg.record_timings)
            )
            models["lstm"] = {"file": MODEL_FILES["lstm"], "epochs": result.history.epochs_completed}

        if "gbc" in cfg.models:
            train, _ = gbc_data(series, cfg.window_len, cfg.train_fraction, cfg.gbc_features, cfg.unsafe_fit_all)
            logger.info("training GBC on %d samples", train.n_samples)
            model = gbc.train(train.features, train.labels, cfg.gbc)
            payload = gbc.model_to_dict(model, cfg.gbc)
            payload["data"] = {
                "features": cfg.gbc_features,
                "window_len": cfg.window_len,
                "train_fraction": cfg.train_fraction,
                "unsafe_fit_all": cfg.unsafe_fit_all,
            }
            self.file_manager.write_json(MODEL_FILES["gbc"], payload)
            models["gbc"] = {"file": MODEL_FILES["gbc"], "n_stages_used": model.n_stages_used}

        if "arima" in cfg.models:
            start = first_test_index(len(series), cfg.window_len, cfg.train_fraction, cfg.lstm_input)
            fitted, _ = arima_series(series, cfg.arima_on)
            params = fit_css(fitted[:start], cfg.arima)
            payload = params.to_dict()
            payload.update({"fit_on": cfg.arima_on, "test_start": start})
            self.file_manager.write_json(MODEL_FILES["arima"], payload)
            models["arima"] = {"file": MODEL_FILES["arima"]}
        return models

    def cmd_evaluate(self) -> None:
        """Test-split metrics per model, DM test LSTM vs ARIMA, Hurst exponent"""
        cfg = self.config
        series = self._load_series()
        reports: List[MetricsReport] = []
        forecasts: Dict[str, Forecast] = {}

        if "lstm" in cfg.models:
            forecasts["lstm"] = self._lstm_forecast(series)
        if "arima" in cfg.models:
            forecasts["arima"] = self._arima_forecast(series)
            fc = forecasts["arima"]
            header, rows = forecast_csv_rows(series.values, fc.predicted, int(fc.index[0]))
            self.file_manager.write_csv(ARIMA_FORECAST_CSV, header, rows)
        for name, fc in forecasts.items():
            reports.append(forecast_report(name, fc.predicted, fc.actual, fc.prior))

        if "gbc" in cfg.models:
            model, test = self._gbc_test(series)
            predicted = gbc.predict_label(model, test.features)
            hit_rate = gbc.directional_hit_rate(predicted, test.labels)
            margin_rmse = margin_mae = None
            if cfg.gbc_diagnostic_errors:
                margins = gbc.predict_margin(model, test.features)
                signed = gbc.to_signed_labels(test.labels)
                margin_rmse, margin_mae = rmse(margins, signed), mae(margins, signed)
            reports.append(MetricsReport("gbc", margin_rmse, margin_mae, hit_rate, test.n_samples))
            header, rows = gbc.prediction_csv_rows(model, test.features, test.origin_indices)
            self.file_manager.write_csv(GBC_PREDICTIONS_CSV, header, rows)

        metrics = {"rows": [r.to_dict() for r in reports]}
        if "lstm" in forecasts:
            fc = forecasts["lstm"]
            metrics["lstm_pseudo_accuracy"] = lstm_trainer.pseudo_accuracy(rmse(fc.predicted, fc.actual), fc.actual)
        if "lstm" in forecasts and "arima" in forecasts:
            by_model = {r.model: r for r in reports}
            metrics["lstm_beats_arima"] = bool(by_model["lstm"].rmse < by_model["arima"].rmse)
        self.file_manager.write_csv(METRICS_CSV, METRICS_HEADER, [r.csv_row() for r in reports])
        self.file_manager.write_json(METRICS_JSON, metrics)
        if forecasts:
            self._write_predictions(series, forecasts)

        dm = self._dm_test(forecasts)
        self.file_manager.write_json(DM_JSON, dm)

        x = np.asarray(series.values)
        hurst = hurst_exponent(x if cfg.hurst_on == "rates" else daily_returns(x))
        hurst_payload = hurst.to_dict()
        hurst_payload["series"] = cfg.hurst_on
        self.file_manager.write_json(HURST_JSON, hurst_payload)
        self.file_manager.write_text(
            HURST_SVG, self.chart_renderer.hurst_svg(hurst.log_sizes, hurst.log_rs, hurst.H, hurst.intercept)
        )
        logger.info("Hurst exponent on %s: %.4f", cfg.hurst_on, hurst.H)

        summary = {r.model: r.to_dict() for r in reports}
        self._update_manifest(metrics={"forecast": summary, "hurst": hurst.H, "dm": dm})

    def _dm_test(self, forecasts: Dict[str, Forecast]) -> Dict:
        if "lstm" not in forecasts or "arima" not in forecasts:
            return {"skipped": "needs both lstm and arima forecasts"}
        a, b = forecasts["lstm"], forecasts["arima"]
        if not np.array_equal(a.index, b.index):
            logger.warning("LSTM and ARIMA test periods differ; DM test skipped")
            return {"skipped": "lstm and arima test periods differ"}
        result = diebold_mariano(
            (a.predicted - a.actual) ** 2,
            (b.predicted - b.actual) ** 2,
            horizon=self.config.dm_horizon,
            harvey=self.config.dm_harvey,
        )
        logger.info("DM statistic %.4f, p=%.4g (n=%d)", result.statistic, result.p_value, result.n)
        return result.to_dict()

    def _write_predictions(self, series: RateSeries, forecasts: Dict[str, Forecast]) -> None:
        names = sorted(forecasts)
        start = min(int(fc.index[0]) for fc in forecasts.values())
        columns = {}
        for name in names:
            fc = forecasts[name]
            columns[name] = {int(i): p for i, p in zip(fc.index, fc.predicted)}
        rows = []
        for idx in range(start, len(series)):
            row = [idx, series.dates[idx].isoformat(), f"{series.values[idx]:.17g}"]
            for name in names:
                value = columns[name].get(idx)
                row.append("" if value is None else f"{value:.17g}")
            rows.append(row)
        self.file_manager.write_csv(PREDICTIONS_CSV, ["idx", "date", "actual"] + names, rows)

    def cmd_backtest(self) -> None:
        """Replay the GBC test-period direction calls as a trade ledger"""
        cfg = self.config
        series = self._load_series()
        model, test = self._gbc_test(series)
        preds = gbc.predict_label(model, test.features)
        ledger = run_backtest(test.next_returns, test.labels, preds, cfg.backtest)
        summary = summarize(ledger, cfg.backtest)
        logger.info(
            "backtest: %d trades, win rate %s, net pnl %.2f",
            summary.n_trades,
            summary.win_rate_text,
            summary.net_pnl,
        )

        header, rows = ledger_csv_rows(ledger)
        self.file_manager.write_csv(LEDGER_CSV, header, rows)
        self.file_manager.write_json(SUMMARY_JSON, summary_to_dict(summary))
        self.file_manager.write_text(
            EQUITY_SVG, self.chart_renderer.equity_curve_svg(equity_curve(ledger, cfg.backtest.initial_capital))
        )
        self.file_manager.write_text(HISTOGRAM_SVG, self.chart_renderer.histogram_svg(test.next_returns))
        self.file_manager.write_text(OVERLAY_SVG, self._overlay(series, test.labels, preds))
        self._update_manifest(metrics={"backtest": summary_to_dict(summary)})

    def _overlay(self, series: RateSeries, labels: np.ndarray, preds: np.ndarray) -> str:
        """Actual vs predicted rates when a regression model exists, else actual vs called direction"""
        for name in ("lstm", "arima"):
            if name in self.config.models and self.file_manager.exists(MODEL_FILES[name]):
                fc = self._lstm_forecast(series) if name == "lstm" else self._arima_forecast(series)
                return self.chart_renderer.overlay_svg(
                    fc.actual, fc.predicted, title=f"Test-period rate vs {name.upper()} forecast", labels=("actual", name)
                )
        return self.chart_renderer.overlay_svg(
            labels, preds, title="Realised vs predicted direction", labels=("realised", "predicted")
        )

    def cmd_report(self) -> None:
        """One markdown summary of the evaluate and backtest outputs"""
        manifest_text = self.file_manager.read_text(MANIFEST_FILE)
        manifest = json.loads(manifest_text)
        metrics = self.file_manager.read_json(METRICS_JSON)
        dm = self.file_manager.read_json(DM_JSON)
        hurst = self.file_manager.read_json(HURST_JSON)
        backtest = None
        plots = {"hurst": HURST_SVG}
        if "gbc" in manifest.get("models", {}):
            backtest = self.file_manager.read_json(SUMMARY_JSON)
            plots.update({"equity": EQUITY_SVG, "histogram": HISTOGRAM_SVG, "overlay": OVERLAY_SVG})
        text = self.report_writer.render(
            manifest, sha256_bytes(manifest_text.encode("utf-8")), metrics, dm, hurst, backtest, plots
        )
        self.file_manager.write_text(REPORT_FILE, text)


def build_parser() -> argparse.ArgumentParser:
    parser = FxcastArgumentParser(
        prog="fxcast",
        description="Forecast and backtest daily FX rate series.",
        epilog=(
            "Settings come from built-in defaults, then --config FILE (flat key=value lines, "
            "'#' comments, keys as the long flag names), then command-line flags. "
            "FXCAST_CACHE_DIR overrides the download cache directory."
        ),
    )
    common = FxcastArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value settings file")
    common.add_argument("--cache-dir", type=Path, help="download cache (default $FXCAST_CACHE_DIR or ~/.cache/fxcast)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    for key, default in SettingsManager.DEFAULTS.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(default, bool):
            common.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction, default=None,
                                help=f"(default: {default})")
        else:
            common.add_argument(flag, dest=key, default=None, metavar=type(default).__name__.upper(),
                                help=f"(default: {default})")

    commands = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=FxcastArgumentParser)
    commands.required = True
    helps = {
        "ingest": "clean the source feed into series.csv",
        "train": "fit the selected models",
        "evaluate": "metrics, Diebold-Mariano and Hurst on the test split",
        "backtest": "trade ledger of the GBC direction calls",
        "report": "markdown summary of a finished run",
    }
    for name in COMMANDS:
        commands.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point"""
    args = build_parser().parse_args(argv)
    setup_logging(verbose=args.verbose, quiet=args.quiet)
    try:
        settings = SettingsManager()
        if args.config is not None:
            settings.load_file(args.config)
        settings.update_settings({key: getattr(args, key) for key in SettingsManager.DEFAULTS})
        config = settings.build_run_config()
        app = FxcastApp(config, Path(settings.get_setting("out")), args.cache_dir)
        app.run(args.command)
    except FxcastError as e:
        logger.error("%s", e)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
