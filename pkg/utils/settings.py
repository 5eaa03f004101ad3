#!/usr/bin/env python3
"""
Run Settings Module
Defaults, key=value config files, command-line overrides and per-module seeds
"""

import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from arima.baseline import ArimaSettings
from backtest.ledger import BacktestConfig
from dataio.ohlc_loader import SAMPLE_DATA_PATH
from gboost.classifier import EarlyStopConfig, GbcConfig
from lstm.network import LstmConfig

from .errors import ConfigError

logger = logging.getLogger(__name__)

KNOWN_MODELS = ("lstm", "gbc", "arima")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def derive_seed(seed: int, module_name: str) -> int:
    """Independent 63-bit seed per module from the single run seed"""
    digest = hashlib.sha256(f"{seed}:{module_name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & ((1 << 63) - 1)


def load_config_file(path: Path) -> Dict[str, str]:
    """Flat key=value lines; '#' comments and blank lines are skipped"""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    values: Dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path} line {number}: expected key=value, got {raw.strip()!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


@dataclass(frozen=True)
class RunConfig:
    """Everything one pipeline run needs, resolved from defaults, file and flags"""

    source: str
    window_len: int
    train_fraction: float
    models: Tuple[str, ...]
    seed: int
    invert: bool
    unsafe_fit_all: bool
    lstm_input: str
    gbc_features: str
    arima_on: str
    hurst_on: str
    gbc_diagnostic_errors: bool
    dm_harvey: bool
    dm_horizon: int
    dump_features: bool
    record_timings: bool
    lstm: LstmConfig
    gbc: GbcConfig
    arima: ArimaSettings
    backtest: BacktestConfig

    def to_dict(self) -> Dict[str, Any]:
        return {
            "source": self.source,
            "window_len": self.window_len,
            "train_fraction": self.train_fraction,
            "models": list(self.models),
            "seed": self.seed,
            "invert": self.invert,
            "unsafe_fit_all": self.unsafe_fit_all,
            "lstm_input": self.lstm_input,
            "gbc_features": self.gbc_features,
            "arima_on": self.arima_on,
            "hurst_on": self.hurst_on,
            "gbc_diagnostic_errors": self.gbc_diagnostic_errors,
            "dm_harvey": self.dm_harvey,
            "dm_horizon": self.dm_horizon,
            "lstm": self.lstm.to_dict(),
            "gbc": self.gbc.to_dict(),
            "arima": {"bound": self.arima.bound, "grid_step": self.arima.grid_step, "fit_on": self.arima.fit_on},
            "backtest": {
                "initial_capital": self.backtest.initial_capital,
                "stake_base": self.backtest.stake_base,
            },
        }


class SettingsManager:
    """Manages run settings and turns them into per-module configs"""

    # Setting constraints
    WINDOW_MIN = 2
    WINDOW_MAX = 1000
    TRAIN_FRACTION_MIN = 0.05
    TRAIN_FRACTION_MAX = 0.95
    HIDDEN_MIN = 1
    HIDDEN_MAX = 512
    EPOCHS_MIN = 0
    EPOCHS_MAX = 10000
    BATCH_MIN = 1
    BATCH_MAX = 100000
    ESTIMATORS_MIN = 1
    ESTIMATORS_MAX = 100000
    DEPTH_MIN = 0
    DEPTH_MAX = 16
    VALIDATION_MIN = 0.01
    VALIDATION_MAX = 0.5

    DEFAULTS: Dict[str, Any] = {
        "source": str(SAMPLE_DATA_PATH),
        "out": "fxcast_out",
        "seed": 0,
        "invert": True,
        "window_len": 50,
        "train_fraction": 0.8,
        "models": "lstm,gbc,arima",
        "unsafe_fit_all": False,
        "dump_features": False,
        # Fills the seconds column of the LSTM training log
        "record_timings": False,
        # LSTM
        "lstm_input": "rates",
        "lstm_hidden": 50,
        "lstm_epochs": 50,
        "lstm_batch_size": 32,
        "lstm_full_batch": False,
        "lstm_learning_rate": 1e-3,
        "lstm_activation": "relu",
        # 0 disables clipping
        "lstm_clip_norm": 5.0,
        # GBC
        "gbc_features": "returns",
        "gbc_estimators": 10000,
        "gbc_learning_rate": 0.01,
        "gbc_max_depth": 3,
        "gbc_min_samples_leaf": 5,
        "gbc_validation_fraction": 0.1,
        "gbc_patience": 50,
        "gbc_tol": 1e-4,
        "gbc_diagnostic_errors": False,
        # Baseline and diagnostics
        "arima_on": "inverted",
        "hurst_on": "rates",
        "dm_horizon": 1,
        "dm_harvey": False,
        # Backtest
        "initial_capital": 10000.0,
        "stake_base": 10000.0,
    }

    CHOICES: Dict[str, Tuple[str, ...]] = {
        "lstm_input": ("rates", "returns"),
        "lstm_activation": ("relu", "tanh"),
        "gbc_features": ("returns", "rates"),
        "arima_on": ("inverted", "raw"),
        "hurst_on": ("rates", "returns"),
    }

    def __init__(self):
        self.settings: Dict[str, Any] = dict(self.DEFAULTS)

    def _clamp(self, key: str, value, min_val, max_val):
        """Clamp value between min and max, noting when it had to move"""
        clamped = max(min_val, min(value, max_val))
        if clamped != value:
            logger.warning("%s=%s is outside [%s, %s]; using %s", key, value, min_val, max_val, clamped)
        return clamped

    def _coerce(self, key: str, value: Any) -> Any:
        default = self.DEFAULTS[key]
        if isinstance(default, bool):
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in _TRUE:
                return True
            if text in _FALSE:
                return False
            raise ConfigError(f"{key} expects a boolean, got {value!r}")
        try:
            if isinstance(default, int):
                return int(value)
            if isinstance(default, float):
                return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{key} expects a {type(default).__name__}, got {value!r}") from None
        text = str(value).strip()
        if key in self.CHOICES and text not in self.CHOICES[key]:
            raise ConfigError(f"{key} must be one of {', '.join(self.CHOICES[key])}, got {text!r}")
        return text

    def update_setting(self, key: str, value: Any):
        """Update one setting; unknown keys are rejected"""
        key = key.replace("-", "_")
        if key not in self.DEFAULTS:
            raise ConfigError(f"unknown setting {key!r}")
        self.settings[key] = self._coerce(key, value)

    def update_settings(self, values: Dict[str, Any]):
        for key, value in values.items():
            if value is not None:
                self.update_setting(key, value)

    def load_file(self, path: Path):
        self.update_settings(load_config_file(path))

    def get_setting(self, key: str) -> Any:
        return self.settings.get(key)

    def get_all_settings(self) -> Dict[str, Any]:
        return self.settings.copy()

    def reset_to_defaults(self):
        self.settings = dict(self.DEFAULTS)

    def models(self) -> Tuple[str, ...]:
        chosen = tuple(m.strip() for m in str(self.settings["models"]).split(",") if m.strip())
        unknown = [m for m in chosen if m not in KNOWN_MODELS]
        if unknown or not chosen:
            raise ConfigError(f"models must be a comma list drawn from {', '.join(KNOWN_MODELS)}, got {self.settings['models']!r}")
        # Canonical order keeps manifests stable
        return tuple(m for m in KNOWN_MODELS if m in chosen)

    def build_run_config(self) -> RunConfig:
        s = self.settings
        window = self._clamp("window_len", s["window_len"], self.WINDOW_MIN, self.WINDOW_MAX)
        fraction = self._clamp("train_fraction", s["train_fraction"], self.TRAIN_FRACTION_MIN, self.TRAIN_FRACTION_MAX)
        seed = int(s["seed"])

        clip: Optional[float] = float(s["lstm_clip_norm"])
        if clip <= 0:
            clip = None
        lstm = LstmConfig(
            hidden_units=self._clamp("lstm_hidden", s["lstm_hidden"], self.HIDDEN_MIN, self.HIDDEN_MAX),
            window_len=window,
            epochs=self._clamp("lstm_epochs", s["lstm_epochs"], self.EPOCHS_MIN, self.EPOCHS_MAX),
            batch_size=self._clamp("lstm_batch_size", s["lstm_batch_size"], self.BATCH_MIN, self.BATCH_MAX),
            full_batch=s["lstm_full_batch"],
            learning_rate=s["lstm_learning_rate"],
            cell_activation=s["lstm_activation"],
            grad_clip_norm=clip,
            seed=derive_seed(seed, "lstm"),
        )
        gbc = GbcConfig(
            n_estimators=self._clamp("gbc_estimators", s["gbc_estimators"], self.ESTIMATORS_MIN, self.ESTIMATORS_MAX),
            learning_rate=s["gbc_learning_rate"],
            max_depth=self._clamp("gbc_max_depth", s["gbc_max_depth"], self.DEPTH_MIN, self.DEPTH_MAX),
            min_samples_leaf=max(1, s["gbc_min_samples_leaf"]),
            early_stop=EarlyStopConfig(
                validation_fraction=self._clamp(
                    "gbc_validation_fraction", s["gbc_validation_fraction"], self.VALIDATION_MIN, self.VALIDATION_MAX
                ),
                patience=max(1, s["gbc_patience"]),
                tol=s["gbc_tol"],
            ),
            seed=derive_seed(seed, "gbc"),
        )
        return RunConfig(
            source=s["source"],
            window_len=window,
            train_fraction=fraction,
            models=self.models(),
            seed=seed,
            invert=s["invert"],
            unsafe_fit_all=s["unsafe_fit_all"],
            lstm_input=s["lstm_input"],
            gbc_features=s["gbc_features"],
            arima_on=s["arima_on"],
            hurst_on=s["hurst_on"],
            gbc_diagnostic_errors=s["gbc_diagnostic_errors"],
            dm_harvey=s["dm_harvey"],
            dm_horizon=max(1, s["dm_horizon"]),
            dump_features=s["dump_features"],
            record_timings=s["record_timings"],
            lstm=lstm,
            gbc=gbc,
            arima=ArimaSettings(fit_on=s["arima_on"]),
            backtest=BacktestConfig(initial_capital=s["initial_capital"], stake_base=s["stake_base"]),
        )
