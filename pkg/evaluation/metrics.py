#!/usr/bin/env python3
"""
Forecast Metrics Module
RMSE, MAE and directional accuracy, collected per model
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from utils.errors import ArgumentError, InsufficientDataError

METRICS_HEADER = ["model", "rmse", "mae", "dir_acc", "n"]


def _pair(preds: np.ndarray, targets: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    p = np.asarray(preds, dtype=np.float64).ravel()
    y = np.asarray(targets, dtype=np.float64).ravel()
    if p.size == 0 or p.size != y.size:
        raise ArgumentError(f"metrics need equal non-empty lengths, got {p.size} and {y.size}")
    return p, y


def rmse(preds: np.ndarray, targets: np.ndarray) -> float:
    p, y = _pair(preds, targets)
    return float(np.sqrt(np.mean((p - y) ** 2)))


def mae(preds: np.ndarray, targets: np.ndarray) -> float:
    p, y = _pair(preds, targets)
    return float(np.mean(np.abs(p - y)))


def directional_accuracy(pred_series: np.ndarray, actual_series: np.ndarray, prior: Optional[float] = None) -> float:
    """Share of steps where sign(pred_t - actual_{t-1}) == sign(actual_t - actual_{t-1}).

    Without `prior` the first step only serves as the reference; with it,
    every step is scored and `prior` is the actual value before the first.
    """
    p, y = _pair(pred_series, actual_series)
    if prior is not None:
        p = np.concatenate([[prior], p])
        y = np.concatenate([[prior], y])
    if y.size < 2:
        raise InsufficientDataError("directional accuracy needs at least 2 aligned values")
    predicted = np.sign(p[1:] - y[:-1])
    realised = np.sign(y[1:] - y[:-1])
    return float(np.mean(predicted == realised))


@dataclass(frozen=True)
class MetricsReport:
    """One row of the metrics table; rmse and mae are None when not meaningful for the model"""

    model: str
    rmse: Optional[float]
    mae: Optional[float]
    directional_accuracy: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ArgumentError("a metrics report needs at least one sample")

    def csv_row(self) -> List:
        def cell(value: Optional[float]) -> str:
            return "" if value is None else f"{value:.10g}"

        return [self.model, cell(self.rmse), cell(self.mae), f"{self.directional_accuracy:.10g}", self.n]

    def to_dict(self) -> Dict:
        return {
            "model": self.model,
            "rmse": self.rmse,
            "mae": self.mae,
            "directional_accuracy": self.directional_accuracy,
            "n": self.n,
        }


def forecast_report(model: str, preds: np.ndarray, actual: np.ndarray, prior: Optional[float] = None) -> MetricsReport:
    p, y = _pair(preds, actual)
    return MetricsReport(
        model=model,
        rmse=rmse(p, y),
        mae=mae(p, y),
        directional_accuracy=directional_accuracy(p, y, prior),
        n=int(p.size),
    )
