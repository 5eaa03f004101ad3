#!/usr/bin/env python3
"""
Feature Module
Returns, direction labels, Min-Max scaling, sliding windows and
chronological splits for the rate series
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from dataio.ohlc_loader import RateSeries
from utils.errors import DegenerateScaleError, InsufficientDataError, SplitError

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 50
DEFAULT_TRAIN_FRACTION = 0.8

ArrayLike = Union[Sequence[float], np.ndarray]


@dataclass(frozen=True)
class ScalerParams:
    min: float
    max: float

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise DegenerateScaleError("scaler bounds must be finite")
        if not self.max > self.min:
            raise DegenerateScaleError(f"scaler needs max > min, got min={self.min} max={self.max}")

    @property
    def span(self) -> float:
        return self.max - self.min

    def to_dict(self) -> dict:
        return {"min": self.min, "max": self.max}


@dataclass(frozen=True, eq=False)
class WindowedDataset:
    """inputs[i] = values[i:i+w], targets[i] = values[i+w]"""

    inputs: np.ndarray
    targets: np.ndarray
    window_len: int
    origin_indices: np.ndarray

    @property
    def n_samples(self) -> int:
        return int(self.targets.size)

    def subset(self, indices: range) -> "WindowedDataset":
        sl = slice(indices.start, indices.stop)
        return WindowedDataset(
            inputs=self.inputs[sl],
            targets=self.targets[sl],
            window_len=self.window_len,
            origin_indices=self.origin_indices[sl],
        )


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Direction-classification samples; labels[i] = 1 when the value after the window rises"""

    features: np.ndarray
    labels: np.ndarray
    # Return realised right after each window
    next_returns: np.ndarray
    # Index into the return vector of that realised return
    origin_indices: np.ndarray

    @property
    def n_samples(self) -> int:
        return int(self.labels.size)

    def subset(self, indices: range) -> "LabeledDataset":
        sl = slice(indices.start, indices.stop)
        return LabeledDataset(
            features=self.features[sl],
            labels=self.labels[sl],
            next_returns=self.next_returns[sl],
            origin_indices=self.origin_indices[sl],
        )


@dataclass(frozen=True)
class ChronoSplit:
    train: range
    test: range


def _as_vector(values: Union[ArrayLike, RateSeries]) -> np.ndarray:
    if isinstance(values, RateSeries):
        return np.asarray(values.values, dtype=np.float64)
    return np.asarray(values, dtype=np.float64).ravel()


def daily_returns(series: Union[RateSeries, ArrayLike]) -> np.ndarray:
    """r_t = (X_t - X_{t-1}) / X_{t-1}; element t-1 holds r_t"""
    x = _as_vector(series)
    if x.size < 2:
        raise InsufficientDataError(f"returns need at least 2 values, got {x.size}")
    return np.diff(x) / x[:-1]


def make_labels(returns: ArrayLike) -> np.ndarray:
    """label[t] = 1 iff returns[t+1] > 0 (a zero return is a 0)"""
    r = _as_vector(returns)
    if r.size < 2:
        raise InsufficientDataError(f"labels need at least 2 returns, got {r.size}")
    return (r[1:] > 0).astype(np.int64)


def minmax_fit(train_values: ArrayLike) -> ScalerParams:
    x = _as_vector(train_values)
    if x.size < 2:
        raise InsufficientDataError("scaler fit needs at least 2 values")
    lo = float(np.min(x))
    hi = float(np.max(x))
    if hi == lo:
        raise DegenerateScaleError(f"cannot scale a constant input (all values {lo})")
    return ScalerParams(min=lo, max=hi)


def minmax_transform(params: ScalerParams, values: ArrayLike) -> np.ndarray:
    # Values outside the fitted range extrapolate; no clipping
    return (_as_vector(values) - params.min) / params.span


def minmax_inverse(params: ScalerParams, scaled: ArrayLike) -> np.ndarray:
    return _as_vector(scaled) * params.span + params.min


def sliding_windows(values: ArrayLike, window_len: int = DEFAULT_WINDOW) -> WindowedDataset:
    x = _as_vector(values)
    if window_len < 1:
        raise InsufficientDataError(f"window length must be positive, got {window_len}")
    if x.size <= window_len:
        raise InsufficientDataError(f"need more than {window_len} values for windows of {window_len}, got {x.size}")
    n = x.size - window_len
    inputs = np.lib.stride_tricks.sliding_window_view(x, window_len)[:n].copy()
    return WindowedDataset(
        inputs=inputs,
        targets=x[window_len:].copy(),
        window_len=window_len,
        origin_indices=np.arange(window_len, x.size),
    )


def chrono_split(n_samples: int, train_fraction: float = DEFAULT_TRAIN_FRACTION) -> ChronoSplit:
    """First floor(n * fraction) samples train, the rest test; never shuffled"""
    if not 0.0 < train_fraction < 1.0:
        raise SplitError(f"train fraction must be in (0, 1), got {train_fraction}")
    if n_samples < 2:
        raise SplitError(f"cannot split {n_samples} sample(s)")
    n_train = int(math.floor(n_samples * train_fraction))
    if n_train == 0 or n_train == n_samples:
        raise SplitError(f"split of {n_samples} at {train_fraction} leaves one side empty")
    return ChronoSplit(train=range(0, n_train), test=range(n_train, n_samples))


def direction_dataset(
    series: RateSeries,
    window_len: int = DEFAULT_WINDOW,
    mode: str = "returns",
    scaler: Optional[ScalerParams] = None,
) -> LabeledDataset:
    """Windows of past returns (or scaled rates) labelled by the next return's sign.

    Sample i uses returns[i:i+w] and is labelled by returns[i+w] > 0. In
    `rates` mode the window holds the scaled rates X_{i+1}..X_{i+w}, which
    end at the same day as the return window.
    """
    returns = daily_returns(series)
    if returns.size <= window_len:
        raise InsufficientDataError(
            f"need more than {window_len} returns for direction windows, got {returns.size}"
        )
    n = returns.size - window_len
    if mode == "returns":
        features = np.lib.stride_tricks.sliding_window_view(returns, window_len)[:n].copy()
    elif mode == "rates":
        if scaler is None:
            raise ValueError("rates mode needs a fitted scaler")
        scaled = minmax_transform(scaler, series.values)
        features = np.lib.stride_tricks.sliding_window_view(scaled[1:], window_len)[:n].copy()
    else:
        raise ValueError(f"unknown feature mode {mode!r}")
    next_returns = returns[window_len:].copy()
    return LabeledDataset(
        features=features,
        labels=make_labels(returns)[window_len - 1:],
        next_returns=next_returns,
        origin_indices=np.arange(window_len, returns.size),
    )


def features_csv_rows(dataset: WindowedDataset) -> Tuple[list, Iterable[list]]:
    """Header and rows for the `idx,target,x0..x{w-1}` feature dump"""
    header = ["idx", "target"] + [f"x{j}" for j in range(dataset.window_len)]
    rows = (
        [int(idx), f"{target:.17g}"] + [f"{v:.17g}" for v in window]
        for idx, target, window in zip(dataset.origin_indices, dataset.targets, dataset.inputs)
    )
    return header, rows
