#!/usr/bin/env python3
"""
Gradient Boosted Classifier Module
Exponential-loss boosting of regression trees for next-day direction,
with a chronological early-stopping holdout
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from scipy.special import expit

from utils.errors import ArgumentError, ConfigError, DataFormatError, DegenerateClassError, DimensionError

from .tree import RegressionTree, fit_tree, presort

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
PROGRESS_EVERY = 100


@dataclass(frozen=True)
class EarlyStopConfig:
    validation_fraction: float = 0.1
    patience: int = 50
    tol: float = 1e-4


@dataclass(frozen=True)
class GbcConfig:
    n_estimators: int = 10000
    learning_rate: float = 0.01
    max_depth: int = 3
    min_samples_leaf: int = 5
    early_stop: EarlyStopConfig = field(default_factory=EarlyStopConfig)
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ConfigError("n_estimators must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        if self.max_depth < 0:
            raise ConfigError("max_depth must be >= 0")
        if self.min_samples_leaf < 1:
            raise ConfigError("min_samples_leaf must be >= 1")
        if not 0.0 < self.early_stop.validation_fraction < 1.0:
            raise ConfigError("validation_fraction must lie in (0, 1)")
        if self.early_stop.patience < 1:
            raise ConfigError("patience must be >= 1")

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: Dict) -> "GbcConfig":
        data = dict(payload)
        data["early_stop"] = EarlyStopConfig(**data.get("early_stop", {}))
        return cls(**data)


@dataclass(frozen=True, eq=False)
class GbcModel:
    """margin(x) = initial_score + learning_rate * sum(tree(x))"""

    initial_score: float
    trees: Tuple[RegressionTree, ...]
    learning_rate: float
    n_stages_used: int
    n_features: int


def _signed(labels_pm: np.ndarray) -> np.ndarray:
    y = np.asarray(labels_pm, dtype=np.float64).ravel()
    if not np.all((y == 1.0) | (y == -1.0)):
        raise ArgumentError("labels must be -1 or +1")
    return y


def to_signed_labels(labels01: np.ndarray) -> np.ndarray:
    y = np.asarray(labels01).ravel()
    if not np.all((y == 0) | (y == 1)):
        raise ArgumentError("direction labels must be 0 or 1")
    return 2.0 * y.astype(np.float64) - 1.0


def exp_loss(margins: np.ndarray, labels_pm: np.ndarray) -> float:
    """Sum of exp(-y f)"""
    y = _signed(labels_pm)
    f = np.asarray(margins, dtype=np.float64).ravel()
    if f.size == 0 or f.size != y.size:
        raise ArgumentError(f"exp_loss needs equal non-empty lengths, got {f.size} and {y.size}")
    return float(np.sum(np.exp(-y * f)))


def fit_initial_score(labels_pm: np.ndarray) -> float:
    """Constant margin minimising exp_loss: 0.5 * ln(n_pos / n_neg)"""
    y = _signed(labels_pm)
    n_pos = int(np.sum(y > 0))
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateClassError(f"both classes are needed, got {n_pos} up and {n_neg} down")
    return 0.5 * math.log(n_pos / n_neg)


def pseudo_residuals(labels_pm: np.ndarray, margins: np.ndarray) -> np.ndarray:
    """Negative gradient of exp_loss: y * exp(-y f)"""
    y = _signed(labels_pm)
    f = np.asarray(margins, dtype=np.float64).ravel()
    if f.size != y.size:
        raise ArgumentError(f"{f.size} margins for {y.size} labels")
    return y * np.exp(-y * f)


def _features(features: np.ndarray) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"features must be a 2-D matrix, got shape {X.shape}")
    return X


def train(features: np.ndarray, labels01: np.ndarray, config: GbcConfig) -> GbcModel:
    """Boost until the held-out tail stops improving or n_estimators is reached"""
    X = _features(features)
    y = to_signed_labels(labels01)
    if X.shape[0] != y.size:
        raise DimensionError(f"{X.shape[0]} feature rows for {y.size} labels")

    n = y.size
    n_val = int(math.floor(n * config.early_stop.validation_fraction))
    if n_val == 0 or n_val >= n:
        raise ConfigError(f"validation holdout of {n} samples at {config.early_stop.validation_fraction} is empty")
    n_fit = n - n_val
    X_fit, y_fit = X[:n_fit], y[:n_fit]
    X_val, y_val = X[n_fit:], y[n_fit:]

    f0 = fit_initial_score(y_fit)
    order = presort(X_fit)
    margin_fit = np.full(n_fit, f0)
    margin_val = np.full(n_val, f0)
    best = exp_loss(margin_val, y_val) / n_val
    stale = 0
    lr = config.learning_rate
    trees: List[RegressionTree] = []

    for stage in range(1, config.n_estimators + 1):
        residuals = pseudo_residuals(y_fit, margin_fit)
        tree = fit_tree(X_fit, residuals, config.max_depth, config.min_samples_leaf, order)
        trees.append(tree)
        margin_fit += lr * tree.predict(X_fit)
        margin_val += lr * tree.predict(X_val)

        val_loss = exp_loss(margin_val, y_val) / n_val
        if val_loss < best - config.early_stop.tol:
            best = val_loss
            stale = 0
        else:
            stale += 1
        if stage % PROGRESS_EVERY == 0:
            logger.info(
                "gbc stage %d train loss %.6g val loss %.6g",
                stage,
                exp_loss(margin_fit, y_fit) / n_fit,
                val_loss,
            )
        if stale >= config.early_stop.patience:
            logger.info("gbc early stop at stage %d (best val loss %.6g)", stage, best)
            break

    return GbcModel(
        initial_score=f0,
        trees=tuple(trees),
        learning_rate=lr,
        n_stages_used=len(trees),
        n_features=X.shape[1],
    )


def _checked(model: GbcModel, features: np.ndarray) -> np.ndarray:
    X = _features(features)
    if X.shape[1] != model.n_features:
        raise DimensionError(f"model was trained on {model.n_features} feature(s), got {X.shape[1]}")
    return X


def staged_margins(model: GbcModel, features: np.ndarray) -> Iterator[np.ndarray]:
    """Margins after stage 0 (the constant) and after each tree"""
    X = _checked(model, features)
    margin = np.full(X.shape[0], model.initial_score)
    yield margin.copy()
    for tree in model.trees:
        margin += model.learning_rate * tree.predict(X)
        yield margin.copy()


def predict_margin(model: GbcModel, features: np.ndarray) -> np.ndarray:
    X = _checked(model, features)
    margin = np.full(X.shape[0], model.initial_score)
    for tree in model.trees:
        margin += model.learning_rate * tree.predict(X)
    return margin


def predict_label(model: GbcModel, features: np.ndarray) -> np.ndarray:
    # A zero margin is a "down" call, like a zero return
    return (predict_margin(model, features) > 0.0).astype(np.int64)


def predict_proba(model: GbcModel, features: np.ndarray) -> np.ndarray:
    """P(up) = 1 / (1 + exp(-2 margin))"""
    return expit(2.0 * predict_margin(model, features))


def directional_hit_rate(predicted: np.ndarray, labels: np.ndarray) -> float:
    p = np.asarray(predicted).ravel()
    y = np.asarray(labels).ravel()
    if p.size == 0 or p.size != y.size:
        raise ArgumentError(f"hit rate needs equal non-empty lengths, got {p.size} and {y.size}")
    return float(np.mean(p == y))


def prediction_csv_rows(model: GbcModel, features: np.ndarray, origin_indices: np.ndarray) -> Tuple[list, list]:
    margin = predict_margin(model, features)
    prob = expit(2.0 * margin)
    rows = [
        [int(idx), f"{m:.17g}", f"{p:.17g}", int(m > 0.0)]
        for idx, m, p in zip(origin_indices, margin, prob)
    ]
    return ["idx", "margin", "prob", "label"], rows


def model_to_dict(model: GbcModel, config: Optional[GbcConfig] = None) -> Dict:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "gbc",
        "f0": model.initial_score,
        "learning_rate": model.learning_rate,
        "n_stages_used": model.n_stages_used,
        "n_features": model.n_features,
        "trees": [tree.to_dict() for tree in model.trees],
    }
    if config is not None:
        payload["config"] = config.to_dict()
    return payload


def model_from_dict(payload: Dict) -> GbcModel:
    if payload.get("format_version") != MODEL_FORMAT_VERSION or payload.get("kind") != "gbc":
        raise DataFormatError(
            f"unsupported GBC model document (kind={payload.get('kind')!r}, "
            f"format_version={payload.get('format_version')!r})"
        )
    trees = tuple(RegressionTree.from_dict(entry) for entry in payload["trees"])
    return GbcModel(
        initial_score=float(payload["f0"]),
        trees=trees,
        learning_rate=float(payload["learning_rate"]),
        n_stages_used=int(payload["n_stages_used"]),
        n_features=int(payload["n_features"]),
    )
