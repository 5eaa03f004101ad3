#!/usr/bin/env python3
"""
LSTM Trainer Module
Chronological mini-batch training, rescaled prediction and model files
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from preprocess.features import ScalerParams, WindowedDataset, minmax_inverse
from utils.errors import DataFormatError, InsufficientDataError, NumericOverflowError

from .network import LstmConfig, LstmParams, PARAM_NAMES, init_params, loss_and_gradients, predict_windows
from .optimizer import adam_step, init_moments

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1


@dataclass
class TrainHistory:
    losses: List[float] = field(default_factory=list)
    seconds: List[float] = field(default_factory=list)

    @property
    def epochs_completed(self) -> int:
        return len(self.losses)

    def csv_rows(self, with_timings: bool = False) -> List[List[str]]:
        """Rows of `epoch,loss,seconds`; seconds stay empty unless asked for"""
        return [
            [str(epoch), f"{loss:.17g}", f"{secs:.6f}" if with_timings else ""]
            for epoch, (loss, secs) in enumerate(zip(self.losses, self.seconds), start=1)
        ]


@dataclass(eq=False)
class TrainResult:
    params: LstmParams
    history: TrainHistory


def _input_dim(dataset: WindowedDataset) -> int:
    return 1 if dataset.inputs.ndim == 2 else dataset.inputs.shape[2]


def train(dataset: WindowedDataset, config: LstmConfig) -> TrainResult:
    """Adam over contiguous, unshuffled batches; deterministic for a given seed"""
    n = dataset.n_samples
    if n == 0:
        raise InsufficientDataError("the training split is empty")
    if dataset.window_len != config.window_len:
        raise DataFormatError(f"dataset windows are {dataset.window_len} long, config expects {config.window_len}")

    params = init_params(config, config.seed, _input_dim(dataset))
    moments = init_moments(params)
    history = TrainHistory()
    batch_size = n if config.full_batch else config.batch_size
    step = 0

    for epoch in range(1, config.epochs + 1):
        started = time.perf_counter()
        weighted = 0.0
        for batch, lo in enumerate(range(0, n, batch_size)):
            windows = dataset.inputs[lo:lo + batch_size]
            targets = dataset.targets[lo:lo + batch_size]
            loss, grads = loss_and_gradients(params, windows, targets, config, epoch=epoch, batch=batch)
            step += 1
            params, moments = adam_step(params, grads, moments, step, config)
            if not params.check_finite():
                raise NumericOverflowError("parameters became non-finite after the Adam update", epoch, batch)
            weighted += loss * targets.size
        history.losses.append(weighted / n)
        history.seconds.append(time.perf_counter() - started)
        logger.info("lstm epoch %d/%d loss %.6g (%.2fs)", epoch, config.epochs, history.losses[-1], history.seconds[-1])

    return TrainResult(params=params, history=history)


def predict_series(
    params: LstmParams,
    scaler: ScalerParams,
    dataset: WindowedDataset,
    config: LstmConfig,
) -> np.ndarray:
    """Unscaled predictions; element i belongs to source index origin_indices[i].

    The windows must have been scaled with `scaler`; that cannot be checked here.
    """
    if dataset.n_samples == 0:
        return np.zeros(0)
    return minmax_inverse(scaler, predict_windows(params, dataset.inputs, config))


def pseudo_accuracy(rmse_value: float, targets: np.ndarray) -> float:
    """100 * (1 - RMSE / mean|target|); a convenience reading, not a standard metric"""
    scale = float(np.mean(np.abs(targets)))
    if scale == 0.0:
        return float("nan")
    return 100.0 * (1.0 - rmse_value / scale)


def model_to_dict(
    params: LstmParams,
    config: LstmConfig,
    scaler: Optional[ScalerParams] = None,
    extra: Optional[Dict] = None,
) -> Dict:
    """Versioned JSON-ready document; floats keep their exact repr"""
    arrays = {}
    for name, value in params.arrays().items():
        arrays[name] = {
            "shape": list(value.shape),
            "data": [float(x) for x in np.asarray(value).ravel()],
        }
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "lstm",
        "config": config.to_dict(),
        "params": arrays,
    }
    if scaler is not None:
        payload["scaler"] = scaler.to_dict()
    if extra:
        payload["extra"] = extra
    return payload


def model_from_dict(payload: Dict) -> Tuple[LstmParams, LstmConfig, Optional[ScalerParams]]:
    if payload.get("format_version") != MODEL_FORMAT_VERSION or payload.get("kind") != "lstm":
        raise DataFormatError(
            f"unsupported LSTM model document (kind={payload.get('kind')!r}, "
            f"format_version={payload.get('format_version')!r})"
        )
    arrays = {}
    for name in PARAM_NAMES:
        entry = payload["params"][name]
        arrays[name] = np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
    scaler = None
    if "scaler" in payload:
        scaler = ScalerParams(min=float(payload["scaler"]["min"]), max=float(payload["scaler"]["max"]))
    return LstmParams.from_arrays(arrays), LstmConfig.from_dict(payload["config"]), scaler
