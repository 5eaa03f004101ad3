#!/usr/bin/env python3
"""
LSTM Network Module
Single-layer LSTM with a linear dense head: parameter types, forward pass,
MSE loss and exact backpropagation-through-time
"""

import logging
from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.special import expit

from utils.errors import ArgumentError, ConfigError, DimensionError, NumericOverflowError

logger = logging.getLogger(__name__)

GATES = ("i", "f", "o", "c")
PARAM_NAMES = (
    tuple(f"W_{g}" for g in GATES)
    + tuple(f"U_{g}" for g in GATES)
    + tuple(f"b_{g}" for g in GATES)
    + ("w_dense", "b_dense")
)


class CellActivation(str, Enum):
    RELU = "relu"
    TANH = "tanh"


@dataclass(frozen=True)
class LstmConfig:
    """Network shape and training hyperparameters"""

    hidden_units: int = 50
    window_len: int = 50
    epochs: int = 50
    batch_size: int = 32
    full_batch: bool = False
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    cell_activation: str = CellActivation.RELU.value
    grad_clip_norm: Optional[float] = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.hidden_units < 1 or self.window_len < 1 or self.batch_size < 1:
            raise ConfigError("hidden_units, window_len and batch_size must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if not (0.0 < self.adam_beta1 < 1.0 and 0.0 < self.adam_beta2 < 1.0):
            raise ConfigError("Adam betas must lie in (0, 1)")
        if self.adam_epsilon <= 0:
            raise ConfigError("adam_epsilon must be > 0")
        if self.grad_clip_norm is not None and self.grad_clip_norm <= 0:
            raise ConfigError("grad_clip_norm must be positive or None")
        try:
            CellActivation(self.cell_activation)
        except ValueError:
            raise ConfigError(f"unknown cell activation {self.cell_activation!r}") from None

    @property
    def activation(self) -> CellActivation:
        return CellActivation(self.cell_activation)

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: Dict) -> "LstmConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in payload.items() if k in known})


@dataclass(eq=False)
class LstmParams:
    """Gate weights (hidden x input / hidden x hidden), gate biases and dense head.

    b_dense is held as a 0-d array so every field takes part in array maths.
    """

    W_i: np.ndarray
    W_f: np.ndarray
    W_o: np.ndarray
    W_c: np.ndarray
    U_i: np.ndarray
    U_f: np.ndarray
    U_o: np.ndarray
    U_c: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_o: np.ndarray
    b_c: np.ndarray
    w_dense: np.ndarray
    b_dense: np.ndarray

    @property
    def hidden_units(self) -> int:
        return self.U_i.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W_i.shape[1]

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray]) -> "LstmParams":
        return cls(**{name: np.asarray(arrays[name], dtype=np.float64) for name in PARAM_NAMES})

    def copy(self) -> "LstmParams":
        return LstmParams.from_arrays({k: v.copy() for k, v in self.arrays().items()})

    def check_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.arrays().values())


@dataclass(frozen=True, eq=False)
class LstmState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_units: int, batch: Optional[int] = None) -> "LstmState":
        shape = (hidden_units,) if batch is None else (batch, hidden_units)
        return cls(h=np.zeros(shape), c=np.zeros(shape))


def _glorot(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def init_params(config: LstmConfig, seed: Optional[int] = None, input_dim: int = 1) -> LstmParams:
    """Glorot-uniform weights, zero biases except forget bias 1.0"""
    rng = np.random.default_rng(config.seed if seed is None else seed)
    hidden = config.hidden_units
    arrays: Dict[str, np.ndarray] = {}
    for g in GATES:
        arrays[f"W_{g}"] = _glorot(rng, (hidden, input_dim), input_dim, hidden)
    for g in GATES:
        arrays[f"U_{g}"] = _glorot(rng, (hidden, hidden), hidden, hidden)
    for g in GATES:
        arrays[f"b_{g}"] = np.full(hidden, 1.0 if g == "f" else 0.0)
    arrays["w_dense"] = _glorot(rng, (hidden,), hidden, 1)
    arrays["b_dense"] = np.array(0.0)
    return LstmParams.from_arrays(arrays)


def zeros_like(params: LstmParams) -> LstmParams:
    return LstmParams.from_arrays({k: np.zeros_like(v) for k, v in params.arrays().items()})


def _activate(z: np.ndarray, kind: CellActivation) -> np.ndarray:
    if kind is CellActivation.TANH:
        return np.tanh(z)
    return np.maximum(z, 0.0)


def _activate_grad(z: np.ndarray, a: np.ndarray, kind: CellActivation) -> np.ndarray:
    if kind is CellActivation.TANH:
        return 1.0 - a * a
    # Subgradient at 0 is 0
    return (z > 0.0).astype(np.float64)


def _stacked(params: LstmParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    W = np.concatenate([params.W_i, params.W_f, params.W_o, params.W_c], axis=0)
    U = np.concatenate([params.U_i, params.U_f, params.U_o, params.U_c], axis=0)
    b = np.concatenate([params.b_i, params.b_f, params.b_o, params.b_c])
    return W, U, b


def cell_step(
    params: LstmParams,
    x_t: np.ndarray,
    state: LstmState,
    activation: CellActivation = CellActivation.RELU,
) -> LstmState:
    """One LSTM step; accepts a single sample or a leading batch axis"""
    kind = CellActivation(activation)
    x = np.asarray(x_t, dtype=np.float64)
    if x.ndim == 0:
        x = x.reshape(1)
    hidden = params.hidden_units
    if x.shape[-1] != params.input_dim:
        raise DimensionError(f"input has {x.shape[-1]} feature(s), params expect {params.input_dim}")
    if state.h.shape[-1] != hidden or state.c.shape != state.h.shape:
        raise DimensionError(f"state shape {state.h.shape}/{state.c.shape} does not match {hidden} hidden units")

    W, U, b = _stacked(params)
    a = x @ W.T + state.h @ U.T + b
    i = expit(a[..., :hidden])
    f = expit(a[..., hidden:2 * hidden])
    o = expit(a[..., 2 * hidden:3 * hidden])
    g = _activate(a[..., 3 * hidden:], kind)
    c = f * state.c + i * g
    return LstmState(h=o * _activate(c, kind), c=c)


def _as_batch(windows: np.ndarray, config: LstmConfig, input_dim: int) -> np.ndarray:
    X = np.asarray(windows, dtype=np.float64)
    if X.ndim == 2 and input_dim == 1:
        X = X[:, :, None]
    if X.ndim != 3:
        raise DimensionError(f"windows must be (batch, steps) or (batch, steps, features), got shape {X.shape}")
    if X.shape[1] != config.window_len:
        raise DimensionError(f"window length {X.shape[1]} does not match configured {config.window_len}")
    if X.shape[2] != input_dim:
        raise DimensionError(f"windows carry {X.shape[2]} feature(s), params expect {input_dim}")
    return X


def _run(params: LstmParams, X: np.ndarray, kind: CellActivation, keep_cache: bool):
    batch, steps, _ = X.shape
    hidden = params.hidden_units
    W, U, b = _stacked(params)
    h = np.zeros((batch, hidden))
    c = np.zeros((batch, hidden))
    cache: List[Tuple] = []
    for t in range(steps):
        a = X[:, t, :] @ W.T + h @ U.T + b
        i = expit(a[:, :hidden])
        f = expit(a[:, hidden:2 * hidden])
        o = expit(a[:, 2 * hidden:3 * hidden])
        g_pre = a[:, 3 * hidden:]
        g = _activate(g_pre, kind)
        c_new = f * c + i * g
        s = _activate(c_new, kind)
        h_new = o * s
        if keep_cache:
            cache.append((h, c, i, f, o, g_pre, g, c_new, s))
        h, c = h_new, c_new
    preds = h @ params.w_dense + params.b_dense
    return preds, h, cache


def forward(params: LstmParams, window: np.ndarray, config: LstmConfig) -> float:
    """Prediction for one window, run from a zero state"""
    x = np.asarray(window, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise DimensionError(f"a window must be 1-D or (steps, features), got shape {x.shape}")
    X = _as_batch(x[None, :, :], config, params.input_dim)
    preds, _, _ = _run(params, X, config.activation, keep_cache=False)
    return float(preds[0])


def predict_windows(params: LstmParams, windows: np.ndarray, config: LstmConfig) -> np.ndarray:
    """Scaled predictions for a stack of windows; samples do not interact"""
    X = _as_batch(windows, config, params.input_dim)
    preds, _, _ = _run(params, X, config.activation, keep_cache=False)
    return preds


def mse_loss(predictions: np.ndarray, targets: np.ndarray) -> float:
    p = np.asarray(predictions, dtype=np.float64).ravel()
    y = np.asarray(targets, dtype=np.float64).ravel()
    if p.size == 0 or p.size != y.size:
        raise ArgumentError(f"mse needs equal non-empty lengths, got {p.size} and {y.size}")
    residual = p - y
    return float(np.mean(residual * residual))


def loss_and_gradients(
    params: LstmParams,
    windows: np.ndarray,
    targets: np.ndarray,
    config: LstmConfig,
    epoch: Optional[int] = None,
    batch: Optional[int] = None,
) -> Tuple[float, LstmParams]:
    """Batch-mean MSE and its exact gradient by backpropagation through time"""
    X = _as_batch(windows, config, params.input_dim)
    y = np.asarray(targets, dtype=np.float64).ravel()
    if X.shape[0] == 0:
        raise ArgumentError("empty batch")
    if y.size != X.shape[0]:
        raise DimensionError(f"{X.shape[0]} windows but {y.size} targets")

    kind = config.activation
    hidden = params.hidden_units
    preds, h_last, cache = _run(params, X, kind, keep_cache=True)
    residual = preds - y
    loss = float(np.mean(residual * residual))
    if not np.isfinite(loss):
        raise NumericOverflowError("non-finite loss in forward pass", epoch, batch)

    n = X.shape[0]
    dpred = 2.0 * residual / n
    grad_w_dense = h_last.T @ dpred
    grad_b_dense = np.array(dpred.sum())

    _, U, _ = _stacked(params)
    dW = np.zeros((4 * hidden, params.input_dim))
    dU = np.zeros((4 * hidden, hidden))
    db = np.zeros(4 * hidden)

    dh = np.outer(dpred, params.w_dense)
    dc_next = np.zeros_like(dh)
    for t in reversed(range(len(cache))):
        h_prev, c_prev, i, f, o, g_pre, g, c_new, s = cache[t]
        do = dh * s
        dc = dc_next + dh * o * _activate_grad(c_new, s, kind)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dc_next = dc * f
        da = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                do * o * (1.0 - o),
                dg * _activate_grad(g_pre, g, kind),
            ],
            axis=1,
        )
        dW += da.T @ X[:, t, :]
        dU += da.T @ h_prev
        db += da.sum(axis=0)
        dh = da @ U

    grads: Dict[str, np.ndarray] = {"w_dense": grad_w_dense, "b_dense": grad_b_dense}
    for k, g_name in enumerate(GATES):
        rows = slice(k * hidden, (k + 1) * hidden)
        grads[f"W_{g_name}"] = dW[rows]
        grads[f"U_{g_name}"] = dU[rows]
        grads[f"b_{g_name}"] = db[rows]
    result = LstmParams.from_arrays(grads)
    if not result.check_finite():
        raise NumericOverflowError("non-finite gradient", epoch, batch)
    return loss, result


def backward(params: LstmParams, windows: np.ndarray, targets: np.ndarray, config: LstmConfig) -> LstmParams:
    return loss_and_gradients(params, windows, targets, config)[1]
