"""
Adam with bias-corrected moments and optional global-norm gradient clipping
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from utils.errors import ArgumentError, DimensionError

from .network import LstmConfig, LstmParams, zeros_like


@dataclass(eq=False)
class AdamState:
    """First and second moment estimates, one array per parameter"""

    m: LstmParams
    v: LstmParams


def init_moments(params: LstmParams) -> AdamState:
    return AdamState(m=zeros_like(params), v=zeros_like(params))


def global_norm(grads: LstmParams) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.arrays().values())))


def clip_by_global_norm(grads: LstmParams, max_norm: Optional[float]) -> Tuple[LstmParams, float]:
    """Scale every gradient by max_norm / norm when the global norm exceeds max_norm"""
    norm = global_norm(grads)
    if max_norm is None or norm <= max_norm:
        return grads, norm
    scale = max_norm / norm
    return LstmParams.from_arrays({k: g * scale for k, g in grads.arrays().items()}), norm


def adam_step(
    params: LstmParams,
    grads: LstmParams,
    moments: AdamState,
    t: int,
    config: LstmConfig,
) -> Tuple[LstmParams, AdamState]:
    """One Adam update at step t (t >= 1); inputs are left untouched"""
    if t < 1:
        raise ArgumentError(f"Adam step index must be >= 1, got {t}")
    grads, _ = clip_by_global_norm(grads, config.grad_clip_norm)

    beta1, beta2 = config.adam_beta1, config.adam_beta2
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t

    new_params: Dict[str, np.ndarray] = {}
    new_m: Dict[str, np.ndarray] = {}
    new_v: Dict[str, np.ndarray] = {}
    m_arrays = moments.m.arrays()
    v_arrays = moments.v.arrays()
    for name, theta in params.arrays().items():
        g = getattr(grads, name)
        if g.shape != theta.shape:
            raise DimensionError(f"gradient {name} has shape {g.shape}, parameter has {theta.shape}")
        m = beta1 * m_arrays[name] + (1.0 - beta1) * g
        v = beta2 * v_arrays[name] + (1.0 - beta2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        new_params[name] = theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_epsilon)
        new_m[name] = m
        new_v[name] = v
    return (
        LstmParams.from_arrays(new_params),
        AdamState(m=LstmParams.from_arrays(new_m), v=LstmParams.from_arrays(new_v)),
    )
