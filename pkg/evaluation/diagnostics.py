#!/usr/bin/env python3
"""
Time-Series Diagnostics Module
Diebold-Mariano test for equal predictive accuracy and the rescaled-range
Hurst exponent
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
from scipy import stats

from utils.errors import ArgumentError, DomainError, InsufficientDataError

logger = logging.getLogger(__name__)

DM_MIN_SAMPLES = 10
HURST_MIN_LENGTH = 100
HURST_MIN_BLOCK = 10
HURST_MIN_SIZES = 4
DM_ZERO_VARIANCE_ULPS = 64


@dataclass(frozen=True)
class DmResult:
    statistic: float
    p_value: float
    horizon: int
    n: int
    mean_diff: float = 0.0
    long_run_variance: float = 0.0
    # Set when d has zero variance but a non-zero mean
    degenerate: bool = False
    harvey: bool = False

    def to_dict(self) -> Dict:
        statistic = self.statistic
        if math.isinf(statistic):
            statistic = "inf" if statistic > 0 else "-inf"
        return {
            "statistic": statistic,
            "p_value": self.p_value,
            "horizon": self.horizon,
            "n": self.n,
            "mean_diff": self.mean_diff,
            "long_run_variance": self.long_run_variance,
            "degenerate": self.degenerate,
            "harvey": self.harvey,
        }


def _autocovariance(d: np.ndarray, lag: int) -> float:
    centred = d - d.mean()
    return float(np.dot(centred[lag:], centred[:d.size - lag])) / d.size


def diebold_mariano(
    losses_a: np.ndarray,
    losses_b: np.ndarray,
    horizon: int = 1,
    harvey: bool = False,
) -> DmResult:
    """Two-sided test on d = losses_a - losses_b.

    The long-run variance sums autocovariances up to lag horizon - 1 with
    rectangular weights. A negative statistic means model a has lower loss.
    With harvey=True the statistic gets the small-sample factor and the
    p-value comes from Student-t with n - 1 degrees of freedom.
    """
    a = np.asarray(losses_a, dtype=np.float64).ravel()
    b = np.asarray(losses_b, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ArgumentError(f"loss vectors differ in length: {a.size} vs {b.size}")
    if a.size < DM_MIN_SAMPLES:
        raise InsufficientDataError(f"the DM test needs at least {DM_MIN_SAMPLES} losses, got {a.size}")
    if horizon < 1 or horizon >= a.size:
        raise ArgumentError(f"horizon must be in [1, {a.size}), got {horizon}")

    d = a - b
    n = d.size
    mean = float(d.mean())
    lrv = _autocovariance(d, 0) + 2.0 * sum(_autocovariance(d, k) for k in range(1, horizon))

    # Rounding leaves a constant differential with a tiny positive variance
    tolerance = (DM_ZERO_VARIANCE_ULPS * np.finfo(np.float64).eps * float(np.max(np.abs(d)))) ** 2
    if np.ptp(d) == 0.0 or lrv <= tolerance:
        if mean == 0.0:
            return DmResult(0.0, 1.0, horizon, n, mean, lrv, harvey=harvey)
        logger.warning("DM loss differential has zero variance with mean %.6g; reporting p=0", mean)
        return DmResult(math.copysign(math.inf, mean), 0.0, horizon, n, mean, lrv, degenerate=True, harvey=harvey)

    statistic = mean / math.sqrt(lrv / n)
    if harvey:
        statistic *= math.sqrt((n + 1 - 2 * horizon + horizon * (horizon - 1) / n) / n)
        p_value = 2.0 * float(stats.t.sf(abs(statistic), df=n - 1))
    else:
        p_value = 2.0 * float(stats.norm.sf(abs(statistic)))
    return DmResult(statistic, min(p_value, 1.0), horizon, n, mean, lrv, harvey=harvey)


@dataclass(frozen=True, eq=False)
class HurstResult:
    H: float
    log_sizes: np.ndarray
    log_rs: np.ndarray
    r_squared: float
    intercept: float = 0.0
    sizes: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "H": self.H,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "sizes": list(self.sizes),
            "log_sizes": [float(v) for v in self.log_sizes],
            "log_rs": [float(v) for v in self.log_rs],
        }


def window_sizes(n: int) -> np.ndarray:
    """Roughly doubling block sizes from 10 up to n // 2"""
    upper = n // 2
    count = max(HURST_MIN_SIZES, int(math.log2(upper / HURST_MIN_BLOCK)) + 1)
    return np.unique(np.geomspace(HURST_MIN_BLOCK, upper, count).astype(np.int64))


def rescaled_range(series: np.ndarray, size: int) -> float:
    """Mean R/S over the floor(n / size) consecutive blocks; nan when every block is flat"""
    x = np.asarray(series, dtype=np.float64).ravel()
    n_blocks = x.size // size
    blocks = x[: n_blocks * size].reshape(n_blocks, size)
    deviation = blocks.std(axis=1)
    usable = deviation > 0.0
    if not np.any(usable):
        return math.nan
    blocks = blocks[usable]
    walk = np.cumsum(blocks - blocks.mean(axis=1, keepdims=True), axis=1)
    spread = walk.max(axis=1) - walk.min(axis=1)
    return float(np.mean(spread / deviation[usable]))


def hurst_exponent(series: np.ndarray) -> HurstResult:
    """Slope of log(R/S) against log(block size)"""
    x = np.asarray(series, dtype=np.float64).ravel()
    if x.size < HURST_MIN_LENGTH:
        raise InsufficientDataError(f"Hurst estimation needs at least {HURST_MIN_LENGTH} values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("Hurst estimation needs a finite series")

    sizes = window_sizes(x.size)
    rs = np.array([rescaled_range(x, int(size)) for size in sizes])
    usable = np.isfinite(rs) & (rs > 0.0)
    if not np.any(usable):
        raise DomainError("every block of the series is constant; R/S is undefined")
    if int(usable.sum()) < HURST_MIN_SIZES:
        raise InsufficientDataError(f"only {int(usable.sum())} usable window sizes, need {HURST_MIN_SIZES}")

    log_sizes = np.log(sizes[usable].astype(np.float64))
    log_rs = np.log(rs[usable])
    fit = stats.linregress(log_sizes, log_rs)
    return HurstResult(
        H=float(fit.slope),
        log_sizes=log_sizes,
        log_rs=log_rs,
        r_squared=float(fit.rvalue ** 2),
        intercept=float(fit.intercept),
        sizes=[int(s) for s in sizes[usable]],
    )
