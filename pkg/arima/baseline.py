#!/usr/bin/env python3
"""
ARIMA(1,1,1) Baseline Module
Conditional-sum-of-squares fit and rolling one-step forecasts
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from utils.errors import ConfigError, DataFormatError, DomainError, InsufficientDataError

logger = logging.getLogger(__name__)

MIN_FIT_LENGTH = 20


@dataclass(frozen=True)
class ArimaSettings:
    bound: float = 0.99
    grid_step: float = 0.01
    # Which orientation of the rate series the baseline is fitted on
    fit_on: str = "inverted"

    def __post_init__(self):
        if not 0.0 < self.bound < 1.0:
            raise ConfigError("coefficient bound must lie in (0, 1)")
        if not 0.0 < self.grid_step <= self.bound:
            raise ConfigError("grid step must be positive and no larger than the bound")
        if self.fit_on not in ("inverted", "raw"):
            raise ConfigError(f"fit_on must be 'inverted' or 'raw', got {self.fit_on!r}")


@dataclass(frozen=True)
class ArimaParams:
    phi: float
    theta: float
    intercept: float
    sigma2: float

    def __post_init__(self):
        if not (abs(self.phi) < 1.0 and abs(self.theta) < 1.0):
            raise DomainError(f"phi={self.phi} and theta={self.theta} must both lie strictly inside (-1, 1)")
        # Exactly zero on a noiseless drift
        if not self.sigma2 >= 0.0:
            raise DomainError(f"sigma2 must be non-negative, got {self.sigma2}")

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: Dict) -> "ArimaParams":
        try:
            return cls(
                phi=float(payload["phi"]),
                theta=float(payload["theta"]),
                intercept=float(payload["intercept"]),
                sigma2=float(payload["sigma2"]),
            )
        except KeyError as exc:
            raise DataFormatError(f"ARIMA params document lacks {exc.args[0]!r}") from None


def difference(series: np.ndarray) -> np.ndarray:
    x = np.asarray(series, dtype=np.float64).ravel()
    if x.size < 2:
        raise InsufficientDataError(f"differencing needs at least 2 values, got {x.size}")
    return np.diff(x)


def integrate(diffs: np.ndarray, x0: float) -> np.ndarray:
    """Inverse of difference: x0 followed by the running sums"""
    d = np.asarray(diffs, dtype=np.float64).ravel()
    out = np.empty(d.size + 1)
    out[0] = x0
    out[1:] = x0 + np.cumsum(d)
    return out


def residuals(diffs: np.ndarray, phi: float, theta: float, intercept: float) -> np.ndarray:
    """eps_0 = 0, eps_t = (w_t - mu) - phi (w_{t-1} - mu) - theta eps_{t-1}"""
    w = np.asarray(diffs, dtype=np.float64).ravel() - intercept
    eps = np.zeros(w.size)
    if w.size > 1:
        eps[1:] = lfilter([1.0], [1.0, theta], w[1:] - phi * w[:-1])
    return eps


def css(diffs: np.ndarray, phi: float, theta: float, intercept: float) -> float:
    eps = residuals(diffs, phi, theta, intercept)
    return float(np.dot(eps[1:], eps[1:]))


class _ProfiledCss:
    """CSS with the intercept solved in closed form for every (phi, theta).

    eps is linear in the data: eps = A - phi B - (1 - phi) mu C with A, B, C the
    MA(1) filter applied to w[1:], w[:-1] and ones, so the inner products give
    the optimum mu and the SSE without re-running the recursion per phi.
    """

    def __init__(self, diffs: np.ndarray):
        self.w = np.asarray(diffs, dtype=np.float64)
        self.ones = np.ones(self.w.size - 1)

    def _products(self, theta: float) -> Tuple[float, ...]:
        a = lfilter([1.0], [1.0, theta], self.w[1:])
        b = lfilter([1.0], [1.0, theta], self.w[:-1])
        c = lfilter([1.0], [1.0, theta], self.ones)
        return a @ a, a @ b, b @ b, a @ c, b @ c, c @ c

    def sse(self, phi: np.ndarray, theta: float) -> Tuple[np.ndarray, np.ndarray]:
        aa, ab, bb, ac, bc, cc = self._products(theta)
        cross = ac - phi * bc
        value = aa - 2.0 * phi * ab + phi * phi * bb - cross * cross / cc
        mu = cross / ((1.0 - phi) * cc)
        return np.maximum(value, 0.0), mu

    def __call__(self, point: np.ndarray) -> float:
        value, _ = self.sse(np.asarray(point[0]), float(point[1]))
        return float(value)


def fit_css(series: np.ndarray, settings: Optional[ArimaSettings] = None) -> ArimaParams:
    """Grid search over (phi, theta) then Nelder-Mead from the best grid point"""
    settings = settings or ArimaSettings()
    x = np.asarray(series, dtype=np.float64).ravel()
    if x.size < MIN_FIT_LENGTH:
        raise InsufficientDataError(f"ARIMA fit needs at least {MIN_FIT_LENGTH} values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("ARIMA fit needs a finite series")
    w = difference(x)
    objective = _ProfiledCss(w)

    n_steps = int(round(settings.bound / settings.grid_step))
    grid = np.arange(-n_steps, n_steps + 1) * settings.grid_step
    surface = np.empty((grid.size, grid.size))
    for col, theta in enumerate(grid):
        surface[:, col], _ = objective.sse(grid, theta)
    row, col = np.unravel_index(int(np.argmin(surface)), surface.shape)
    best = np.array([grid[row], grid[col]])
    best_value = float(surface[row, col])

    limit = settings.bound
    result = minimize(
        objective,
        best,
        method="Nelder-Mead",
        bounds=[(-limit, limit), (-limit, limit)],
        options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 2000},
    )
    if result.fun <= best_value:
        best = np.asarray(result.x, dtype=np.float64)
    else:
        logger.debug("Nelder-Mead did not improve on the grid optimum; keeping the grid point")

    phi, theta = float(best[0]), float(best[1])
    if abs(phi) >= limit or abs(theta) >= limit:
        logger.warning("ARIMA optimum (phi=%.4f, theta=%.4f) is on the stationarity boundary; clamped", phi, theta)
        phi = float(np.clip(phi, -limit, limit))
        theta = float(np.clip(theta, -limit, limit))

    _, mu = objective.sse(np.asarray(phi), theta)
    intercept = float(mu)
    sigma2 = css(w, phi, theta, intercept) / (w.size - 1)
    logger.info("ARIMA(1,1,1) fit: phi=%.4f theta=%.4f intercept=%.6g sigma2=%.6g", phi, theta, intercept, sigma2)
    return ArimaParams(phi=phi, theta=theta, intercept=intercept, sigma2=sigma2)


def forecast_one_step(params: ArimaParams, history: np.ndarray) -> float:
    """X_t + mu + phi (w_t - mu) + theta eps_t over the given history"""
    x = np.asarray(history, dtype=np.float64).ravel()
    if x.size < 2:
        raise InsufficientDataError(f"a forecast needs at least 2 observations, got {x.size}")
    w = np.diff(x)
    eps = residuals(w, params.phi, params.theta, params.intercept)
    w_hat = params.intercept + params.phi * (w[-1] - params.intercept) + params.theta * eps[-1]
    return float(x[-1] + w_hat)


def rolling_forecasts(params: ArimaParams, series: np.ndarray, start: int) -> np.ndarray:
    """Forecast of series[t] from series[:t] for every t in [start, n), parameters frozen.

    Equivalent to calling forecast_one_step on each growing prefix; the
    residual recursion is causal so one pass over the series suffices.
    """
    x = np.asarray(series, dtype=np.float64).ravel()
    if start < 2:
        raise InsufficientDataError(f"rolling forecasts need at least 2 observations of history, start={start}")
    if start >= x.size:
        return np.zeros(0)
    w = np.diff(x)
    eps = residuals(w, params.phi, params.theta, params.intercept)
    t = np.arange(start, x.size)
    w_hat = params.intercept + params.phi * (w[t - 2] - params.intercept) + params.theta * eps[t - 2]
    return x[t - 1] + w_hat


def forecast_csv_rows(series: np.ndarray, forecasts: np.ndarray, start: int) -> Tuple[list, list]:
    x = np.asarray(series, dtype=np.float64).ravel()
    rows = [
        [start + k, f"{x[start + k]:.17g}", f"{value:.17g}"]
        for k, value in enumerate(np.asarray(forecasts, dtype=np.float64))
    ]
    return ["idx", "actual", "forecast"], rows
