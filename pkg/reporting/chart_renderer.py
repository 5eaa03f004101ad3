#!/usr/bin/env python3
"""
Chart Renderer
Draws equity curves, return histograms, forecast overlays and the Hurst
regression as standalone SVG documents
"""

import math
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np


class ChartRenderer:
    """Renders pipeline results as static SVG text"""

    def __init__(self, width: int = 800, height: int = 400):
        self.width = width
        self.height = height
        self.margin = 50

        # Series colours
        self.series_colors = [
            "#1f77b4",  # Blue - actual / equity
            "#d62728",  # Red - prediction
            "#2ca02c",  # Green - regression fit
            "#ff7f0e",  # Orange - other
        ]

        # Visualization settings
        self.line_thickness = 2
        self.point_radius = 3
        self.show_points = False
        self.show_grid = True

    def set_visualization_options(self, show_points: bool = False, show_grid: bool = True):
        self.show_points = show_points
        self.show_grid = show_grid

    def set_line_thickness(self, thickness: int):
        self.line_thickness = max(1, thickness)

    def set_point_radius(self, radius: int):
        self.point_radius = max(1, radius)

    # Layout helpers

    def _scale(self, values: np.ndarray, lo: float, hi: float, start: float, stop: float) -> np.ndarray:
        if hi == lo:
            return np.full(values.shape, 0.5 * (start + stop))
        return start + (values - lo) * (stop - start) / (hi - lo)

    def _xy(self, x: np.ndarray, y: np.ndarray, x_range: Tuple[float, float], y_range: Tuple[float, float]):
        px = self._scale(x, x_range[0], x_range[1], self.margin, self.width - self.margin)
        # SVG y grows downwards
        py = self._scale(y, y_range[0], y_range[1], self.height - self.margin, self.margin)
        return px, py

    def _open(self, title: str) -> List[str]:
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">',
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="white"/>',
            f'<text x="{self.width / 2:.1f}" y="25" text-anchor="middle" font-family="sans-serif" '
            f'font-size="16">{escape(title)}</text>',
        ]
        if self.show_grid:
            parts.append(
                f'<rect x="{self.margin}" y="{self.margin}" width="{self.width - 2 * self.margin}" '
                f'height="{self.height - 2 * self.margin}" fill="none" stroke="#cccccc"/>'
            )
        return parts

    def _axis_labels(self, x_range, y_range) -> List[str]:
        bottom = self.height - self.margin
        return [
            f'<text x="{self.margin}" y="{bottom + 20}" font-family="sans-serif" font-size="11">{x_range[0]:.4g}</text>',
            f'<text x="{self.width - self.margin}" y="{bottom + 20}" text-anchor="end" font-family="sans-serif" '
            f'font-size="11">{x_range[1]:.4g}</text>',
            f'<text x="{self.margin - 5}" y="{bottom}" text-anchor="end" font-family="sans-serif" '
            f'font-size="11">{y_range[0]:.6g}</text>',
            f'<text x="{self.margin - 5}" y="{self.margin + 10}" text-anchor="end" font-family="sans-serif" '
            f'font-size="11">{y_range[1]:.6g}</text>',
        ]

    def _polyline(self, px: np.ndarray, py: np.ndarray, color: str, label: str) -> str:
        points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        return (
            f'<polyline data-series="{escape(label)}" fill="none" stroke="{color}" '
            f'stroke-width="{self.line_thickness}" points="{points}"/>'
        )

    def _circles(self, px: np.ndarray, py: np.ndarray, color: str) -> List[str]:
        return [f'<circle cx="{a:.2f}" cy="{b:.2f}" r="{self.point_radius}" fill="{color}"/>' for a, b in zip(px, py)]

    @staticmethod
    def _range(*arrays: np.ndarray) -> Tuple[float, float]:
        values = np.concatenate([np.asarray(a, dtype=np.float64).ravel() for a in arrays])
        return float(values.min()), float(values.max())

    # Charts

    def equity_curve_svg(self, equity: Sequence[float], title: str = "Equity curve") -> str:
        """One polyline through every equity point, starting capital included"""
        y = np.asarray(equity, dtype=np.float64)
        x = np.arange(y.size, dtype=np.float64)
        x_range, y_range = (0.0, float(max(y.size - 1, 1))), self._range(y)
        px, py = self._xy(x, y, x_range, y_range)
        parts = self._open(title)
        parts.append(self._polyline(px, py, self.series_colors[0], "equity"))
        if self.show_points:
            parts.extend(self._circles(px, py, self.series_colors[0]))
        parts.extend(self._axis_labels(x_range, y_range))
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    def histogram_svg(self, values: Sequence[float], bins: Optional[int] = None, title: str = "Return histogram") -> str:
        """One bar per bin; ceil(sqrt(n)) bins unless given"""
        v = np.asarray(values, dtype=np.float64)
        if bins is None:
            bins = max(1, math.ceil(math.sqrt(v.size)))
        counts, edges = np.histogram(v, bins=bins)
        x_range = (float(edges[0]), float(edges[-1]))
        y_range = (0.0, float(max(counts.max(), 1)))
        left, _ = self._xy(edges[:-1], np.zeros(bins), x_range, y_range)
        right, _ = self._xy(edges[1:], np.zeros(bins), x_range, y_range)
        _, top = self._xy(np.zeros(bins), counts.astype(np.float64), x_range, y_range)
        base = self.height - self.margin
        parts = self._open(title)
        for x0, x1, y0, count in zip(left, right, top, counts):
            parts.append(
                f'<rect class="bin" data-count="{int(count)}" x="{x0:.2f}" y="{y0:.2f}" '
                f'width="{max(x1 - x0 - 1.0, 0.5):.2f}" height="{base - y0:.2f}" fill="{self.series_colors[0]}"/>'
            )
        parts.extend(self._axis_labels(x_range, y_range))
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    def overlay_svg(
        self,
        actual: Sequence[float],
        predicted: Sequence[float],
        title: str = "Actual vs predicted",
        labels: Tuple[str, str] = ("actual", "predicted"),
    ) -> str:
        a = np.asarray(actual, dtype=np.float64)
        p = np.asarray(predicted, dtype=np.float64)
        x = np.arange(a.size, dtype=np.float64)
        x_range, y_range = (0.0, float(max(a.size - 1, 1))), self._range(a, p)
        parts = self._open(title)
        for k, (series, label) in enumerate(zip((a, p), labels)):
            px, py = self._xy(x, series, x_range, y_range)
            parts.append(self._polyline(px, py, self.series_colors[k], label))
        for k, label in enumerate(labels):
            y_text = self.margin + 15 + 15 * k
            parts.append(
                f'<text x="{self.width - self.margin - 5}" y="{y_text}" text-anchor="end" font-family="sans-serif" '
                f'font-size="12" fill="{self.series_colors[k]}">{escape(label)}</text>'
            )
        parts.extend(self._axis_labels(x_range, y_range))
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    def hurst_svg(self, log_sizes: Sequence[float], log_rs: Sequence[float], slope: float, intercept: float) -> str:
        """log(R/S) against log(size) with the fitted line"""
        x = np.asarray(log_sizes, dtype=np.float64)
        y = np.asarray(log_rs, dtype=np.float64)
        fit = intercept + slope * x
        x_range, y_range = self._range(x), self._range(y, fit)
        px, py = self._xy(x, y, x_range, y_range)
        fx, fy = self._xy(x, fit, x_range, y_range)
        parts = self._open(f"Rescaled range, H = {slope:.4f}")
        parts.extend(self._circles(px, py, self.series_colors[0]))
        parts.append(self._polyline(fx, fy, self.series_colors[2], "fit"))
        parts.extend(self._axis_labels(x_range, y_range))
        parts.append("</svg>")
        return "\n".join(parts) + "\n"
