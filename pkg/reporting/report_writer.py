#!/usr/bin/env python3
"""
Report Writer
Collates metrics, diagnostics and the backtest summary into one markdown file
"""

from typing import Dict, List, Optional


def _fmt(value, digits: int = 6) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


class ReportWriter:
    """Builds the run summary from the JSON artifacts of evaluate and backtest"""

    def __init__(self, title: str = "fxcast run report"):
        self.title = title

    def render(
        self,
        manifest: Dict,
        manifest_sha256: str,
        metrics: Dict,
        dm: Dict,
        hurst: Dict,
        backtest: Optional[Dict],
        plots: Dict[str, str],
    ) -> str:
        lines: List[str] = [f"# {self.title}", ""]
        lines += [
            f"- manifest sha256: `{manifest_sha256}`",
            f"- tool version: {manifest.get('tool_version', 'unknown')}",
            f"- input sha256: `{manifest.get('input_hash', 'unknown')}`",
            f"- models: {', '.join(sorted(manifest.get('models', {}))) or 'none'}",
            "",
        ]
        lines += self._metrics_section(metrics, manifest)
        lines += self._dm_section(dm)
        lines += self._hurst_section(hurst, plots.get("hurst"))
        lines += self._backtest_section(backtest, plots)
        return "\n".join(lines).rstrip("\n") + "\n"

    def _metrics_section(self, metrics: Dict, manifest: Dict) -> List[str]:
        lines = ["## Forecast metrics", "", "| model | rmse | mae | directional accuracy | n |", "|---|---|---|---|---|"]
        rows = {row["model"]: row for row in metrics.get("rows", [])}
        for model in sorted(manifest.get("models", {})):
            row = rows.get(model)
            if row is None:
                lines.append(f"| {model} | not evaluated | | | |")
                continue
            lines.append(
                f"| {model} | {_fmt(row['rmse'])} | {_fmt(row['mae'])} | "
                f"{_fmt(row['directional_accuracy'], 4)} | {row['n']} |"
            )
        lines.append("")
        if "lstm_beats_arima" in metrics:
            lines.append(f"LSTM test RMSE below ARIMA(1,1,1): {_fmt(metrics['lstm_beats_arima'])}")
        if "lstm_pseudo_accuracy" in metrics:
            lines.append(
                f"LSTM pseudo-accuracy 100*(1 - RMSE/mean|target|), not a standard metric: "
                f"{_fmt(metrics['lstm_pseudo_accuracy'], 5)}"
            )
        lines.append("")
        return lines

    def _dm_section(self, dm: Dict) -> List[str]:
        if not dm:
            return []
        lines = ["## Diebold-Mariano (LSTM vs ARIMA, squared errors)", ""]
        if "skipped" in dm:
            return lines + [f"- not computed: {dm['skipped']}", ""]
        lines.append(f"- statistic: {_fmt(dm.get('statistic'))}")
        lines.append(f"- p-value: {_fmt(dm.get('p_value'))}")
        lines.append(f"- horizon: {dm.get('horizon')}, n: {dm.get('n')}")
        if dm.get("degenerate"):
            lines.append("- loss differential has zero variance")
        lines.append("")
        return lines

    def _hurst_section(self, hurst: Dict, plot: Optional[str]) -> List[str]:
        if not hurst:
            return []
        lines = ["## Hurst exponent (rescaled range)", ""]
        lines.append(f"- H: {_fmt(hurst.get('H'), 5)} (r^2 {_fmt(hurst.get('r_squared'), 4)})")
        lines.append(f"- window sizes: {', '.join(str(s) for s in hurst.get('sizes', []))}")
        if plot:
            lines.append(f"- plot: [{plot}]({plot})")
        lines.append("")
        return lines

    def _backtest_section(self, backtest: Optional[Dict], plots: Dict[str, str]) -> List[str]:
        if not backtest:
            return []
        lines = ["## Backtest (GBC direction calls)", ""]
        lines.append(f"- trades: {backtest['n_trades']}, wins: {backtest['n_wins']}, win rate {backtest['win_rate_text']}")
        lines.append(f"- net pnl: {backtest['net_pnl']:.2f}")
        lines.append(f"- final equity: {backtest['final_equity']:.2f} (start {backtest['initial_capital']:.2f})")
        lines.append(f"- max drawdown: {backtest['max_drawdown']:.2f}")
        for name in ("equity", "histogram", "overlay"):
            if name in plots:
                lines.append(f"- {name}: [{plots[name]}]({plots[name]})")
        lines.append("")
        return lines
