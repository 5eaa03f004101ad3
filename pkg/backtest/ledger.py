#!/usr/bin/env python3
"""
Backtest Ledger Module
Always-in-market replay of direction calls against realised returns
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from utils.errors import LedgerError

logger = logging.getLogger(__name__)

LEDGER_HEADER = ["index", "return", "label", "pred", "won", "pnl", "equity"]


@dataclass(frozen=True)
class BacktestConfig:
    initial_capital: float = 10000.0
    # Currency amount one unit of return is worth
    stake_base: float = 10000.0

    def __post_init__(self):
        if not (self.initial_capital > 0 and self.stake_base > 0):
            raise LedgerError("initial_capital and stake_base must be positive")


@dataclass(frozen=True)
class TradeRecord:
    index: int
    ret: float
    label: int
    pred: int
    won: bool
    pnl: float
    equity: float

    def csv_row(self) -> List:
        return [
            self.index,
            f"{self.ret:.6f}",
            self.label,
            self.pred,
            str(self.won),
            f"{self.pnl:.6f}",
            f"{self.equity:.6f}",
        ]


@dataclass(frozen=True)
class BacktestSummary:
    n_trades: int
    n_wins: int
    win_rate: float
    net_pnl: float
    final_equity: float
    max_drawdown: float
    initial_capital: float

    @property
    def win_rate_text(self) -> str:
        return f"{100.0 * self.win_rate:.2f}%"

    def to_dict(self) -> Dict:
        return {
            "n_trades": self.n_trades,
            "n_wins": self.n_wins,
            "win_rate": self.win_rate,
            "win_rate_text": self.win_rate_text,
            "net_pnl": self.net_pnl,
            "final_equity": self.final_equity,
            "max_drawdown": self.max_drawdown,
            "initial_capital": self.initial_capital,
        }


def _binary(values: Sequence, name: str) -> np.ndarray:
    v = np.asarray(values).ravel()
    if not np.all((v == 0) | (v == 1)):
        raise LedgerError(f"{name} must contain only 0 and 1")
    return v.astype(np.int64)


def run_backtest(
    returns: Sequence[float],
    labels: Sequence[int],
    preds: Sequence[int],
    config: BacktestConfig = BacktestConfig(),
    start_index: int = 0,
) -> List[TradeRecord]:
    """One trade per step: pnl = +|ret| * stake_base on a correct call, minus otherwise.

    Equity starts from initial_capital and may go negative.
    """
    r = np.asarray(returns, dtype=np.float64).ravel()
    y = _binary(labels, "labels")
    p = _binary(preds, "preds")
    if not (r.size == y.size == p.size):
        raise LedgerError(f"returns, labels and preds differ in length: {r.size}, {y.size}, {p.size}")
    if r.size == 0:
        raise LedgerError("nothing to backtest")

    ledger: List[TradeRecord] = []
    equity = config.initial_capital
    for k in range(r.size):
        ret = float(r[k])
        if not math.isfinite(ret):
            raise LedgerError(f"non-finite return at trade {start_index + k}")
        won = bool(p[k] == y[k])
        pnl = abs(ret) * config.stake_base
        if not won:
            pnl = -pnl
        equity = equity + pnl
        ledger.append(
            TradeRecord(
                index=start_index + k,
                ret=ret,
                label=int(y[k]),
                pred=int(p[k]),
                won=won,
                pnl=pnl,
                equity=equity,
            )
        )
    return ledger


def equity_curve(ledger: Sequence[TradeRecord], initial_capital: float) -> np.ndarray:
    """initial_capital followed by the equity after each trade (n + 1 points)"""
    return np.array([initial_capital] + [t.equity for t in ledger], dtype=np.float64)


def summarize(ledger: Sequence[TradeRecord], config: BacktestConfig = BacktestConfig()) -> BacktestSummary:
    if len(ledger) == 0:
        raise LedgerError("cannot summarise an empty ledger")
    n_wins = sum(1 for t in ledger if t.won)
    curve = equity_curve(ledger, config.initial_capital)
    drawdown = np.maximum.accumulate(curve) - curve
    return BacktestSummary(
        n_trades=len(ledger),
        n_wins=n_wins,
        win_rate=n_wins / len(ledger),
        net_pnl=float(math.fsum(t.pnl for t in ledger)),
        final_equity=ledger[-1].equity,
        max_drawdown=float(drawdown.max()),
        initial_capital=config.initial_capital,
    )


def ledger_csv_rows(ledger: Sequence[TradeRecord]) -> Tuple[List[str], List[List]]:
    return LEDGER_HEADER, [t.csv_row() for t in ledger]


def summary_to_dict(summary: BacktestSummary) -> Dict:
    return summary.to_dict()
