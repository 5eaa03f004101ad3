from .ledger import (
    LEDGER_HEADER,
    BacktestConfig,
    BacktestSummary,
    TradeRecord,
    equity_curve,
    ledger_csv_rows,
    run_backtest,
    summarize,
    summary_to_dict,
)

__all__ = [
    'LEDGER_HEADER',
    'BacktestConfig',
    'BacktestSummary',
    'TradeRecord',
    'equity_curve',
    'ledger_csv_rows',
    'run_backtest',
    'summarize',
    'summary_to_dict',
]
