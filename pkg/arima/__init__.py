from .baseline import (
    ArimaParams,
    ArimaSettings,
    css,
    difference,
    fit_css,
    forecast_csv_rows,
    forecast_one_step,
    integrate,
    residuals,
    rolling_forecasts,
)

__all__ = [
    'ArimaParams',
    'ArimaSettings',
    'css',
    'difference',
    'fit_css',
    'forecast_csv_rows',
    'forecast_one_step',
    'integrate',
    'residuals',
    'rolling_forecasts',
]
