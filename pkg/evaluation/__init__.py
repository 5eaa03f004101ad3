from .diagnostics import DmResult, HurstResult, diebold_mariano, hurst_exponent, rescaled_range, window_sizes
from .metrics import METRICS_HEADER, MetricsReport, directional_accuracy, forecast_report, mae, rmse

__all__ = [
    'METRICS_HEADER',
    'DmResult',
    'HurstResult',
    'MetricsReport',
    'diebold_mariano',
    'directional_accuracy',
    'forecast_report',
    'hurst_exponent',
    'mae',
    'rescaled_range',
    'rmse',
    'window_sizes',
]
