from .ohlc_loader import (
    SAMPLE_DATA_PATH,
    OhlcBar,
    Orientation,
    RateSeries,
    ValidationReport,
    bars_to_series,
    clean_series,
    forward_fill,
    invert_rates,
    load_source,
    parse_ohlc_csv,
    series_from_csv,
    series_to_csv,
    validate_bars,
)
from .fetcher import cache_path_for, default_cache_dir, fetch_remote

__all__ = [
    'SAMPLE_DATA_PATH',
    'OhlcBar',
    'Orientation',
    'RateSeries',
    'ValidationReport',
    'bars_to_series',
    'cache_path_for',
    'clean_series',
    'default_cache_dir',
    'fetch_remote',
    'forward_fill',
    'invert_rates',
    'load_source',
    'parse_ohlc_csv',
    'series_from_csv',
    'series_to_csv',
    'validate_bars',
]
