from .features import (
    ChronoSplit,
    LabeledDataset,
    ScalerParams,
    WindowedDataset,
    chrono_split,
    daily_returns,
    direction_dataset,
    features_csv_rows,
    make_labels,
    minmax_fit,
    minmax_inverse,
    minmax_transform,
    sliding_windows,
)

__all__ = [
    'ChronoSplit',
    'LabeledDataset',
    'ScalerParams',
    'WindowedDataset',
    'chrono_split',
    'daily_returns',
    'direction_dataset',
    'features_csv_rows',
    'make_labels',
    'minmax_fit',
    'minmax_inverse',
    'minmax_transform',
    'sliding_windows',
]
