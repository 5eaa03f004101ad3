#!/usr/bin/env python3
"""
Gradient Boosting Module
Exponential-loss boosted trees for direction classification
"""

from .classifier import (
    EarlyStopConfig,
    GbcConfig,
    GbcModel,
    directional_hit_rate,
    exp_loss,
    fit_initial_score,
    model_from_dict,
    model_to_dict,
    prediction_csv_rows,
    predict_label,
    predict_margin,
    predict_proba,
    pseudo_residuals,
    staged_margins,
    to_signed_labels,
    train,
)
from .tree import RegressionTree, TreeNode, fit_tree, newton_leaf_value, presort

__all__ = [
    'EarlyStopConfig',
    'GbcConfig',
    'GbcModel',
    'RegressionTree',
    'TreeNode',
    'directional_hit_rate',
    'exp_loss',
    'fit_initial_score',
    'fit_tree',
    'model_from_dict',
    'model_to_dict',
    'newton_leaf_value',
    'prediction_csv_rows',
    'predict_label',
    'predict_margin',
    'predict_proba',
    'presort',
    'pseudo_residuals',
    'staged_margins',
    'to_signed_labels',
    'train',
]
