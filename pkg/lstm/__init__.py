#!/usr/bin/env python3
"""
LSTM Module
From-scratch LSTM regressor trained by backpropagation through time
"""

from .network import (
    CellActivation,
    LstmConfig,
    LstmParams,
    LstmState,
    backward,
    cell_step,
    forward,
    init_params,
    loss_and_gradients,
    mse_loss,
    predict_windows,
)
from .optimizer import AdamState, adam_step, clip_by_global_norm, global_norm, init_moments
from .trainer import TrainHistory, TrainResult, model_from_dict, model_to_dict, predict_series, pseudo_accuracy, train

__all__ = [
    'AdamState',
    'CellActivation',
    'LstmConfig',
    'LstmParams',
    'LstmState',
    'TrainHistory',
    'TrainResult',
    'adam_step',
    'backward',
    'cell_step',
    'clip_by_global_norm',
    'forward',
    'global_norm',
    'init_moments',
    'init_params',
    'loss_and_gradients',
    'model_from_dict',
    'model_to_dict',
    'mse_loss',
    'predict_series',
    'predict_windows',
    'pseudo_accuracy',
    'train',
]
