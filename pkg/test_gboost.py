#!/usr/bin/env python3
"""
Test script for the boosted direction classifier and its regression trees
"""

import json
import math
import sys

import numpy as np
import pytest

from gboost.classifier import (
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
from gboost.tree import RegressionTree, TreeNode, fit_tree, newton_leaf_value
from utils.errors import ArgumentError, ConfigError, DataFormatError, DegenerateClassError, DimensionError


def separable_toy(n: int = 40):
    """Alternating labels; the single feature sits well apart per class"""
    labels = np.arange(n) % 2
    features = (2.0 * labels + 0.001 * np.arange(n)).reshape(-1, 1)
    return features, labels


def noisy_problem(n: int = 300, seed: int = 7):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 4))
    labels = (X[:, 0] + 0.5 * X[:, 1] + rng.normal(scale=0.8, size=n) > 0).astype(int)
    return X, labels


def test_exp_loss_closed_forms():
    assert exp_loss(np.zeros(5), np.ones(5)) == pytest.approx(5.0)
    assert exp_loss([math.log(2.0)], [1.0]) == pytest.approx(0.5)
    losses = [exp_loss([m, -m], [1.0, -1.0]) for m in (0.0, 1.0, 2.0, 5.0)]
    assert all(a > b for a, b in zip(losses, losses[1:]))


def test_exp_loss_rejects_unsigned_labels():
    with pytest.raises(ArgumentError):
        exp_loss([0.0, 0.0], [0.0, 1.0])


def test_initial_score():
    assert fit_initial_score([1.0, -1.0, 1.0, -1.0]) == 0.0
    assert fit_initial_score([1.0, 1.0, 1.0, -1.0]) == pytest.approx(0.5 * math.log(3.0))
    with pytest.raises(DegenerateClassError):
        fit_initial_score([1.0, 1.0])


@pytest.mark.parametrize("seed", range(10))
def test_initial_score_beats_every_constant(seed):
    y = np.where(np.random.default_rng(seed).random(25) < 0.6, 1.0, -1.0)
    y[:2] = [1.0, -1.0]
    f0 = fit_initial_score(y)
    best = exp_loss(np.full(y.size, f0), y)
    for c in np.linspace(-5.0, 5.0, 10001):
        assert exp_loss(np.full(y.size, c), y) >= best - 1e-12


def test_pseudo_residuals():
    np.testing.assert_allclose(pseudo_residuals([1.0, -1.0], [0.0, 0.0]), [1.0, -1.0])
    assert pseudo_residuals([1.0], [math.log(2.0)])[0] == pytest.approx(0.5)


def test_pseudo_residuals_are_negative_gradient():
    rng = np.random.default_rng(0)
    y = np.where(rng.random(6) > 0.5, 1.0, -1.0)
    f = rng.normal(size=6)
    r = pseudo_residuals(y, f)
    eps = 1e-6
    for k in range(6):
        up, down = f.copy(), f.copy()
        up[k] += eps
        down[k] -= eps
        numeric = -(exp_loss(up, y) - exp_loss(down, y)) / (2.0 * eps)
        assert r[k] == pytest.approx(numeric, abs=1e-6)


def test_signed_labels():
    np.testing.assert_array_equal(to_signed_labels([0, 1, 1]), [-1.0, 1.0, 1.0])
    with pytest.raises(ArgumentError):
        to_signed_labels([0, 2])


def test_newton_leaf_value():
    assert newton_leaf_value(np.array([0.5, 0.5])) == 1.0
    assert newton_leaf_value(np.array([1.0, -1.0, 1.0, 1.0])) == pytest.approx(0.5)
    assert newton_leaf_value(np.zeros(3)) == 0.0


def test_tree_splits_toy_feature_at_midpoint():
    tree = fit_tree(np.array([[1.0], [2.0], [3.0], [4.0]]), np.array([1.0, 1.0, -1.0, -1.0]), 3, 1)
    root = tree.nodes[0]
    assert root.feature_index == 0
    assert root.threshold == 2.5
    np.testing.assert_allclose(tree.predict(np.array([[1.5], [3.5]])), [1.0, -1.0])


def test_equal_residuals_make_a_single_leaf():
    tree = fit_tree(np.arange(12.0).reshape(-1, 1), np.full(12, 0.3), 3, 1)
    assert tree.n_leaves == 1
    assert tree.nodes[0].leaf_value == 1.0


def test_depth_zero_is_a_single_leaf():
    X, labels = noisy_problem(50)
    tree = fit_tree(X, to_signed_labels(labels), max_depth=0, min_samples_leaf=1)
    assert tree.depth == 0
    assert tree.n_leaves == 1


def test_tree_respects_depth_and_leaf_size():
    X, labels = noisy_problem(200)
    r = to_signed_labels(labels)
    tree = fit_tree(X, r, max_depth=3, min_samples_leaf=5)
    assert tree.depth <= 3
    assert 1 < tree.n_leaves <= 8
    for node in tree.nodes:
        if not node.is_leaf:
            assert node.left > 0 and node.right > node.left


def test_too_few_samples_yield_a_leaf():
    tree = fit_tree(np.array([[1.0], [2.0], [3.0]]), np.array([1.0, -1.0, 1.0]), 3, 5)
    assert tree.n_leaves == 1


def test_tie_breaks_on_lowest_feature():
    column = np.array([1.0, 2.0, 3.0, 4.0])
    X = np.column_stack([column, column])
    tree = fit_tree(X, np.array([1.0, 1.0, -1.0, -1.0]), 1, 1)
    assert tree.nodes[0].feature_index == 0


def test_tree_document_checks_feature_index():
    payload = RegressionTree(
        nodes=(TreeNode(feature_index=0, threshold=0.5, left=1, right=2), TreeNode(leaf_value=-1.0), TreeNode(leaf_value=1.0)),
        n_features=1,
    ).to_dict()
    payload["nodes"][0]["feature_index"] = 3
    with pytest.raises(DataFormatError):
        RegressionTree.from_dict(payload)


def test_separable_toy_set_is_learned_quickly():
    X, labels = separable_toy()
    config = GbcConfig(n_estimators=10, learning_rate=0.5, min_samples_leaf=5)
    model = train(X, labels, config)
    n_fit = 36
    assert directional_hit_rate(predict_label(model, X[:n_fit]), labels[:n_fit]) == 1.0


def test_min_margin_grows_on_separable_data():
    X, labels = separable_toy()
    model = train(X, labels, GbcConfig(n_estimators=10, learning_rate=0.5, min_samples_leaf=5))
    y = to_signed_labels(labels)
    minima = [float(np.min(y * m)) for m in staged_margins(model, X)][1:]
    assert all(b >= a - 1e-12 for a, b in zip(minima, minima[1:]))


@pytest.mark.parametrize("seed", range(10))
def test_training_loss_never_increases(seed):
    X, labels = noisy_problem(seed=seed)
    config = GbcConfig(n_estimators=80, learning_rate=0.1, early_stop=EarlyStopConfig(patience=1000))
    model = train(X, labels, config)
    n_fit = X.shape[0] - int(math.floor(X.shape[0] * 0.1))
    y = to_signed_labels(labels[:n_fit])
    losses = [exp_loss(m, y) for m in staged_margins(model, X[:n_fit])]
    assert len(losses) == model.n_stages_used + 1
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_early_stop_with_infinite_tolerance():
    X, labels = noisy_problem()
    config = GbcConfig(n_estimators=100, early_stop=EarlyStopConfig(patience=1, tol=math.inf))
    assert train(X, labels, config).n_stages_used == 1


def test_vanishing_learning_rate_predicts_majority():
    X, labels = noisy_problem()
    model = train(X, labels, GbcConfig(n_estimators=5, learning_rate=1e-12))
    n_fit = X.shape[0] - 30
    majority = int(labels[:n_fit].mean() > 0.5)
    np.testing.assert_array_equal(predict_label(model, X), majority)


def test_training_is_deterministic():
    X, labels = noisy_problem()
    config = GbcConfig(n_estimators=30, learning_rate=0.1)
    a = json.dumps(model_to_dict(train(X, labels, config), config), sort_keys=True)
    b = json.dumps(model_to_dict(train(X, labels, config), config), sort_keys=True)
    assert a == b


def test_empty_holdout_is_a_config_error():
    X, labels = separable_toy(8)
    with pytest.raises(ConfigError):
        train(X, labels, GbcConfig(early_stop=EarlyStopConfig(validation_fraction=0.1)))


def test_single_class_training_portion():
    X = np.arange(20.0).reshape(-1, 1)
    labels = np.ones(20, dtype=int)
    with pytest.raises(DegenerateClassError):
        train(X, labels, GbcConfig(n_estimators=3))


def test_constant_model_predictions():
    model = GbcModel(initial_score=0.2, trees=(), learning_rate=0.01, n_stages_used=0, n_features=2)
    X = np.zeros((3, 2))
    np.testing.assert_array_equal(predict_label(model, X), [1, 1, 1])
    zero = GbcModel(initial_score=0.0, trees=(), learning_rate=0.01, n_stages_used=0, n_features=2)
    np.testing.assert_array_equal(predict_label(zero, X), [0, 0, 0])
    np.testing.assert_allclose(predict_proba(zero, X), 0.5)
    with pytest.raises(DimensionError):
        predict_margin(model, np.zeros((3, 3)))


def test_model_document_round_trip_predicts_identically():
    X, labels = noisy_problem()
    config = GbcConfig(n_estimators=20, learning_rate=0.1)
    model = train(X, labels, config)
    back = model_from_dict(json.loads(json.dumps(model_to_dict(model, config))))
    np.testing.assert_array_equal(predict_margin(back, X), predict_margin(model, X))
    assert GbcConfig.from_dict(model_to_dict(model, config)["config"]) == config


def test_prediction_rows():
    model = GbcModel(initial_score=0.0, trees=(), learning_rate=0.01, n_stages_used=0, n_features=1)
    header, rows = prediction_csv_rows(model, np.zeros((2, 1)), np.array([50, 51]))
    assert header == ["idx", "margin", "prob", "label"]
    assert rows[0] == [50, "0", "0.5", 0]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__]))
