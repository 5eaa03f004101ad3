#!/usr/bin/env python3
"""
Regression Tree Module
Depth-limited least-squares trees fitted to boosting pseudo-residuals,
with exponential-loss Newton values in the leaves
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from utils.errors import DataFormatError, DimensionError

logger = logging.getLogger(__name__)

# A node with feature_index == LEAF holds a leaf_value and no children
LEAF = -1
GAIN_RTOL = 1e-12


@dataclass(frozen=True)
class TreeNode:
    feature_index: int = LEAF
    threshold: float = 0.0
    left: int = -1
    right: int = -1
    leaf_value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.feature_index == LEAF

    def to_dict(self) -> Dict:
        if self.is_leaf:
            return {"leaf_value": self.leaf_value}
        return {
            "feature_index": self.feature_index,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
        }

    @classmethod
    def from_dict(cls, payload: Dict) -> "TreeNode":
        if "leaf_value" in payload:
            return cls(leaf_value=float(payload["leaf_value"]))
        return cls(
            feature_index=int(payload["feature_index"]),
            threshold=float(payload["threshold"]),
            left=int(payload["left"]),
            right=int(payload["right"]),
        )


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """Binary tree in pre-order; node 0 is the root. Samples with x <= threshold go left."""

    nodes: tuple
    n_features: int

    @property
    def n_leaves(self) -> int:
        return sum(1 for node in self.nodes if node.is_leaf)

    @property
    def depth(self) -> int:
        def walk(index: int) -> int:
            node = self.nodes[index]
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(0)

    def predict(self, features: np.ndarray) -> np.ndarray:
        X = np.asarray(features, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionError(f"tree expects {self.n_features} feature(s), got shape {X.shape}")
        feature = np.array([n.feature_index for n in self.nodes])
        threshold = np.array([n.threshold for n in self.nodes])
        left = np.array([n.left for n in self.nodes])
        right = np.array([n.right for n in self.nodes])
        value = np.array([n.leaf_value for n in self.nodes])

        at = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = feature[at] != LEAF
        while np.any(active):
            idx = rows[active]
            node = at[idx]
            goes_left = X[idx, feature[node]] <= threshold[node]
            at[idx] = np.where(goes_left, left[node], right[node])
            active = feature[at] != LEAF
        return value[at]

    def to_dict(self) -> Dict:
        return {"n_features": self.n_features, "nodes": [n.to_dict() for n in self.nodes]}

    @classmethod
    def from_dict(cls, payload: Dict) -> "RegressionTree":
        nodes = tuple(TreeNode.from_dict(entry) for entry in payload["nodes"])
        tree = cls(nodes=nodes, n_features=int(payload["n_features"]))
        for node in nodes:
            if not node.is_leaf and not (0 <= node.feature_index < tree.n_features):
                raise DataFormatError(f"tree node uses feature {node.feature_index} of {tree.n_features}")
        return tree


def newton_leaf_value(residuals: np.ndarray) -> float:
    """sum(r) / sum(|r|) for r = y * exp(-y f); lies in [-1, 1]"""
    weight = float(np.sum(np.abs(residuals)))
    if weight == 0.0:
        return 0.0
    return float(np.sum(residuals)) / weight


def presort(features: np.ndarray) -> np.ndarray:
    """Per-column stable sort order, reusable across every tree fitted on the same rows"""
    return np.argsort(features, axis=0, kind="stable")


def _best_split(
    X: np.ndarray,
    r: np.ndarray,
    order: np.ndarray,
    members: np.ndarray,
    min_samples_leaf: int,
):
    n_node = int(members.sum())
    if n_node < 2 * min_samples_leaf or n_node < 2:
        return None
    # (features, n_node) sample indices of this node, sorted by each feature
    node_order = order.T[members[order].T].reshape(X.shape[1], n_node)
    xs = np.take_along_axis(X.T, node_order, axis=1)
    rs = r[node_order]

    total = float(rs[0].sum())
    left_sum = np.cumsum(rs, axis=1)[:, :-1]
    n_left = np.arange(1, n_node, dtype=np.float64)
    n_right = n_node - n_left
    gain = left_sum ** 2 / n_left + (total - left_sum) ** 2 / n_right - total ** 2 / n_node

    valid = xs[:, :-1] != xs[:, 1:]
    valid &= (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    if not np.any(valid):
        return None
    gain = np.where(valid, gain, -np.inf)
    # C-order argmax: lowest feature index first, then lowest threshold
    flat = int(np.argmax(gain))
    j, k = divmod(flat, n_node - 1)
    best_gain = float(gain[j, k])
    if best_gain <= GAIN_RTOL * max(1.0, float(np.dot(r[members], r[members]))):
        return None
    lo, hi = float(xs[j, k]), float(xs[j, k + 1])
    threshold = 0.5 * (lo + hi)
    if not lo <= threshold < hi:
        threshold = lo
    return j, threshold, best_gain


def fit_tree(
    features: np.ndarray,
    residuals: np.ndarray,
    max_depth: int = 3,
    min_samples_leaf: int = 5,
    order: Optional[np.ndarray] = None,
) -> RegressionTree:
    """Greedy variance-reduction splits on the residuals, depth <= max_depth.

    Too few samples to split yields a single-leaf tree.
    """
    X = np.asarray(features, dtype=np.float64)
    r = np.asarray(residuals, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] != r.size:
        raise DimensionError(f"features {X.shape} do not match {r.size} residuals")
    if r.size == 0:
        raise DimensionError("cannot fit a tree to zero samples")
    if order is None:
        order = presort(X)

    nodes: List[Optional[TreeNode]] = []

    def grow(members: np.ndarray, depth: int) -> int:
        index = len(nodes)
        nodes.append(None)
        split = None
        if depth < max_depth:
            split = _best_split(X, r, order, members, min_samples_leaf)
        if split is None:
            nodes[index] = TreeNode(leaf_value=newton_leaf_value(r[members]))
            return index
        feature, threshold, _ = split
        goes_left = X[:, feature] <= threshold
        left = grow(members & goes_left, depth + 1)
        right = grow(members & ~goes_left, depth + 1)
        nodes[index] = TreeNode(feature_index=feature, threshold=threshold, left=left, right=right)
        return index

    grow(np.ones(r.size, dtype=bool), 0)
    return RegressionTree(nodes=tuple(nodes), n_features=X.shape[1])
