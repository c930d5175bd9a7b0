"""Gradient-boosted shallow regression trees with logistic loss.

Each round fits a squared-error regression tree to the residual y - p and
replaces leaf values with a Newton step sum(residual) / sum(p(1-p)), the
classic binomial-deviance update.  Scores are the sigmoid of the raw sum.
"""
from __future__ import annotations

import numpy as np

from .logistic import sigmoid

DEFAULTS = {"n_trees": 100, "max_depth": 3, "learning_rate": 0.1, "min_leaf": 1}


def best_mse_split(col: np.ndarray, target: np.ndarray, min_leaf: int):
    """Best threshold minimizing weighted child variance; None if no split."""
    n = col.size
    order = np.argsort(col, kind="stable")
    values = col[order]
    t = target[order]
    distinct = values[:-1] < values[1:]
    pos = np.flatnonzero(distinct)
    pos = pos[(pos + 1 >= min_leaf) & (n - pos - 1 >= min_leaf)]
    if pos.size == 0:
        return None
    csum = np.cumsum(t)
    csum2 = np.cumsum(t * t)
    left_n = pos + 1.0
    right_n = n - left_n
    left_sum = csum[pos]
    right_sum = csum[-1] - left_sum
    left_sq = csum2[pos]
    right_sq = csum2[-1] - left_sq
    # sum of squared deviations per side, no division needed for comparison weights
    left_sse = left_sq - left_sum * left_sum / left_n
    right_sse = right_sq - right_sum * right_sum / right_n
    total = left_sse + right_sse
    best = int(np.argmin(total))
    threshold = 0.5 * (values[pos[best]] + values[pos[best] + 1])
    return float(total[best]), float(threshold)


class _RegressionNode:
    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self):
        self.feature: int | None = None
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.value = 0.0


class _RegressionTree:
    def __init__(self, max_depth: int, min_leaf: int):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.root: _RegressionNode | None = None

    def fit(self, X, residual, hessian):
        self.root = self._grow(X, residual, hessian, np.arange(X.shape[0]), 0)
        return self

    def _newton_value(self, residual, hessian, rows) -> float:
        h = hessian[rows].sum()
        if h <= 1e-12:
            return 0.0
        return float(residual[rows].sum() / h)

    def _grow(self, X, residual, hessian, rows, depth) -> _RegressionNode:
        node = _RegressionNode()
        node.value = self._newton_value(residual, hessian, rows)
        if depth >= self.max_depth or rows.size < 2 * self.min_leaf:
            return node
        target = residual[rows]
        if np.allclose(target, target[0]):
            return node
        best_cost = np.inf
        best_feature = -1
        best_threshold = 0.0
        for j in range(X.shape[1]):
            found = best_mse_split(X[rows, j], target, self.min_leaf)
            if found is None:
                continue
            cost, threshold = found
            if cost < best_cost - 1e-15:
                best_cost, best_feature, best_threshold = cost, j, threshold
        if best_feature < 0:
            return node
        node.feature = best_feature
        node.threshold = best_threshold
        mask = X[rows, best_feature] < best_threshold
        node.left = self._grow(X, residual, hessian, rows[mask], depth + 1)
        node.right = self._grow(X, residual, hessian, rows[~mask], depth + 1)
        return node

    def predict(self, X) -> np.ndarray:
        out = np.empty(X.shape[0])
        self._route(self.root, X, np.arange(X.shape[0]), out)
        return out

    def _route(self, node, X, rows, out):
        if rows.size == 0:
            return
        if node.feature is None:
            out[rows] = node.value
            return
        mask = X[rows, node.feature] < node.threshold
        self._route(node.left, X, rows[mask], out)
        self._route(node.right, X, rows[~mask], out)

    def to_dict(self) -> dict:
        def pack(node):
            if node.feature is None:
                return {"value": node.value}
            return {
                "feature": node.feature,
                "threshold": node.threshold,
                "value": node.value,
                "left": pack(node.left),
                "right": pack(node.right),
            }

        return {"max_depth": self.max_depth, "min_leaf": self.min_leaf, "root": pack(self.root)}

    @classmethod
    def from_dict(cls, payload: dict) -> "_RegressionTree":
        tree = cls(payload["max_depth"], payload["min_leaf"])

        def unpack(entry):
            node = _RegressionNode()
            node.value = entry["value"]
            if "feature" in entry:
                node.feature = entry["feature"]
                node.threshold = entry["threshold"]
                node.left = unpack(entry["left"])
                node.right = unpack(entry["right"])
            return node

        tree.root = unpack(payload["root"])
        return tree


class GradientBoostedTrees:
    def __init__(self, n_trees=100, max_depth=3, learning_rate=0.1, min_leaf=1):
        self.n_trees = int(n_trees)
        self.max_depth = int(max_depth)
        self.learning_rate = float(learning_rate)
        self.min_leaf = int(min_leaf)
        self.base_score = 0.0  # log-odds of the positive rate
        self.trees: list[_RegressionTree] = []

    def fit(self, X: np.ndarray, y: np.ndarray, rng=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        rate = min(max(y.mean(), 1e-6), 1 - 1e-6)
        self.base_score = float(np.log(rate / (1.0 - rate)))
        raw = np.full(y.size, self.base_score)
        self.trees = []
        for _ in range(self.n_trees):
            p = sigmoid(raw)
            residual = y - p
            hessian = p * (1.0 - p)
            tree = _RegressionTree(self.max_depth, self.min_leaf).fit(X, residual, hessian)
            raw += self.learning_rate * tree.predict(X)
            self.trees.append(tree)
        return self

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        raw = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            raw += self.learning_rate * tree.predict(X)
        return sigmoid(raw)

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "min_leaf": self.min_leaf,
            "base_score": self.base_score,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "GradientBoostedTrees":
        model = cls(payload["n_trees"], payload["max_depth"], payload["learning_rate"], payload["min_leaf"])
        model.base_score = float(payload["base_score"])
        model.trees = [_RegressionTree.from_dict(t) for t in payload["trees"]]
        return model
