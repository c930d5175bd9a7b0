"""CART-style binary classification tree (Gini criterion).

Splits are searched over midpoints between consecutive distinct sorted
values; ties break toward the lower feature index and lower threshold so
training is fully deterministic.  The fitted tree also exposes
impurity-decrease feature importances, which recursive feature elimination
uses as its default estimator signal.
"""
from __future__ import annotations

import numpy as np

DEFAULTS = {"max_depth": 12, "min_leaf": 2, "max_features": None}


def _gini(counts: np.ndarray, total: float) -> float:
    if total <= 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def best_gini_split(col: np.ndarray, y: np.ndarray, min_leaf: int):
    """Best threshold for one feature: (weighted child impurity, threshold).

    Returns None when no split keeps ``min_leaf`` rows on both sides.
    Vectorized over all candidate midpoints via cumulative label counts.
    """
    n = col.size
    order = np.argsort(col, kind="stable")
    values = col[order]
    labels = y[order]
    # candidate boundary after position i (left = first i+1 rows)
    distinct = values[:-1] < values[1:]
    pos = np.flatnonzero(distinct)
    pos = pos[(pos + 1 >= min_leaf) & (n - pos - 1 >= min_leaf)]
    if pos.size == 0:
        return None
    ones = np.cumsum(labels)
    left_n = pos + 1.0
    right_n = n - left_n
    left_ones = ones[pos].astype(float)
    right_ones = ones[-1] - left_ones
    left_gini = 1.0 - ((left_ones / left_n) ** 2 + ((left_n - left_ones) / left_n) ** 2)
    right_gini = 1.0 - ((right_ones / right_n) ** 2 + ((right_n - right_ones) / right_n) ** 2)
    weighted = (left_n * left_gini + right_n * right_gini) / n
    best = int(np.argmin(weighted))  # first occurrence -> lowest threshold
    threshold = 0.5 * (values[pos[best]] + values[pos[best] + 1])
    return float(weighted[best]), float(threshold)


class TreeNode:
    __slots__ = ("feature", "threshold", "left", "right", "value", "n_samples")

    def __init__(self, value: float, n_samples: int):
        self.feature: int | None = None
        self.threshold = 0.0
        self.left: TreeNode | None = None
        self.right: TreeNode | None = None
        self.value = value  # positive-class fraction at this node
        self.n_samples = n_samples

    @property
    def is_leaf(self) -> bool:
        return self.left is None


class DecisionTree:
    def __init__(self, max_depth=12, min_leaf=2, max_features=None):
        self.max_depth = int(max_depth)
        self.min_leaf = int(min_leaf)
        self.max_features = max_features
        self.root: TreeNode | None = None
        self.n_features = 0
        self.importances: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray, rng: np.random.Generator | None = None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        self.n_features = X.shape[1]
        self._imp = np.zeros(self.n_features)
        self.root = self._grow(X, y, np.arange(X.shape[0]), depth=0, rng=rng)
        total = self._imp.sum()
        self.importances = self._imp / total if total > 0 else self._imp
        del self._imp
        return self

    def _candidate_features(self, rng: np.random.Generator | None) -> np.ndarray:
        if self.max_features is None or rng is None:
            return np.arange(self.n_features)
        if self.max_features == "sqrt":
            k = max(1, int(np.sqrt(self.n_features)))
        else:
            k = max(1, min(int(self.max_features), self.n_features))
        return np.sort(rng.choice(self.n_features, size=k, replace=False))

    def _grow(self, X, y, rows, depth, rng) -> TreeNode:
        sub_y = y[rows]
        node = TreeNode(value=float(sub_y.mean()) if rows.size else 0.0, n_samples=rows.size)
        parent_gini = _gini(np.bincount(sub_y, minlength=2).astype(float), rows.size)
        if depth >= self.max_depth or rows.size < 2 * self.min_leaf or parent_gini == 0.0:
            return node
        best_cost = np.inf
        best_feature = -1
        best_threshold = 0.0
        for j in self._candidate_features(rng):
            found = best_gini_split(X[rows, j], sub_y, self.min_leaf)
            if found is None:
                continue
            cost, threshold = found
            if cost < best_cost - 1e-15:  # strict improvement keeps the lowest index on ties
                best_cost, best_feature, best_threshold = cost, j, threshold
        if best_feature < 0:
            return node
        # zero-gain splits are allowed (XOR-style patterns need them to start)
        node.feature = int(best_feature)
        node.threshold = best_threshold
        self._imp[best_feature] += rows.size * max(parent_gini - best_cost, 0.0)
        mask = X[rows, best_feature] < best_threshold
        node.left = self._grow(X, y, rows[mask], depth + 1, rng)
        node.right = self._grow(X, y, rows[~mask], depth + 1, rng)
        return node

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.empty(X.shape[0])
        self._route(self.root, X, np.arange(X.shape[0]), out)
        return out

    def _route(self, node: TreeNode, X, rows, out) -> None:
        if rows.size == 0:
            return
        if node.is_leaf:
            out[rows] = node.value
            return
        mask = X[rows, node.feature] < node.threshold
        self._route(node.left, X, rows[mask], out)
        self._route(node.right, X, rows[~mask], out)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        def pack(node: TreeNode):
            if node.is_leaf:
                return {"value": node.value, "n": node.n_samples}
            return {
                "feature": node.feature,
                "threshold": node.threshold,
                "value": node.value,
                "n": node.n_samples,
                "left": pack(node.left),
                "right": pack(node.right),
            }

        return {
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "n_features": self.n_features,
            "importances": list(map(float, self.importances)),
            "root": pack(self.root),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DecisionTree":
        tree = cls(max_depth=payload["max_depth"], min_leaf=payload["min_leaf"])
        tree.n_features = payload["n_features"]
        tree.importances = np.asarray(payload["importances"], dtype=float)

        def unpack(entry) -> TreeNode:
            node = TreeNode(value=entry["value"], n_samples=entry["n"])
            if "feature" in entry:
                node.feature = entry["feature"]
                node.threshold = entry["threshold"]
                node.left = unpack(entry["left"])
                node.right = unpack(entry["right"])
            return node

        tree.root = unpack(payload["root"])
        return tree
