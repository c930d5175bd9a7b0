"""Feature-importance ranking methods that pick the attack's targets.

Five methods are supported: info_gain_ratio, gini_impurity, permutation,
rfe and ffs.  All produce a full permutation of feature indices, best
first.  Ties always break toward the lower feature index.  Split-based
scores (gini, information gain) search thresholds at midpoints between
consecutive distinct sorted values; one-hot columns reduce to the single
membership split.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import models as models_mod
from .data import Dataset, fit_scaler, split, transform
from .errors import RankingError
from .metrics import recall
from .models import Model, predict

RANKING_METHODS = ("info_gain_ratio", "gini_impurity", "permutation", "rfe", "ffs")


@dataclass(frozen=True)
class FeatureRanking:
    """Ranked feature indices (best first) with per-feature scores."""

    order: tuple[int, ...]
    scores: tuple[float, ...]
    method: str

    def __post_init__(self) -> None:
        n = len(self.scores)
        if sorted(self.order) != list(range(n)):
            raise RankingError("ranking order must be a permutation of all feature indices")
        along = [self.scores[i] for i in self.order]
        if any(along[k] < along[k + 1] - 1e-12 for k in range(n - 1)):
            raise RankingError("scores must be non-increasing along the ranking order")

    @property
    def n_features(self) -> int:
        return len(self.scores)


def _order_by_score(scores: np.ndarray) -> tuple[int, ...]:
    return tuple(sorted(range(scores.size), key=lambda j: (-scores[j], j)))


def _class_arrays(train: Dataset) -> tuple[np.ndarray, np.ndarray]:
    y = train.y
    if np.unique(y).size < 2:
        raise RankingError("ranking needs both classes present")
    return train.X, y


def _gini(y: np.ndarray) -> float:
    if y.size == 0:
        return 0.0
    p = np.bincount(y, minlength=2) / y.size
    return float(1.0 - np.sum(p * p))


def _entropy(y: np.ndarray) -> float:
    if y.size == 0:
        return 0.0
    p = np.bincount(y, minlength=2) / y.size
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def _split_counts(col: np.ndarray, y: np.ndarray):
    """Left/right (ones, totals) at every distinct-value boundary, or None."""
    order = np.argsort(col, kind="stable")
    values = col[order]
    labels = y[order]
    boundaries = np.flatnonzero(values[:-1] < values[1:])
    if boundaries.size == 0:
        return None
    ones = np.cumsum(labels)
    left_n = boundaries + 1.0
    right_n = y.size - left_n
    left_ones = ones[boundaries].astype(float)
    right_ones = ones[-1] - left_ones
    return left_ones, left_n, right_ones, right_n


def _gini_vec(ones: np.ndarray, totals: np.ndarray) -> np.ndarray:
    p = ones / totals
    return 1.0 - p * p - (1.0 - p) ** 2


def _entropy_vec(ones: np.ndarray, totals: np.ndarray) -> np.ndarray:
    p = ones / totals
    q = 1.0 - p
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] -= p[nz] * np.log2(p[nz])
    nz = q > 0
    out[nz] -= q[nz] * np.log2(q[nz])
    return out


def gini_gain(train: Dataset, feature_index: int) -> float:
    """Parent Gini impurity minus the best split's weighted child impurity."""
    X, y = _class_arrays(train)
    counts = _split_counts(X[:, feature_index], y)
    if counts is None:
        return 0.0
    left_ones, left_n, right_ones, right_n = counts
    n = y.size
    weighted = (left_n * _gini_vec(left_ones, left_n) + right_n * _gini_vec(right_ones, right_n)) / n
    return max(_gini(y) - float(weighted.min()), 0.0)


def info_gain(train: Dataset, feature_index: int) -> float:
    """Raw information gain (bits) of the best binary split."""
    X, y = _class_arrays(train)
    counts = _split_counts(X[:, feature_index], y)
    if counts is None:
        return 0.0
    left_ones, left_n, right_ones, right_n = counts
    n = y.size
    conditional = (left_n * _entropy_vec(left_ones, left_n) + right_n * _entropy_vec(right_ones, right_n)) / n
    return max(_entropy(y) - float(conditional.min()), 0.0)


def info_gain_ratio(train: Dataset, feature_index: int) -> float:
    """Information gain over split entropy at the max-gain threshold.

    The split is chosen by raw gain (first/lowest threshold on ties), then
    normalized; ranking degenerate near-empty splits by their ratio would
    let noise features score arbitrarily high.  A split entropy of 0
    (impossible for a real two-sided split) would give ratio 0.
    """
    X, y = _class_arrays(train)
    counts = _split_counts(X[:, feature_index], y)
    if counts is None:
        return 0.0
    left_ones, left_n, right_ones, right_n = counts
    n = y.size
    gains = _entropy(y) - (
        left_n * _entropy_vec(left_ones, left_n) + right_n * _entropy_vec(right_ones, right_n)
    ) / n
    best = int(np.argmax(gains))
    split_entropy = float(_entropy_vec(np.array([left_n[best]]), np.array([float(n)]))[0])
    if split_entropy <= 0.0:
        return 0.0
    return max(float(gains[best]) / split_entropy, 0.0)


def permutation_importance(
    train: Dataset,
    holdout: Dataset,
    probe_model: Model,
    repeats: int = 5,
    seed: int = 0,
) -> np.ndarray:
    """Per-feature mean drop in holdout recall over independent shuffles."""
    if not isinstance(probe_model, Model):
        raise RankingError("permutation importance needs a fitted probe model")
    if repeats < 1:
        raise RankingError("repeats must be positive")
    rng = np.random.default_rng(seed)
    base = recall(probe_model, holdout.X, holdout.y)
    n = holdout.n_rows
    scores = np.zeros(holdout.n_features)
    for j in range(holdout.n_features):
        drops = 0.0
        for _ in range(repeats):
            perm = rng.permutation(n)
            shuffled = holdout.X.copy()
            shuffled[:, j] = shuffled[perm, j]
            drops += base - recall(probe_model, shuffled, holdout.y)
        scores[j] = drops / repeats
    return scores


_RFE_ESTIMATORS = ("decision_tree", "random_forest", "logistic_regression")


def _estimator_importances(kind: str, Xs: np.ndarray, y: np.ndarray, seed: int) -> np.ndarray:
    if kind not in _RFE_ESTIMATORS:
        raise RankingError(f"unsupported RFE estimator {kind!r}; choose from {_RFE_ESTIMATORS}")
    cls, defaults = models_mod._IMPLS[kind]
    impl = cls(**defaults).fit(Xs, y, rng=np.random.default_rng(seed))
    if kind == "logistic_regression":
        return np.abs(impl.weights)
    return np.asarray(impl.importances, dtype=float)


def rfe_rank(train: Dataset, estimator_kind: str = "decision_tree", seed: int = 0) -> FeatureRanking:
    """Recursive elimination: repeatedly drop the least important feature.

    The last survivor ranks first.  Among equally unimportant features the
    highest index is eliminated first, so the lower index wins the rank.
    Scores are ordinal (feature_count - position).
    """
    X, y = _class_arrays(train)
    n_features = X.shape[1]
    if n_features < 2:
        raise RankingError("RFE needs at least 2 features")
    scaler = fit_scaler(train)
    Xs = transform(X, scaler)
    remaining = list(range(n_features))
    eliminated: list[int] = []
    while len(remaining) > 1:
        imps = _estimator_importances(estimator_kind, Xs[:, remaining], y, seed)
        worst = max(range(len(remaining)), key=lambda k: (-imps[k], remaining[k]))
        eliminated.append(remaining.pop(worst))
    order = tuple(remaining + eliminated[::-1])
    scores = np.zeros(n_features)
    for pos, j in enumerate(order):
        scores[j] = float(n_features - pos)
    return FeatureRanking(order=order, scores=tuple(scores), method="rfe")


def ffs_rank(
    train: Dataset,
    holdout: Dataset | None = None,
    estimator_kind: str = "logistic_regression",
    seed: int = 0,
) -> FeatureRanking:
    """Greedy forward selection by holdout recall.

    Starts from the empty model (recall 0); stops once the best candidate no
    longer improves recall, then appends the remaining features ordered by
    their last evaluated recall.  Scores are ordinal.
    """
    X, y = _class_arrays(train)
    n_features = X.shape[1]
    if n_features < 2:
        raise RankingError("forward selection needs at least 2 features")
    if holdout is None:
        train, holdout = split(train, 0.75, seed)
        X, y = _class_arrays(train)
    if int((holdout.y == 1).sum()) == 0:
        raise RankingError("holdout has no positive rows; recall is undefined")
    scaler = fit_scaler(train)
    Xs = transform(X, scaler)
    Hs = transform(holdout.X, scaler)
    positives = int((holdout.y == 1).sum())

    def holdout_recall(cols: list[int]) -> float:
        rng = np.random.default_rng(seed)
        cls, defaults = models_mod._IMPLS[estimator_kind]
        impl = cls(**defaults).fit(Xs[:, cols], y, rng=rng)
        preds = impl.predict_scores(Hs[:, cols]) >= 0.5
        return float((preds & (holdout.y == 1)).sum() / positives)

    selected: list[int] = []
    current = 0.0
    last_eval = np.zeros(n_features)
    while len(selected) < n_features:
        candidates = [j for j in range(n_features) if j not in selected]
        best_j, best_r = -1, -np.inf
        for j in candidates:
            r = holdout_recall(selected + [j])
            last_eval[j] = r
            if r > best_r:
                best_j, best_r = j, r
        if best_r - current <= 0.0:
            break
        selected.append(best_j)
        current = best_r
    rest = [j for j in range(n_features) if j not in selected]
    rest.sort(key=lambda j: (-last_eval[j], j))
    order = tuple(selected + rest)
    scores = np.zeros(n_features)
    for pos, j in enumerate(order):
        scores[j] = float(n_features - pos)
    return FeatureRanking(order=order, scores=tuple(scores), method="ffs")


def rank_features(
    train: Dataset,
    method: str,
    seed: int = 0,
    holdout: Dataset | None = None,
    repeats: int = 5,
) -> FeatureRanking:
    """Rank all features with the named method, deterministically per seed.

    permutation and ffs need holdout data; when none is supplied a 75/25
    stratified split of ``train`` is carved internally.
    """
    if method not in RANKING_METHODS:
        raise RankingError(f"unknown ranking method {method!r}; choose from {RANKING_METHODS}")
    _class_arrays(train)
    if train.n_features < 2:
        raise RankingError("ranking needs at least 2 features")

    if method == "gini_impurity":
        scores = np.array([gini_gain(train, j) for j in range(train.n_features)])
        return FeatureRanking(order=_order_by_score(scores), scores=tuple(scores), method=method)
    if method == "info_gain_ratio":
        scores = np.array([info_gain_ratio(train, j) for j in range(train.n_features)])
        return FeatureRanking(order=_order_by_score(scores), scores=tuple(scores), method=method)
    if method == "permutation":
        if holdout is None:
            fit_part, holdout = split(train, 0.75, seed)
        else:
            fit_part = train
        probe = models_mod.fit("random_forest", fit_part, seed=seed)
        scores = permutation_importance(fit_part, holdout, probe, repeats=repeats, seed=seed)
        return FeatureRanking(order=_order_by_score(scores), scores=tuple(scores), method=method)
    if method == "rfe":
        return rfe_rank(train, seed=seed)
    return ffs_rank(train, holdout=holdout, seed=seed)
