"""Mimicry perturbation of the top-ranked features toward the target class.

The attack is one-shot and gradient-free.  Given a ranked feature list, a
per-feature direction (sign of target-class mean minus input-class mean)
and a budget epsilon, each of the n selected features moves by
(epsilon / n) * sum(scaled features) in its direction, clamped to the
scaled [0, 1] training range.  Discrete features round toward the original
value afterwards so the realized movement never exceeds the budget.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, FeatureSchema, ScalerState, fit_scaler, transform
from .errors import SelectionError, ShapeError
from .ranking import RANKING_METHODS, FeatureRanking, rank_features


@dataclass(frozen=True)
class DirectionVector:
    """Per-feature movement sign in {-1, 0, +1}.

    0 means the class means coincide or the schema rules the feature out
    (immutable features are pinned to 0 at construction).
    """

    signs: np.ndarray

    def __post_init__(self) -> None:
        signs = np.asarray(self.signs, dtype=np.int8)
        object.__setattr__(self, "signs", signs)
        if signs.ndim != 1 or not np.isin(signs, (-1, 0, 1)).all():
            raise ValueError("direction signs must be a 1-D vector over {-1, 0, +1}")
        signs.setflags(write=False)

    @property
    def n_features(self) -> int:
        return int(self.signs.size)


@dataclass(frozen=True)
class AttackConfig:
    """Attack strength knobs: how many features (n) and how hard (epsilon)."""

    n: int
    epsilon: float
    method: str = "gini_impurity"
    feature_mask: frozenset[int] | None = None
    onehot_consistency: bool = False

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.method not in RANKING_METHODS:
            raise ValueError(f"unknown ranking method {self.method!r}")
        if self.feature_mask is not None:
            object.__setattr__(self, "feature_mask", frozenset(int(i) for i in self.feature_mask))


@dataclass(frozen=True)
class AttackPlan:
    """Everything a perturbation needs: ranking, direction, budget, scaler."""

    schema: FeatureSchema
    ranking: FeatureRanking
    direction: DirectionVector
    config: AttackConfig
    scaler: ScalerState

    def __post_init__(self) -> None:
        counts = {self.schema.n_features, self.ranking.n_features, self.direction.n_features, self.scaler.n_features}
        if len(counts) != 1:
            raise ShapeError(f"plan components disagree on feature count: {sorted(counts)}")


def compute_direction(train: Dataset) -> DirectionVector:
    """Sign of (target-class mean - input-class mean) per feature.

    Positive means the input class must grow the feature to mimic the
    target class.  Immutable features get sign 0 so they can never be
    selected.
    """
    input_rows = train.rows_of_class(1)
    target_rows = train.rows_of_class(0)
    if input_rows.size == 0 or target_rows.size == 0:
        raise ValueError("direction needs both classes present in the training data")
    diff = train.X[target_rows].mean(axis=0) - train.X[input_rows].mean(axis=0)
    signs = np.sign(diff).astype(np.int8)
    signs[~train.schema.mutable_mask()] = 0
    return DirectionVector(signs=signs)


def select_features(plan: AttackPlan) -> list[int]:
    """Top-n eligible entries of the ranking.

    Features drop out when their direction is 0, the schema marks them
    immutable, their training range is constant, or the config mask
    excludes them.
    """
    config = plan.config
    mutable = plan.schema.mutable_mask()
    constant = plan.scaler.constant_mask()
    signs = plan.direction.signs
    eligible = [
        i
        for i in plan.ranking.order
        if signs[i] != 0
        and mutable[i]
        and not constant[i]
        and (config.feature_mask is None or i in config.feature_mask)
    ]
    if len(eligible) < config.n:
        raise SelectionError(
            f"attack wants n={config.n} features but only {len(eligible)} are eligible"
        )
    return eligible[: config.n]


def build_plan(train: Dataset, config: AttackConfig, seed: int = 0) -> AttackPlan:
    """Rank, orient and fit the scaler on the training data in one step."""
    return AttackPlan(
        schema=train.schema,
        ranking=rank_features(train, config.method, seed=seed),
        direction=compute_direction(train),
        config=config,
        scaler=fit_scaler(train),
    )


def _group_consistency(x_out: np.ndarray, plan: AttackPlan, touched: set[int]) -> None:
    """Force exactly one hot per group that the perturbation touched.

    Relaxes the untouched-feature guarantee for members of touched groups;
    only active when the config asks for it.
    """
    scaled = transform(x_out, plan.scaler)
    for group, members in plan.schema.onehot_groups().items():
        if not touched.intersection(members):
            continue
        winner = max(members, key=lambda i: (scaled[i], -i))
        for i in members:
            x_out[i] = plan.scaler.maxs[i] if i == winner else plan.scaler.mins[i]


def perturb(x: np.ndarray, plan: AttackPlan) -> np.ndarray:
    """Perturb one raw sample vector; unselected features stay bit-identical."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != plan.schema.n_features:
        raise ShapeError(f"sample must be a vector of {plan.schema.n_features} features")
    selected = select_features(plan)
    config = plan.config
    scaled = transform(x, plan.scaler)
    delta = (config.epsilon / config.n) * float(scaled.sum())
    if delta <= 0.0:
        # zero budget (or a pathological negative scaled sum) moves nothing
        return x.copy()
    discrete = plan.schema.discrete_mask()
    signs = plan.direction.signs
    out = x.copy()
    for i in selected:
        moved = min(max(scaled[i] + delta * signs[i], 0.0), 1.0)
        if moved == scaled[i]:
            continue  # clamp landed back on the original: keep the raw value
        raw = float(inverse_transform_scalar(moved, plan.scaler, i))
        if discrete[i]:
            raw = float(np.floor(raw)) if signs[i] > 0 else float(np.ceil(raw))
        out[i] = raw
    if config.onehot_consistency:
        _group_consistency(out, plan, set(selected))
    return out


def inverse_transform_scalar(value: float, scaler: ScalerState, index: int) -> float:
    span = scaler.maxs[index] - scaler.mins[index]
    if span == 0.0:
        return float(scaler.mins[index])
    return float(value * span + scaler.mins[index])


def perturb_batch(samples: Dataset, plan: AttackPlan) -> np.ndarray:
    """Row-wise perturbation of an input-class-only dataset.

    Vectorized but exactly equivalent to mapping :func:`perturb` over rows;
    already-misclassified rows are perturbed like any other.
    """
    if samples.n_rows and not np.all(samples.y == 1):
        raise ValueError("perturb_batch expects input-class rows only")
    if samples.n_features != plan.schema.n_features:
        raise ShapeError("sample columns do not match the plan's schema")
    selected = select_features(plan)
    config = plan.config
    X = samples.X
    scaled = transform(X, plan.scaler)
    deltas = (config.epsilon / config.n) * scaled.sum(axis=1)
    deltas = np.maximum(deltas, 0.0)
    discrete = plan.schema.discrete_mask()
    signs = plan.direction.signs
    out = X.copy()
    for i in selected:
        column = scaled[:, i]
        moved = np.clip(column + deltas * signs[i], 0.0, 1.0)
        span = plan.scaler.maxs[i] - plan.scaler.mins[i]
        raw = moved * span + plan.scaler.mins[i]
        if discrete[i]:
            raw = np.floor(raw) if signs[i] > 0 else np.ceil(raw)
        # rows with a zero budget stay untouched even when the clamp would
        # pull an out-of-range value back in (mirrors the scalar early-out)
        changed = (moved != column) & (deltas > 0.0)
        out[:, i] = np.where(changed, raw, X[:, i])
    if config.onehot_consistency:
        touched = set(selected)
        for k in range(out.shape[0]):
            _group_consistency(out[k], plan, touched)
    return out
