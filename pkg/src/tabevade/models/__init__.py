"""Built-in defending classifiers behind one uniform contract.

Every model consumes the same min-max-scaled representation the attack's
transformer produces: ``fit`` learns a scaler on the training rows and both
prediction entry points scale raw inputs with it, so callers always pass
raw feature values.  ``predict`` thresholds ``predict_score`` at 0.5 with
ties going positive.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Union

import numpy as np

from ..data import Dataset, ScalerState, atomic_write_text, fit_scaler, transform
from ..errors import FitError, ShapeError
from . import boosting, forest, logistic, mlp, tree

MODEL_KINDS = (
    "logistic_regression",
    "decision_tree",
    "random_forest",
    "gradient_boosted_trees",
    "mlp",
)

_IMPLS = {
    "logistic_regression": (logistic.LogisticRegression, logistic.DEFAULTS),
    "decision_tree": (tree.DecisionTree, tree.DEFAULTS),
    "random_forest": (forest.RandomForest, forest.DEFAULTS),
    "gradient_boosted_trees": (boosting.GradientBoostedTrees, boosting.DEFAULTS),
    "mlp": (mlp.MLP, mlp.DEFAULTS),
}


@dataclass(frozen=True)
class Model:
    kind: str
    scaler: ScalerState
    impl: object
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def n_features(self) -> int:
        return self.scaler.n_features


def default_hyperparameters(kind: str) -> dict:
    if kind not in _IMPLS:
        raise FitError(f"unknown model kind {kind!r}; choose from {MODEL_KINDS}")
    return dict(_IMPLS[kind][1])


def fit(kind: str, train: Dataset, hyperparameters: Mapping | None = None, seed: int = 0) -> Model:
    if kind not in _IMPLS:
        raise FitError(f"unknown model kind {kind!r}; choose from {MODEL_KINDS}")
    if train.n_rows == 0:
        raise FitError("cannot fit on an empty dataset")
    if np.unique(train.y).size < 2:
        raise FitError("training data holds a single class; nothing to learn")
    cls, defaults = _IMPLS[kind]
    hp = dict(defaults)
    if hyperparameters:
        unknown = set(hyperparameters) - set(defaults)
        if unknown:
            raise FitError(f"unknown hyperparameters for {kind}: {sorted(unknown)}")
        hp.update(hyperparameters)
    scaler = fit_scaler(train)
    Xs = transform(train.X, scaler)
    rng = np.random.default_rng(seed)
    impl = cls(**hp).fit(Xs, train.y, rng=rng)
    return Model(kind=kind, scaler=scaler, impl=impl, hyperparameters=hp, seed=seed)


def _scale_input(model: Model, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ShapeError("expected a sample matrix")
    if X.shape[1] != model.n_features:
        raise ShapeError(f"matrix has {X.shape[1]} columns, model expects {model.n_features}")
    return transform(X, model.scaler)


def predict_score(model: Model, X) -> np.ndarray:
    """Positive-class scores in [0, 1]."""
    Xs = _scale_input(model, X)
    if Xs.shape[0] == 0:
        return np.zeros(0)
    return np.clip(model.impl.predict_scores(Xs), 0.0, 1.0)


def predict(model: Model, X) -> np.ndarray:
    """Hard labels: 1 where the score reaches 0.5 (ties go positive)."""
    return (predict_score(model, X) >= 0.5).astype(int)


def save_model(model: Model, path: Union[str, Path]) -> None:
    payload = {
        "kind": model.kind,
        "seed": model.seed,
        "hyperparameters": model.hyperparameters,
        "scaler": {"mins": list(map(float, model.scaler.mins)), "maxs": list(map(float, model.scaler.maxs))},
        "params": model.impl.to_dict(),
    }
    atomic_write_text(path, json.dumps(payload) + "\n")


def load_model(path: Union[str, Path]) -> Model:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    kind = payload["kind"]
    if kind not in _IMPLS:
        raise FitError(f"model file names unknown kind {kind!r}")
    cls, _ = _IMPLS[kind]
    return Model(
        kind=kind,
        scaler=ScalerState(
            mins=np.asarray(payload["scaler"]["mins"], dtype=float),
            maxs=np.asarray(payload["scaler"]["maxs"], dtype=float),
        ),
        impl=cls.from_dict(payload["params"]),
        hyperparameters=payload["hyperparameters"],
        seed=payload["seed"],
    )
