"""Attack evaluation: reports, the (n, epsilon, method) grid search and
max-success curves.

Grid cells are evaluated against models fitted once per kind; rankings and
directions are computed once per method and reused.  Records can persist
incrementally to a CSV sink so an interrupted search resumes, and a worker
pool may shard cells because every record is merged back in cell order.
"""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .attack import AttackConfig, AttackPlan, compute_direction, perturb_batch
from .data import Dataset, fit_scaler, format_number
from .errors import MetricError
from .metrics import auprc, recall, success_rate
from .models import MODEL_KINDS, Model, fit, predict, predict_score
from .ranking import RANKING_METHODS, rank_features


@dataclass(frozen=True)
class EvaluationReport:
    baseline_recall: float
    attack_recall: float
    success_rate: float
    auprc_baseline: float
    auprc_attack: float
    config: AttackConfig
    model_kind: str


def evaluate_attack(model: Model, test: Dataset, plan: AttackPlan) -> EvaluationReport:
    """Perturb the input-class test rows and measure the damage.

    Target-class rows pass through untouched; already-misclassified input
    rows are perturbed like the rest.
    """
    baseline_scores = predict_score(model, test.X)
    base_recall = recall(model, test.X, test.y)
    base_auprc = auprc(baseline_scores, test.y)
    pos = test.rows_of_class(1)
    attacked = test.X.copy()
    attacked[pos] = perturb_batch(test.take(pos), plan)
    attack_scores = predict_score(model, attacked)
    att_recall = recall(model, attacked, test.y)
    return EvaluationReport(
        baseline_recall=base_recall,
        attack_recall=att_recall,
        success_rate=success_rate(base_recall, att_recall),
        auprc_baseline=base_auprc,
        auprc_attack=auprc(attack_scores, test.y),
        config=plan.config,
        model_kind=model.kind,
    )


# ---------------------------------------------------------------------------
# grid search

@dataclass(frozen=True)
class GridSpec:
    n_values: tuple[int, ...]
    epsilon_values: tuple[float, ...]
    methods: tuple[str, ...]
    model_kinds: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "epsilon_values", tuple(float(e) for e in self.epsilon_values))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "model_kinds", tuple(self.model_kinds))
        if not (self.n_values and self.epsilon_values and self.methods and self.model_kinds):
            raise ValueError("grid spec lists must all be non-empty")
        if any(n < 1 for n in self.n_values):
            raise ValueError("n values must be positive")
        if any(e < 0 for e in self.epsilon_values):
            raise ValueError("epsilon values must be non-negative")
        if list(self.epsilon_values) != sorted(self.epsilon_values):
            raise ValueError("epsilon values must be sorted ascending")
        bad = [m for m in self.methods if m not in RANKING_METHODS]
        if bad:
            raise ValueError(f"unknown ranking methods: {bad}")
        bad = [k for k in self.model_kinds if k not in MODEL_KINDS]
        if bad:
            raise ValueError(f"unknown model kinds: {bad}")

    @property
    def n_cells(self) -> int:
        return len(self.n_values) * len(self.epsilon_values) * len(self.methods) * len(self.model_kinds)


def epsilon_grid(lo: float, hi: float, steps: int) -> tuple[float, ...]:
    """Arithmetic progression including both endpoints."""
    if steps < 1:
        raise ValueError("steps must be positive")
    if steps == 1:
        return (float(lo),)
    if hi < lo:
        raise ValueError("epsilon range must be non-decreasing")
    return tuple(float(v) for v in np.linspace(lo, hi, steps))


@dataclass(frozen=True)
class GridRecord:
    model: str
    method: str
    n: int
    epsilon: float
    baseline_recall: float
    attack_recall: float
    success_rate: float


GRID_COLUMNS = ("model", "method", "n", "epsilon", "baseline_recall", "attack_recall", "success_rate")


@dataclass(frozen=True)
class GridResult:
    records: tuple[GridRecord, ...]

    def to_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(GRID_COLUMNS)
            for r in self.records:
                writer.writerow(_record_row(r))

    @staticmethod
    def from_csv(path: Union[str, Path]) -> "GridResult":
        with open(path, "r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header is None or tuple(header) != GRID_COLUMNS:
                raise MetricError(f"grid CSV must start with header {','.join(GRID_COLUMNS)}")
            records = []
            for row in reader:
                if not row:
                    continue
                records.append(
                    GridRecord(
                        model=row[0],
                        method=row[1],
                        n=int(row[2]),
                        epsilon=float(row[3]),
                        baseline_recall=float(row[4]),
                        attack_recall=float(row[5]),
                        success_rate=float(row[6]),
                    )
                )
        return GridResult(records=tuple(records))


def _record_row(r: GridRecord) -> list[str]:
    return [
        r.model,
        r.method,
        str(r.n),
        format_number(r.epsilon),
        format_number(r.baseline_recall),
        format_number(r.attack_recall),
        format_number(r.success_rate),
    ]


def _cell_key(model: str, method: str, n: int, epsilon: float) -> tuple:
    return (model, method, int(n), float(epsilon))


_CTX: dict = {}


def _init_worker(ctx: dict) -> None:
    _CTX.clear()
    _CTX.update(ctx)


def _eval_cell(task: tuple) -> GridRecord:
    model_kind, method, n, epsilon = task
    ctx = _CTX
    plan = AttackPlan(
        schema=ctx["schema"],
        ranking=ctx["rankings"][method],
        direction=ctx["direction"],
        config=AttackConfig(n=n, epsilon=epsilon, method=method),
        scaler=ctx["scaler"],
    )
    perturbed = perturb_batch(ctx["positives"], plan)
    preds = predict(ctx["models"][model_kind], perturbed)
    attack_recall = float(preds.mean()) if preds.size else 0.0
    base = ctx["baselines"][model_kind]
    return GridRecord(
        model=model_kind,
        method=method,
        n=n,
        epsilon=epsilon,
        baseline_recall=base,
        attack_recall=attack_recall,
        success_rate=success_rate(base, attack_recall),
    )


def grid_search(
    train: Dataset,
    test: Dataset,
    spec: GridSpec,
    seed: int = 0,
    sink: Union[str, Path, None] = None,
    workers: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> GridResult:
    """Evaluate the full (model, method, n, epsilon) cross product.

    ``sink`` appends records as they complete and lets an interrupted run
    resume (already-present cells are skipped).  Results are identical for
    any worker count because cells are merged in task order.
    """
    done: dict[tuple, GridRecord] = {}
    if sink is not None and Path(sink).exists() and Path(sink).stat().st_size > 0:
        for r in GridResult.from_csv(sink).records:
            done[_cell_key(r.model, r.method, r.n, r.epsilon)] = r

    models = {kind: fit(kind, train, seed=seed) for kind in spec.model_kinds}
    pos = test.rows_of_class(1)
    positives = test.take(pos)
    baselines = {kind: recall(models[kind], test.X, test.y) for kind in spec.model_kinds}
    rankings = {m: rank_features(train, m, seed=seed) for m in spec.methods}
    ctx = {
        "schema": train.schema,
        "scaler": fit_scaler(train),
        "direction": compute_direction(train),
        "rankings": rankings,
        "models": models,
        "baselines": baselines,
        "positives": positives,
    }

    cells = [
        (kind, method, n, epsilon)
        for kind in spec.model_kinds
        for method in spec.methods
        for n in spec.n_values
        for epsilon in spec.epsilon_values
    ]
    pending = [c for c in cells if _cell_key(*c) not in done]

    sink_handle = None
    sink_writer = None
    if sink is not None:
        new_file = not (Path(sink).exists() and Path(sink).stat().st_size > 0)
        sink_handle = open(sink, "a", encoding="utf-8", newline="")
        sink_writer = csv.writer(sink_handle)
        if new_file:
            sink_writer.writerow(GRID_COLUMNS)
            sink_handle.flush()

    finished = len(done)
    total = len(cells)
    try:
        if workers <= 1 or len(pending) <= 1:
            _init_worker(ctx)
            iterator = map(_eval_cell, pending)
            for record in iterator:
                done[_cell_key(record.model, record.method, record.n, record.epsilon)] = record
                if sink_writer is not None:
                    sink_writer.writerow(_record_row(record))
                    sink_handle.flush()
                finished += 1
                if progress:
                    progress(finished, total)
        else:
            chunk = max(1, len(pending) // (workers * 4))
            with ProcessPoolExecutor(
                max_workers=workers, initializer=_init_worker, initargs=(ctx,)
            ) as pool:
                for record in pool.map(_eval_cell, pending, chunksize=chunk):
                    done[_cell_key(record.model, record.method, record.n, record.epsilon)] = record
                    if sink_writer is not None:
                        sink_writer.writerow(_record_row(record))
                        sink_handle.flush()
                    finished += 1
                    if progress:
                        progress(finished, total)
    finally:
        if sink_handle is not None:
            sink_handle.close()

    records = tuple(done[_cell_key(*c)] for c in cells)
    return GridResult(records=records)


# ---------------------------------------------------------------------------
# success-rate curves

CURVE_AXES = ("n", "epsilon", "method")


@dataclass(frozen=True)
class CurvePoint:
    axis_value: object
    success_rate: float
    record: GridRecord


def max_success_curve(grid: GridResult, axis: str, model_kind: str) -> list[CurvePoint]:
    """Per distinct axis value, the best success rate over everything else."""
    if axis not in CURVE_AXES:
        raise ValueError(f"axis must be one of {CURVE_AXES}")
    records = [r for r in grid.records if r.model == model_kind]
    if not records:
        raise MetricError(f"grid holds no records for model {model_kind!r}")
    buckets: dict[object, GridRecord] = {}
    for r in records:
        key = getattr(r, axis)
        best = buckets.get(key)
        if best is None or r.success_rate > best.success_rate:
            buckets[key] = r
    if axis == "method":
        ordered = sorted(buckets, key=lambda m: RANKING_METHODS.index(m))
    else:
        ordered = sorted(buckets)
    return [CurvePoint(axis_value=k, success_rate=buckets[k].success_rate, record=buckets[k]) for k in ordered]
