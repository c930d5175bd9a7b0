"""Dataset loading, feature schema, one-hot expansion, splitting and min-max scaling.

Conventions used throughout the package:

* labels are stored as a 0/1 integer vector where 1 is the *input class*
  (the class being perturbed, e.g. phishing) and 0 is the *target class*
  (the class being mimicked, e.g. legitimate);
* feature matrices are float64, rows = samples, columns in schema order;
* one-hot group members are discrete binary columns named by the schema.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, TextIO, Union

import numpy as np

from .errors import ParseError, SchemaError, ShapeError, StratificationError

FEATURE_KINDS = ("continuous", "discrete", "categorical", "onehot")


@dataclass(frozen=True)
class FeatureSpec:
    """One column of the feature space.

    ``categorical`` marks a raw text column in a source CSV that is expanded
    into one-hot members at load time; a loaded :class:`Dataset` never
    contains categorical specs.  ``addable`` means the feature can be
    realized in problem space by adding page content, which requires the
    feature to be mutable at all.
    """

    name: str
    kind: str
    group: str | None = None
    mutable: bool = True
    addable: bool = False

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaError("feature name must be non-empty")
        if self.kind not in FEATURE_KINDS:
            raise SchemaError(f"unknown feature kind {self.kind!r} for {self.name!r}")
        if self.kind == "onehot" and not self.group:
            raise SchemaError(f"onehot feature {self.name!r} must name its group")
        if self.kind != "onehot" and self.group is not None:
            raise SchemaError(f"feature {self.name!r} of kind {self.kind} must not name a group")
        if self.addable and not self.mutable:
            raise SchemaError(f"feature {self.name!r} is addable but not mutable")

    @property
    def is_discrete(self) -> bool:
        # one-hot members are implicitly discrete with range {0, 1}
        return self.kind in ("discrete", "onehot")


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature specs plus the label convention of the task."""

    features: tuple[FeatureSpec, ...]
    target_column: str
    positive_class_label: str
    negative_class_label: str

    def __post_init__(self) -> None:
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate feature names: {dupes}")
        if not self.target_column:
            raise SchemaError("target_column must be non-empty")
        if self.target_column in names:
            raise SchemaError(f"target column {self.target_column!r} is also a feature")
        if self.positive_class_label == self.negative_class_label:
            raise SchemaError("class labels must differ")
        for group, members in self.onehot_groups().items():
            if len(members) < 2:
                raise SchemaError(f"one-hot group {group!r} has fewer than 2 members")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    @property
    def n_features(self) -> int:
        return len(self.features)

    def index_of(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise SchemaError(f"unknown feature {name!r}")

    def onehot_groups(self) -> dict[str, list[int]]:
        groups: dict[str, list[int]] = {}
        for i, f in enumerate(self.features):
            if f.kind == "onehot":
                groups.setdefault(f.group, []).append(i)
        return groups

    def discrete_mask(self) -> np.ndarray:
        return np.array([f.is_discrete for f in self.features], dtype=bool)

    def mutable_mask(self) -> np.ndarray:
        return np.array([f.mutable for f in self.features], dtype=bool)

    def addable_indices(self) -> list[int]:
        return [i for i, f in enumerate(self.features) if f.addable]

    def has_categorical(self) -> bool:
        return any(f.kind == "categorical" for f in self.features)


# ---------------------------------------------------------------------------
# schema sidecar (JSON, strict)

_SCHEMA_KEYS = {"target_column", "positive_class_label", "negative_class_label", "features"}
_FEATURE_KEYS = {"name", "kind", "group", "mutable", "addable"}


def schema_from_dict(payload: Mapping) -> FeatureSchema:
    """Parse the sidecar payload; unknown keys are rejected."""
    unknown = set(payload) - _SCHEMA_KEYS
    if unknown:
        raise SchemaError(f"unknown schema keys: {sorted(unknown)}")
    missing = _SCHEMA_KEYS - set(payload)
    if missing:
        raise SchemaError(f"missing schema keys: {sorted(missing)}")
    specs = []
    for entry in payload["features"]:
        extra = set(entry) - _FEATURE_KEYS
        if extra:
            raise SchemaError(f"unknown feature keys: {sorted(extra)}")
        if "name" not in entry or "kind" not in entry:
            raise SchemaError("every feature needs at least 'name' and 'kind'")
        specs.append(
            FeatureSpec(
                name=str(entry["name"]),
                kind=str(entry["kind"]),
                group=entry.get("group"),
                mutable=bool(entry.get("mutable", True)),
                addable=bool(entry.get("addable", False)),
            )
        )
    return FeatureSchema(
        features=tuple(specs),
        target_column=str(payload["target_column"]),
        positive_class_label=str(payload["positive_class_label"]),
        negative_class_label=str(payload["negative_class_label"]),
    )


def schema_to_dict(schema: FeatureSchema) -> dict:
    features = []
    for f in schema.features:
        entry = {"name": f.name, "kind": f.kind, "mutable": f.mutable, "addable": f.addable}
        if f.group is not None:
            entry["group"] = f.group
        features.append(entry)
    return {
        "target_column": schema.target_column,
        "positive_class_label": schema.positive_class_label,
        "negative_class_label": schema.negative_class_label,
        "features": features,
    }


def load_schema(path: Union[str, Path]) -> FeatureSchema:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"schema file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise SchemaError("schema file must hold a JSON object")
    return schema_from_dict(payload)


def atomic_write_text(path: Union[str, Path], text: str) -> None:
    """Write-then-rename so readers never observe a partial file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def save_schema(schema: FeatureSchema, path: Union[str, Path]) -> None:
    atomic_write_text(path, json.dumps(schema_to_dict(schema), indent=2) + "\n")


# ---------------------------------------------------------------------------
# dataset

@dataclass(frozen=True)
class Dataset:
    """Immutable numeric feature matrix with binary labels and its schema."""

    X: np.ndarray
    y: np.ndarray
    schema: FeatureSchema

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=int)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.schema.has_categorical():
            raise SchemaError("datasets require categorical columns to be expanded first")
        if X.ndim != 2 or X.shape[1] != self.schema.n_features:
            raise SchemaError(
                f"X has {X.shape[1] if X.ndim == 2 else '?'} columns, schema has {self.schema.n_features}"
            )
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise SchemaError("y length must equal the X row count")
        if y.size and not np.isin(y, (0, 1)).all():
            raise SchemaError("labels must be 0 (target class) or 1 (input class)")
        for i, spec in enumerate(self.schema.features):
            col = X[:, i]
            if spec.is_discrete and col.size and not np.array_equal(col, np.floor(col)):
                raise SchemaError(f"discrete feature {spec.name!r} holds non-integer values")
            if spec.kind == "onehot" and col.size and not np.isin(col, (0.0, 1.0)).all():
                raise SchemaError(f"one-hot feature {spec.name!r} holds values outside {{0,1}}")
        for group, members in self.schema.onehot_groups().items():
            if X.shape[0] and not np.all(X[:, members].sum(axis=1) == 1):
                raise SchemaError(f"one-hot group {group!r} is not exactly-one-hot in some row")
        X.setflags(write=False)
        y.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return int(self.X.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.X.shape[1])

    def rows_of_class(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.y == label)

    def take(self, indices: np.ndarray) -> "Dataset":
        return Dataset(self.X[indices].copy(), self.y[indices].copy(), self.schema)


def _parse_numeric(cell: str, spec: FeatureSpec, row: int) -> float:
    text = cell.strip()
    if not text:
        raise ParseError(f"row {row}: missing value in column {spec.name!r}")
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"row {row}: non-numeric value {cell!r} in column {spec.name!r}") from None
    if not math.isfinite(value):
        raise ParseError(f"row {row}: non-finite value {cell!r} in column {spec.name!r}")
    if spec.is_discrete and value != math.floor(value):
        raise ParseError(f"row {row}: non-integer value {cell!r} in discrete column {spec.name!r}")
    if spec.kind == "onehot" and value not in (0.0, 1.0):
        raise ParseError(f"row {row}: one-hot column {spec.name!r} holds {cell!r}, expected 0 or 1")
    return value


def load_dataset(source: Union[str, Path, TextIO], schema: FeatureSchema) -> Dataset:
    """Load a header-carrying CSV and expand categorical columns to one-hot.

    Row indices in errors are 1-based data-row positions (the header is row
    0).  Columns in the CSV that the schema does not mention are ignored.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return load_dataset(handle, schema)

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("CSV has no header row") from None
    header = [h.strip() for h in header]
    positions: dict[str, int] = {}
    for idx, name in enumerate(header):
        positions.setdefault(name, idx)

    missing = [n for n in (*schema.names, schema.target_column) if n not in positions]
    if missing:
        raise SchemaError(f"CSV header lacks columns: {missing}")

    label_pos = positions[schema.target_column]
    columns: list[list] = [[] for _ in schema.features]
    labels: list[int] = []
    for row_idx, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue  # blank line
        if len(row) < len(header):
            raise ParseError(f"row {row_idx}: expected {len(header)} cells, got {len(row)}")
        label_cell = row[label_pos].strip()
        if label_cell == schema.positive_class_label:
            labels.append(1)
        elif label_cell == schema.negative_class_label:
            labels.append(0)
        else:
            raise ParseError(f"row {row_idx}: unknown label {label_cell!r}")
        for j, spec in enumerate(schema.features):
            cell = row[positions[spec.name]]
            if spec.kind == "categorical":
                text = cell.strip()
                if not text:
                    raise ParseError(f"row {row_idx}: missing value in column {spec.name!r}")
                columns[j].append(text)
            else:
                columns[j].append(_parse_numeric(cell, spec, row_idx))

    expanded_specs: list[FeatureSpec] = []
    expanded_cols: list[np.ndarray] = []
    n = len(labels)
    for j, spec in enumerate(schema.features):
        if spec.kind != "categorical":
            expanded_specs.append(spec)
            expanded_cols.append(np.asarray(columns[j], dtype=float))
            continue
        values = sorted(set(columns[j]))
        if len(values) < 2:
            raise SchemaError(
                f"categorical column {spec.name!r} has {len(values)} distinct value(s); "
                "one-hot groups need at least 2"
            )
        raw = np.asarray(columns[j], dtype=object)
        for value in values:
            expanded_specs.append(
                FeatureSpec(
                    name=f"{spec.name}={value}",
                    kind="onehot",
                    group=spec.name,
                    mutable=spec.mutable,
                    addable=spec.addable,
                )
            )
            expanded_cols.append((raw == value).astype(float))

    X = np.column_stack(expanded_cols) if expanded_cols else np.zeros((n, 0))
    out_schema = FeatureSchema(
        features=tuple(expanded_specs),
        target_column=schema.target_column,
        positive_class_label=schema.positive_class_label,
        negative_class_label=schema.negative_class_label,
    )
    return Dataset(X=X, y=np.asarray(labels, dtype=int), schema=out_schema)


def save_dataset_csv(dataset: Dataset, path: Union[str, Path]) -> None:
    """Write the (expanded) dataset back out as CSV with a label column."""
    schema = dataset.schema
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([*schema.names, schema.target_column])
    labels = np.where(dataset.y == 1, schema.positive_class_label, schema.negative_class_label)
    for row, label in zip(dataset.X, labels):
        writer.writerow([format_number(v) for v in row] + [label])
    atomic_write_text(path, buffer.getvalue())


def format_number(value: float) -> str:
    """Shortest-roundtrip decimal text; integers drop the trailing .0."""
    value = float(value)
    if value == math.floor(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def split(dataset: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic stratified partition into (train, test).

    Per-class train counts are round(train_fraction * class size), clamped so
    both sides keep at least one row of each class.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    labels = np.unique(dataset.y)
    if labels.size < 2:
        raise StratificationError("stratified split needs both classes present")
    rng = np.random.default_rng(seed)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for label in labels:
        rows = dataset.rows_of_class(int(label))
        if rows.size < 2:
            raise StratificationError(f"class {label} has fewer than 2 rows")
        shuffled = rng.permutation(rows)
        k = int(round(train_fraction * rows.size))
        k = min(max(k, 1), rows.size - 1)
        train_idx.append(shuffled[:k])
        test_idx.append(shuffled[k:])
    train_rows = np.sort(np.concatenate(train_idx))
    test_rows = np.sort(np.concatenate(test_idx))
    return dataset.take(train_rows), dataset.take(test_rows)


# ---------------------------------------------------------------------------
# min-max scaling transformer

@dataclass(frozen=True)
class ScalerState:
    """Per-feature (min, max) learned from training rows.

    ``transform`` maps v to (v - min) / (max - min) without clipping, so test
    values outside the training range land outside [0, 1].  Constant features
    (min == max) transform to 0 and invert to min.
    """

    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self) -> None:
        mins = np.asarray(self.mins, dtype=float)
        maxs = np.asarray(self.maxs, dtype=float)
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise SchemaError("scaler min/max must be matching 1-D vectors")
        if np.any(mins > maxs):
            raise SchemaError("scaler has min > max for some feature")
        mins.setflags(write=False)
        maxs.setflags(write=False)

    @property
    def n_features(self) -> int:
        return int(self.mins.size)

    def constant_mask(self) -> np.ndarray:
        return self.maxs == self.mins


def fit_scaler(train: Dataset) -> ScalerState:
    if train.n_rows == 0:
        raise ValueError("cannot fit a scaler on an empty dataset")
    return ScalerState(mins=train.X.min(axis=0), maxs=train.X.max(axis=0))


def _check_width(x, scaler: ScalerState) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != scaler.n_features:
        raise ShapeError(f"vector has {arr.shape[-1]} features, scaler expects {scaler.n_features}")
    return arr


def transform(x, scaler: ScalerState) -> np.ndarray:
    """Scale a sample vector (or row matrix) into training-range units."""
    arr = _check_width(x, scaler)
    span = scaler.maxs - scaler.mins
    safe = np.where(span == 0.0, 1.0, span)
    out = (arr - scaler.mins) / safe
    return np.where(span == 0.0, 0.0, out)


def inverse_transform(x_scaled, scaler: ScalerState) -> np.ndarray:
    arr = _check_width(x_scaled, scaler)
    span = scaler.maxs - scaler.mins
    out = arr * span + scaler.mins
    return np.where(span == 0.0, scaler.mins, out)
