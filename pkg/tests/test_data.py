import io
import json

import numpy as np
import pytest

from tabevade.data import (
    Dataset,
    FeatureSchema,
    FeatureSpec,
    ScalerState,
    fit_scaler,
    inverse_transform,
    load_dataset,
    load_schema,
    schema_from_dict,
    split,
    transform,
)
from tabevade.errors import ParseError, SchemaError, ShapeError, StratificationError


def make_schema(*specs, target="class", pos="1", neg="0"):
    return FeatureSchema(
        features=tuple(specs), target_column=target, positive_class_label=pos, negative_class_label=neg
    )


# ---------------------------------------------------------------------------
# schema invariants

def test_duplicate_feature_names_rejected():
    with pytest.raises(SchemaError, match="duplicate"):
        make_schema(FeatureSpec("a", "continuous"), FeatureSpec("a", "discrete"))


def test_target_among_features_rejected():
    with pytest.raises(SchemaError):
        make_schema(FeatureSpec("class", "continuous"))


def test_onehot_needs_group_and_two_members():
    with pytest.raises(SchemaError, match="group"):
        FeatureSpec("flag=a", "onehot")
    with pytest.raises(SchemaError, match="fewer than 2"):
        make_schema(FeatureSpec("flag=a", "onehot", group="flag"), FeatureSpec("x", "continuous"))


def test_addable_implies_mutable():
    with pytest.raises(SchemaError, match="addable"):
        FeatureSpec("a", "discrete", mutable=False, addable=True)


def test_sidecar_rejects_unknown_keys(tmp_path):
    payload = {
        "target_column": "class",
        "positive_class_label": "1",
        "negative_class_label": "0",
        "features": [{"name": "a", "kind": "continuous"}],
        "bogus": 1,
    }
    with pytest.raises(SchemaError, match="unknown schema keys"):
        schema_from_dict(payload)
    payload.pop("bogus")
    payload["features"][0]["extra"] = True
    with pytest.raises(SchemaError, match="unknown feature keys"):
        schema_from_dict(payload)
    payload["features"][0].pop("extra")
    path = tmp_path / "schema.json"
    path.write_text(json.dumps(payload))
    assert load_schema(path).names == ("a",)


# ---------------------------------------------------------------------------
# loading

def test_load_three_row_csv():
    schema = make_schema(FeatureSpec("age", "continuous"))
    csv_text = "age,class\n1.5,1\n2.5,0\n3.5,1\n"
    ds = load_dataset(io.StringIO(csv_text), schema)
    assert ds.X.shape == (3, 1)
    assert ds.y.tolist() == [1, 0, 1]


def test_load_expands_categorical_to_onehot():
    schema = make_schema(FeatureSpec("workclass", "categorical"))
    csv_text = "workclass,class\ngov,1\nprivate,0\ngov,0\n"
    ds = load_dataset(io.StringIO(csv_text), schema)
    assert ds.schema.names == ("workclass=gov", "workclass=private")
    assert ds.X.tolist() == [[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]
    # group membership and exactly-one-hot are recorded in the schema
    assert ds.schema.onehot_groups() == {"workclass": [0, 1]}
    assert ds.y.tolist() == [1, 0, 0]


def test_load_missing_column_is_schema_mismatch():
    schema = make_schema(FeatureSpec("age", "continuous"))
    with pytest.raises(SchemaError, match="age"):
        load_dataset(io.StringIO("height,class\n1,1\n"), schema)


def test_load_bad_value_names_row():
    schema = make_schema(FeatureSpec("age", "continuous"))
    with pytest.raises(ParseError, match="row 2"):
        load_dataset(io.StringIO("age,class\n1,1\nnope,0\n"), schema)


def test_load_missing_value_rejected():
    schema = make_schema(FeatureSpec("age", "continuous"))
    with pytest.raises(ParseError, match="missing"):
        load_dataset(io.StringIO("age,class\n,1\n"), schema)


def test_load_non_integer_discrete_rejected():
    schema = make_schema(FeatureSpec("count", "discrete"))
    with pytest.raises(ParseError, match="non-integer"):
        load_dataset(io.StringIO("count,class\n1.5,1\n"), schema)


def test_load_unknown_label_rejected():
    schema = make_schema(FeatureSpec("age", "continuous"))
    with pytest.raises(ParseError, match="label"):
        load_dataset(io.StringIO("age,class\n1,2\n"), schema)


def test_onehot_expansion_preserves_rows_and_labels():
    rng = np.random.default_rng(0)
    rows = ["v,n,class"]
    labels = []
    for i in range(50):
        label = int(rng.integers(0, 2))
        labels.append(label)
        rows.append(f"{'abc'[int(rng.integers(0, 3))]},{rng.integers(0, 9)},{label}")
    schema = make_schema(FeatureSpec("v", "categorical"), FeatureSpec("n", "discrete"))
    ds = load_dataset(io.StringIO("\n".join(rows)), schema)
    assert ds.n_rows == 50
    assert ds.y.tolist() == labels
    assert np.all(ds.X[:, :3].sum(axis=1) == 1)


def test_dataset_validates_onehot_consistency():
    schema = make_schema(
        FeatureSpec("g=a", "onehot", group="g"), FeatureSpec("g=b", "onehot", group="g")
    )
    with pytest.raises(SchemaError, match="exactly-one-hot"):
        Dataset(X=np.array([[1.0, 1.0]]), y=np.array([1]), schema=schema)


# ---------------------------------------------------------------------------
# split

def blob_dataset(n=100, pos_fraction=0.6, seed=0):
    rng = np.random.default_rng(seed)
    n_pos = int(n * pos_fraction)
    X = rng.normal(size=(n, 2))
    y = np.array([1] * n_pos + [0] * (n - n_pos))
    schema = make_schema(FeatureSpec("a", "continuous"), FeatureSpec("b", "continuous"))
    return Dataset(X=X, y=y, schema=schema)


def test_split_counts_and_stratification():
    ds = blob_dataset(100)
    train, test = split(ds, 0.8, seed=7)
    assert train.n_rows == 80 and test.n_rows == 20
    full_ratio = ds.y.mean()
    assert abs(train.y.mean() - full_ratio) <= 1.0 / train.n_rows
    assert abs(test.y.mean() - full_ratio) <= 1.0 / test.n_rows


def test_split_is_exact_partition():
    ds = blob_dataset(101, pos_fraction=0.37)
    train, test = split(ds, 0.8, seed=3)
    combined = np.vstack([train.X, test.X])
    assert combined.shape[0] == ds.n_rows
    # every original row appears exactly once across the two sides
    original = {tuple(row) for row in ds.X}
    assert {tuple(row) for row in combined} == original


def test_split_deterministic():
    ds = blob_dataset(100)
    a = split(ds, 0.8, seed=42)
    b = split(ds, 0.8, seed=42)
    assert np.array_equal(a[0].X, b[0].X) and np.array_equal(a[1].X, b[1].X)


def test_split_single_class_errors():
    schema = make_schema(FeatureSpec("a", "continuous"))
    ds = Dataset(X=np.ones((10, 1)), y=np.ones(10, dtype=int), schema=schema)
    with pytest.raises(StratificationError):
        split(ds, 0.8, seed=0)


# ---------------------------------------------------------------------------
# scaler

def test_fit_scaler_simple_column():
    schema = make_schema(FeatureSpec("a", "continuous"))
    ds = Dataset(X=np.array([[2.0], [4.0], [10.0]]), y=np.array([1, 0, 1]), schema=schema)
    scaler = fit_scaler(ds)
    assert scaler.mins[0] == 2.0 and scaler.maxs[0] == 10.0


def test_fit_scaler_constant_column():
    schema = make_schema(FeatureSpec("a", "continuous"))
    ds = Dataset(X=np.array([[5.0], [5.0], [5.0]]), y=np.array([1, 0, 1]), schema=schema)
    scaler = fit_scaler(ds)
    assert scaler.mins[0] == 5.0 and scaler.maxs[0] == 5.0
    assert transform(np.array([5.0]), scaler)[0] == 0.0
    assert inverse_transform(np.array([0.0]), scaler)[0] == 5.0


def test_fit_scaler_matches_column_scan():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(40, 2)) * 10
    schema = make_schema(FeatureSpec("a", "continuous"), FeatureSpec("b", "continuous"))
    ds = Dataset(X=X, y=np.array([1, 0] * 20), schema=schema)
    scaler = fit_scaler(ds)
    for j in range(2):
        lo, hi = np.inf, -np.inf
        for row in X:
            lo, hi = min(lo, row[j]), max(hi, row[j])
        assert scaler.mins[j] == lo and scaler.maxs[j] == hi


def test_transform_midpoint_and_beyond_range():
    scaler = ScalerState(mins=np.array([2.0]), maxs=np.array([10.0]))
    assert transform(np.array([6.0]), scaler)[0] == pytest.approx(0.5)
    # test-time values past the training max scale past 1 and are not clipped
    assert transform(np.array([12.0]), scaler)[0] == pytest.approx(1.25)


def test_inverse_transform_midpoint():
    scaler = ScalerState(mins=np.array([2.0]), maxs=np.array([10.0]))
    assert inverse_transform(np.array([0.5]), scaler)[0] == pytest.approx(6.0)


def test_round_trip_random_values():
    rng = np.random.default_rng(11)
    mins = rng.normal(size=8) * 3
    maxs = mins + rng.random(8) * 10 + 0.1
    scaler = ScalerState(mins=mins, maxs=maxs)
    for _ in range(1000):
        x = mins + rng.random(8) * (maxs - mins)
        back = inverse_transform(transform(x, scaler), scaler)
        assert np.allclose(back, x, rtol=1e-9, atol=1e-12)


def test_training_rows_scale_into_unit_interval():
    ds = blob_dataset(60, seed=9)
    scaler = fit_scaler(ds)
    scaled = transform(ds.X, scaler)
    assert scaled.min() >= 0.0 and scaled.max() <= 1.0


def test_transform_shape_mismatch():
    scaler = ScalerState(mins=np.zeros(2), maxs=np.ones(2))
    with pytest.raises(ShapeError):
        transform(np.zeros(3), scaler)


def test_scaler_rejects_min_above_max():
    with pytest.raises(SchemaError):
        ScalerState(mins=np.array([1.0]), maxs=np.array([0.0]))
