"""Shared fixtures: benchmark datasets, synthetic data, random generators."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

import confold as cf

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def make_random_dataset(rng: random.Random, max_examples: int = 200,
                        max_features: int = 8, max_classes: int = 5) -> cf.Dataset:
    """A random mixed-kind dataset with missing values; labels may be pure
    noise or weakly feature-correlated."""
    n_feat = rng.randint(1, max_features)
    schema = [(f"f{i}", rng.choice([cf.CATEGORICAL, cf.NUMERIC])) for i in range(n_feat)]
    n_classes = rng.randint(1, max_classes)
    classes = [f"c{i}" for i in range(n_classes)]
    correlated = rng.random() < 0.5
    rows = []
    for _ in range(rng.randint(1, max_examples)):
        feats = {}
        for name, kind in schema:
            r = rng.random()
            if r < 0.1:
                feats[name] = None
            elif kind == cf.CATEGORICAL:
                feats[name] = rng.choice(["a", "b", "c", "d"])
            else:
                feats[name] = float(rng.randint(0, 12))
        if correlated and feats.get("f0") is not None:
            v = feats["f0"]
            bucket = (int(v) if not isinstance(v, str) else ord(v[0])) % n_classes
            label = classes[bucket] if rng.random() < 0.8 else rng.choice(classes)
        else:
            label = rng.choice(classes)
        rows.append((feats, label))
    return cf.Dataset.from_rows(schema, rows)


def sec2_rows() -> tuple[list[tuple[str, str]], list[tuple[dict, str]]]:
    """Individuals where exactly the over-16s are female, except those named
    sam whose favourite colour is not purple."""
    colours = ["red", "blue", "purple", "green"]
    names = ["ann", "bea", "cam", "dot", "eve"]
    rows = []
    for i in range(20):  # adult non-sam individuals: female
        rows.append(
            ({"age": 20.0 + i % 7, "name": names[i % 5], "fav_color": colours[i % 4]},
             "female"))
    for i in range(4):  # adult sams with purple: female
        rows.append((({"age": 30.0 + i, "name": "sam", "fav_color": "purple"}), "female"))
    for i in range(6):  # adult sams without purple: not female
        rows.append(
            ({"age": 25.0 + i, "name": "sam", "fav_color": ["red", "blue", "green"][i % 3]},
             "male"))
    for i, a in enumerate([5.0, 7.0, 9.0, 11.0, 12.0, 14.0, 15.0, 16.0]):  # minors
        rows.append(
            ({"age": a, "name": names[i % 5], "fav_color": colours[i % 4]}, "male"))
    schema = [("age", cf.NUMERIC), ("name", cf.CATEGORICAL), ("fav_color", cf.CATEGORICAL)]
    return schema, rows


@pytest.fixture(scope="session")
def sec2_dataset() -> cf.Dataset:
    schema, rows = sec2_rows()
    return cf.Dataset.from_rows(schema, rows, target="gender")


@pytest.fixture(scope="session")
def titanic_program() -> cf.Program:
    """Hand-built two-rule survival model in the classic shape."""
    rule1 = cf.Rule("rule1", (cf.Literal("sex", "!=", "female"),))
    rule2 = cf.Rule("rule2", (cf.Literal("sex", "=", "female"),))
    return cf.Program(
        (
            cf.AnnotatedRule(rule1, (), "false", 0.93),
            cf.AnnotatedRule(rule2, (), "true", 0.97),
        ),
        frozenset({"false", "true"}),
        target="survived",
    )


@pytest.fixture(scope="session")
def wine_dataset() -> cf.Dataset:
    sklearn = pytest.importorskip("sklearn.datasets")
    bundle = sklearn.load_wine()
    names = [n.replace("/", "_") for n in bundle.feature_names]
    rows = [
        ({n: float(v) for n, v in zip(names, x)}, bundle.target_names[y])
        for x, y in zip(bundle.data, bundle.target)
    ]
    return cf.Dataset.from_rows([(n, cf.NUMERIC) for n in names], rows, target="class")


@pytest.fixture(scope="session")
def ecoli_dataset() -> cf.Dataset:
    path = DATA_DIR / "ecoli.csv"
    if not path.exists():
        pytest.skip(
            "data/ecoli.csv missing (normally bundled); regenerate with "
            "scripts/fetch_uci.py ecoli where network is available"
        )
    return cf.load_csv(str(path), "class")


def make_marking_dataset(seed: int = 5, n: int = 200) -> cf.Dataset:
    """Labels exactly follow a two-feature marking scheme."""
    rng = random.Random(seed)
    rows = []
    for _ in range(n):
        cn = rng.random() < 0.6
        cu = rng.random() < 0.7
        grade = "1" if cn and cu else ("0.5" if cn else "0")
        rows.append((
            {"correct_number": "true" if cn else "false",
             "correct_unit": "true" if cu else "false"},
            grade,
        ))
    schema = [("correct_number", cf.CATEGORICAL), ("correct_unit", cf.CATEGORICAL)]
    return cf.Dataset.from_rows(schema, rows, target="grade")
