"""Datasets, tasks, label statistics and feature-space augmentation.

A multilabel dataset is an ``n x p`` numeric feature matrix paired with an
``n x m`` binary label matrix. Categorical inputs are one-hot encoded at
ingestion so every downstream learner only ever sees numbers. All containers
are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, IngestError, UsageError
from .splits import SeedLike, rng_from


def _check_unique(names, what: str):
    if len(set(names)) != len(names):
        raise IngestError(f"duplicate {what} names")


@dataclass(frozen=True)
class MultilabelDataset:
    """Feature matrix plus binary label matrix with column names."""

    features: np.ndarray      # (n, p) float64
    labels: np.ndarray        # (n, m) int64 with entries in {0, 1}
    feature_names: tuple[str, ...]
    label_names: tuple[str, ...]

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels)
        if features.ndim != 2 or labels.ndim != 2:
            raise DimensionError("features and labels must be 2-d matrices")
        if features.shape[0] != labels.shape[0]:
            raise DimensionError(
                f"feature rows ({features.shape[0]}) != label rows ({labels.shape[0]})")
        if labels.shape[0] < 1 or labels.shape[1] < 1:
            raise DimensionError("need at least one instance and one label")
        if not np.isin(labels, (0, 1)).all():
            raise IngestError("label matrix entries must be 0 or 1")
        if not np.isfinite(features).all():
            raise IngestError("missing or non-finite feature values are rejected")
        labels = labels.astype(np.int64)
        if features.shape[1] != len(self.feature_names):
            raise DimensionError("feature_names length does not match feature columns")
        if labels.shape[1] != len(self.label_names):
            raise DimensionError("label_names length does not match label columns")
        _check_unique(tuple(self.feature_names) + tuple(self.label_names), "column")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "label_names", tuple(self.label_names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def m(self) -> int:
        return self.labels.shape[1]

    def subset(self, rows: np.ndarray) -> "MultilabelDataset":
        return MultilabelDataset(self.features[rows], self.labels[rows],
                                 self.feature_names, self.label_names)


@dataclass(frozen=True)
class Task:
    """A named multilabel classification problem. Label value 1 is positive."""

    id: str
    dataset: MultilabelDataset

    POSITIVE_VALUE = 1

    def __post_init__(self):
        if not self.id:
            raise UsageError("task id must be nonempty")


@dataclass(frozen=True)
class DatasetStats:
    n_instances: int
    n_predictors: int
    n_labels: int
    cardinality: float
    per_label_prevalence: tuple[float, ...]


def _is_binary_column(values: np.ndarray) -> bool:
    return np.isin(values, (0, 1)).all()


def _column_is_numeric(cells: list) -> bool:
    for cell in cells:
        if isinstance(cell, bool):
            continue
        if isinstance(cell, (int, float, np.integer, np.floating)):
            continue
        return False
    return True


def table_to_columns(data) -> tuple[list[str], dict[str, list]]:
    """Normalize a labeled table (mapping of columns or DataFrame) to columns."""
    if hasattr(data, "columns") and hasattr(data, "__getitem__"):
        names = [str(c) for c in data.columns]
        return names, {name: list(data[name]) for name in names}
    if isinstance(data, dict):
        names = [str(c) for c in data]
        return names, {name: list(values) for name, values in data.items()}
    raise UsageError("data must be a mapping of column name -> values or a DataFrame")


def one_hot_columns(name: str, cells: list[str], value_order: list[str] | None = None):
    """Expand one nominal column into 0/1 indicator columns.

    Column order is the declared value order when given, else sorted unique
    values; indicator names are ``name=value``.
    """
    values = value_order if value_order is not None else sorted(set(cells))
    columns = []
    names = []
    arr = np.asarray(cells, dtype=object)
    for value in values:
        columns.append((arr == value).astype(np.float64))
        names.append(f"{name}={value}")
    return names, columns


def make_multilabel_task(data, target_names: list[str], id: str) -> Task:
    """Build a Task from a labeled table, splitting off the target columns.

    Target columns must be binary (0/1 or bool). Remaining columns become
    features; non-numeric feature columns are one-hot encoded. A table whose
    columns are all targets yields a legal feature-less task (p = 0).
    """
    names, columns = table_to_columns(data)
    _check_unique(names, "column")
    target_names = [str(t) for t in target_names]
    _check_unique(target_names, "target")
    for target in target_names:
        if target not in columns:
            raise IngestError(f"unknown target {target!r}")
    n = len(columns[names[0]]) if names else 0
    if n < 1:
        raise IngestError("empty table")
    for name in names:
        if len(columns[name]) != n:
            raise DimensionError(f"column {name!r} has {len(columns[name])} rows, expected {n}")

    label_cols = []
    for target in target_names:
        cells = columns[target]
        if not _column_is_numeric(cells):
            raise IngestError(f"target column {target!r} is not binary")
        values = np.asarray([float(c) for c in cells])
        if not _is_binary_column(values):
            raise IngestError(f"target column {target!r} is not binary")
        label_cols.append(values.astype(np.int64))
    labels = np.column_stack(label_cols)

    feature_names: list[str] = []
    feature_cols: list[np.ndarray] = []
    for name in names:
        if name in target_names:
            continue
        cells = columns[name]
        if _column_is_numeric(cells):
            col = np.asarray([float(c) for c in cells])
            if not np.isfinite(col).all():
                raise IngestError(f"missing value in feature column {name!r}")
            feature_names.append(name)
            feature_cols.append(col)
        else:
            if any(c is None for c in cells):
                raise IngestError(f"missing value in feature column {name!r}")
            sub_names, sub_cols = one_hot_columns(name, [str(c) for c in cells])
            feature_names.extend(sub_names)
            feature_cols.extend(sub_cols)
    if feature_cols:
        features = np.column_stack(feature_cols)
    else:
        features = np.empty((n, 0))
    dataset = MultilabelDataset(features, labels, tuple(feature_names), tuple(target_names))
    return Task(id=id, dataset=dataset)


def dataset_stats(task: Task) -> DatasetStats:
    """Per-label prevalences and the mean number of labels per instance."""
    ds = task.dataset
    prevalence = ds.labels.mean(axis=0)
    return DatasetStats(
        n_instances=ds.n,
        n_predictors=ds.p,
        n_labels=ds.m,
        cardinality=float(prevalence.sum()),
        per_label_prevalence=tuple(float(v) for v in prevalence),
    )


def filter_sparse_labels(task: Task, min_prevalence: float) -> tuple[Task, list[str]]:
    """Drop labels whose prevalence is strictly below ``min_prevalence``.

    Returns the filtered task and the removed label names in their original
    order. Removing every label is an error.
    """
    if not 0.0 <= min_prevalence <= 1.0:
        raise UsageError("min_prevalence must lie in [0, 1]")
    ds = task.dataset
    prevalence = ds.labels.mean(axis=0)
    keep = prevalence >= min_prevalence
    removed = [name for name, kept in zip(ds.label_names, keep) if not kept]
    if not keep.any():
        raise UsageError("no labels remain after sparse-label filtering")
    if not removed:
        return task, []
    filtered = MultilabelDataset(
        ds.features, ds.labels[:, keep], ds.feature_names,
        tuple(name for name, kept in zip(ds.label_names, keep) if kept))
    return Task(id=task.id, dataset=filtered), removed


def augment_features(features: np.ndarray, extra_columns: np.ndarray,
                     column_names: list[str] | None = None) -> np.ndarray:
    """Append binary columns to a feature matrix (originals first)."""
    features = np.asarray(features, dtype=np.float64)
    extra = np.asarray(extra_columns, dtype=np.float64)
    if extra.ndim == 1:
        extra = extra[:, None]
    if extra.shape[1] == 0:
        return features
    if features.shape[0] != extra.shape[0]:
        raise DimensionError(
            f"row mismatch: features have {features.shape[0]} rows, extras {extra.shape[0]}")
    if column_names is not None and len(column_names) != extra.shape[1]:
        raise DimensionError("column_names length does not match extra columns")
    return np.hstack([features, extra])


@dataclass(frozen=True)
class LabelRule:
    """Thresholded linear rule for one synthetic label.

    ``weights`` act on the feature vector followed by all previously sampled
    labels, so rule k takes ``p + k - 1`` weights. The rule output is flipped
    with probability ``noise``.
    """

    weights: tuple[float, ...]
    bias: float = 0.0
    noise: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.noise <= 1.0:
            raise UsageError(f"noise rate {self.noise} outside [0, 1]")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))


def make_synthetic_task(n: int, p: int, rules: list[LabelRule], seed: SeedLike,
                        id: str = "synthetic") -> Task:
    """Sample a task by drawing labels one after another along a chain.

    Features are standard normal. Label k is the thresholded linear rule of
    the features and the already-sampled labels 1..k-1, then flipped with the
    rule's noise rate. Fixed seed gives a bit-identical dataset.
    """
    if n < 1 or p < 0 or not rules:
        raise UsageError("need n >= 1, p >= 0 and at least one label rule")
    rng = rng_from(seed)
    features = rng.standard_normal((n, p))
    labels = np.empty((n, len(rules)), dtype=np.int64)
    for k, rule in enumerate(rules):
        expected = p + k
        if len(rule.weights) != expected:
            raise UsageError(
                f"rule {k + 1} needs {expected} weights (p + {k} previous labels), "
                f"got {len(rule.weights)}")
        inputs = np.hstack([features, labels[:, :k].astype(np.float64)])
        raw = (inputs @ np.asarray(rule.weights) + rule.bias > 0).astype(np.int64)
        flips = rng.random(n) < rule.noise
        labels[:, k] = np.where(flips, 1 - raw, raw)
    dataset = MultilabelDataset(
        features, labels,
        tuple(f"x{j + 1}" for j in range(p)),
        tuple(f"y{k + 1}" for k in range(len(rules))))
    return Task(id=id, dataset=dataset)


def copy_rule(p: int, k: int, source: int, noise: float = 0.0) -> LabelRule:
    """Rule for chain position k (1-based) that copies the earlier label ``source``."""
    if not 1 <= source < k:
        raise UsageError("copy source must be an earlier chain position")
    weights = [0.0] * (p + k - 1)
    weights[p + source - 1] = 1.0
    return LabelRule(weights=tuple(weights), bias=-0.5, noise=noise)


def cardinality_of(labels: np.ndarray) -> float:
    """Mean number of relevant labels per row of a binary matrix."""
    labels = np.asarray(labels)
    return float(labels.sum() / labels.shape[0])
