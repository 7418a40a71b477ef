"""Problem-transformation multilabel learners: BR, CC, NST, DBR and STA.

All five wrap a binary base learner:

* BR fits one independent classifier per label on the bare features.
* CC chains classifiers along a label order; classifier k trains on the
  features plus the *true* labels of the k-1 earlier chain positions and
  predicts with the previously predicted hard labels instead.
* NST keeps CC's chaining but replaces the true label columns with
  cross-fitted out-of-sample predictions, stage by stage, so no training
  row ever sees a column produced by a model that was trained on it.
* DBR conditions each label's classifier on the true values of all other
  labels and keeps a plain BR model as the first prediction level.
* STA conditions each label's classifier on cross-fitted predictions of all
  m labels (its own included) with BR as the first level.

Training widths are therefore p, p+k-1, p+k-1, p+m-1 and p+m columns.
Independent per-label fits (BR, DBR meta, STA first level and meta) may run
on a thread pool; chain stages are inherently sequential.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import Task
from .errors import DimensionError, UsageError
from .learners import BaseLearnerSpec, BinaryModel, fit_binary, predict_label, predict_prob
from .metrics import PredictionSet
from .splits import SeedLike, kfold_split, rng_from

METHOD_NAMES = ("BR", "CC", "NST", "DBR", "STA")


@dataclass(frozen=True)
class ChainOrder:
    """A permutation of the label indices 0..m-1."""

    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        if sorted(order) != list(range(len(order))):
            raise UsageError(f"{order} is not a permutation of 0..{len(order) - 1}")
        object.__setattr__(self, "order", order)

    def __len__(self) -> int:
        return len(self.order)

    @classmethod
    def identity(cls, m: int) -> "ChainOrder":
        return cls(tuple(range(m)))

    @classmethod
    def random(cls, m: int, rng: np.random.Generator) -> "ChainOrder":
        return cls(tuple(int(i) for i in rng.permutation(m)))


@dataclass(frozen=True)
class MultilabelModel:
    """A fitted transformation method.

    ``per_label_models[k]`` is the final-stage classifier for label k (in the
    dataset's label order). ``level1_models`` holds the full-data BR models
    that supply first-level predictions for DBR and STA; for BR, CC and NST it
    is empty (the chain classifiers themselves serve as the full-data
    predictors of earlier chain positions). ``oof_labels`` keeps the
    cross-fitted columns used during NST/STA training for inspection; it is
    diagnostic state and not persisted.
    """

    method: str
    base_spec: BaseLearnerSpec
    threshold: float
    label_names: tuple[str, ...]
    n_features: int
    per_label_models: tuple[BinaryModel, ...]
    level1_models: tuple[BinaryModel, ...] = ()
    chain_order: ChainOrder | None = None
    internal_cv_folds: int | None = None
    oof_labels: np.ndarray | None = None

    def __post_init__(self):
        if self.method not in METHOD_NAMES:
            raise UsageError(f"unknown method {self.method!r}")
        if not 0.0 < self.threshold < 1.0:
            raise UsageError("threshold must lie strictly between 0 and 1")
        m = len(self.label_names)
        p = self.n_features
        if len(self.per_label_models) != m:
            raise DimensionError("need one final-stage model per label")
        if self.method in ("CC", "NST"):
            if self.chain_order is None or len(self.chain_order) != m:
                raise UsageError(f"{self.method} requires a chain order over {m} labels")
            for position, label in enumerate(self.chain_order.order):
                expected = p + position
                got = self.per_label_models[label].input_dimension
                if got != expected:
                    raise DimensionError(
                        f"chain classifier for label {label} trains on {got} columns, "
                        f"expected {expected}")
        else:
            expected = {"BR": p, "DBR": p + m - 1, "STA": p + m}[self.method]
            for label, model in enumerate(self.per_label_models):
                if model.input_dimension != expected:
                    raise DimensionError(
                        f"{self.method} classifier for label {label} trains on "
                        f"{model.input_dimension} columns, expected {expected}")
        if self.method in ("DBR", "STA"):
            if len(self.level1_models) != m:
                raise DimensionError(f"{self.method} needs m first-level models")
            for model in self.level1_models:
                if model.input_dimension != p:
                    raise DimensionError("first-level models must train on the bare features")
        object.__setattr__(self, "label_names", tuple(self.label_names))
        object.__setattr__(self, "per_label_models", tuple(self.per_label_models))
        object.__setattr__(self, "level1_models", tuple(self.level1_models))

    @property
    def m(self) -> int:
        return len(self.label_names)


def _pmap(fn, items, workers: int):
    """Order-preserving map, on a thread pool when workers > 1."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cross_fit_labels(features: np.ndarray, target: np.ndarray, base: BaseLearnerSpec,
                     folds: int, seed: SeedLike, threshold: float = 0.5) -> np.ndarray:
    """Out-of-sample hard predictions for every row via internal k-fold CV.

    Row i is predicted by the model fitted on the folds that exclude i, so
    the returned column carries no training-row leakage.
    """
    n = target.shape[0]
    if folds > n:
        raise UsageError(f"internal folds ({folds}) exceed instances ({n})")
    assignment = kfold_split(n, folds, seed)
    out = np.empty(n, dtype=np.int64)
    for fold in range(folds):
        train = assignment.train_indices(fold)
        test = assignment.test_indices(fold)
        model = fit_binary(base, features[train], target[train])
        out[test] = predict_label(model, features[test], threshold)
    return out


def out_of_sample_labels(task: Task, base: BaseLearnerSpec, folds: int, seed: SeedLike,
                         target_column: int, augmenting_columns=()) -> np.ndarray:
    """Cross-fitted predictions of one label column of a task.

    ``augmenting_columns`` are indices of other label columns appended to the
    feature matrix before cross-fitting (the classic "predict one label from
    the features and some true labels" setup).
    """
    ds = task.dataset
    if not 0 <= target_column < ds.m:
        raise UsageError(f"target column {target_column} out of range")
    if folds < 2:
        raise UsageError("need at least 2 internal folds")
    features = ds.features
    if len(tuple(augmenting_columns)):
        features = np.hstack([features, ds.labels[:, list(augmenting_columns)].astype(np.float64)])
    return cross_fit_labels(features, ds.labels[:, target_column], base, folds, seed)


def fit_binary_relevance(task: Task, base: BaseLearnerSpec, threshold: float = 0.5,
                         workers: int = 1) -> MultilabelModel:
    """One independent classifier per label; no label ever acts as a feature."""
    ds = task.dataset
    models = _pmap(lambda k: fit_binary(base, ds.features, ds.labels[:, k]),
                   list(range(ds.m)), workers)
    return MultilabelModel(method="BR", base_spec=base, threshold=threshold,
                           label_names=ds.label_names, n_features=ds.p,
                           per_label_models=tuple(models))


def fit_classifier_chains(task: Task, base: BaseLearnerSpec,
                          order: ChainOrder | None = None,
                          threshold: float = 0.5) -> MultilabelModel:
    """Chained classifiers trained on the true labels of earlier positions."""
    ds = task.dataset
    order = order if order is not None else ChainOrder.identity(ds.m)
    if len(order) != ds.m:
        raise UsageError(f"chain order covers {len(order)} labels, task has {ds.m}")
    models: dict[int, BinaryModel] = {}
    augmented = ds.features
    for label in order.order:
        models[label] = fit_binary(base, augmented, ds.labels[:, label])
        augmented = np.hstack([augmented, ds.labels[:, [label]].astype(np.float64)])
    return MultilabelModel(method="CC", base_spec=base, threshold=threshold,
                           label_names=ds.label_names, n_features=ds.p,
                           per_label_models=tuple(models[k] for k in range(ds.m)),
                           chain_order=order)


def fit_nested_stacking(task: Task, base: BaseLearnerSpec,
                        order: ChainOrder | None = None, folds: int = 2,
                        seed: SeedLike = 0, threshold: float = 0.5) -> MultilabelModel:
    """CC's chain with cross-fitted predicted labels in place of true ones.

    Stage k first trains the full-data chain classifier on the features plus
    the previously generated out-of-sample columns, then (for every stage but
    the last) cross-fits the same design to produce the next out-of-sample
    column. One internal fold split, derived from the seed, is shared by all
    stages.
    """
    ds = task.dataset
    order = order if order is not None else ChainOrder.identity(ds.m)
    if len(order) != ds.m:
        raise UsageError(f"chain order covers {len(order)} labels, task has {ds.m}")
    if folds < 2:
        raise UsageError("need at least 2 internal folds")
    models: dict[int, BinaryModel] = {}
    augmented = ds.features
    oof_columns = []
    for position, label in enumerate(order.order):
        target = ds.labels[:, label]
        models[label] = fit_binary(base, augmented, target)
        if position < ds.m - 1:
            oof = cross_fit_labels(augmented, target, base, folds, seed, threshold)
            oof_columns.append(oof)
            augmented = np.hstack([augmented, oof[:, None].astype(np.float64)])
    oof_matrix = (np.column_stack(oof_columns) if oof_columns
                  else np.empty((ds.n, 0), dtype=np.int64))
    return MultilabelModel(method="NST", base_spec=base, threshold=threshold,
                           label_names=ds.label_names, n_features=ds.p,
                           per_label_models=tuple(models[k] for k in range(ds.m)),
                           chain_order=order, internal_cv_folds=folds,
                           oof_labels=oof_matrix)


def fit_dbr(task: Task, base: BaseLearnerSpec, threshold: float = 0.5,
            workers: int = 1) -> MultilabelModel:
    """Each label conditioned on the true values of all other labels.

    Also fits a full-data BR model with the same base learner; prediction
    runs BR first and feeds its hard labels into the per-label classifiers.
    """
    ds = task.dataset
    labels_float = ds.labels.astype(np.float64)

    def fit_meta(k: int) -> BinaryModel:
        others = [j for j in range(ds.m) if j != k]
        design = np.hstack([ds.features, labels_float[:, others]])
        return fit_binary(base, design, ds.labels[:, k])

    meta = _pmap(fit_meta, list(range(ds.m)), workers)
    level1 = fit_binary_relevance(task, base, threshold, workers).per_label_models
    return MultilabelModel(method="DBR", base_spec=base, threshold=threshold,
                           label_names=ds.label_names, n_features=ds.p,
                           per_label_models=tuple(meta), level1_models=level1)


def fit_stacking(task: Task, base: BaseLearnerSpec, folds: int = 2,
                 seed: SeedLike = 0, threshold: float = 0.5,
                 workers: int = 1) -> MultilabelModel:
    """Meta classifiers trained on cross-fitted BR predictions of all labels.

    The out-of-sample columns come from per-label cross-fitting on the bare
    features (first level = BR); each meta classifier sees the features plus
    all m predicted-label columns, its own included. A full-data BR model is
    stored for prediction time.
    """
    ds = task.dataset
    if folds < 2:
        raise UsageError("need at least 2 internal folds")
    oof_cols = _pmap(
        lambda k: cross_fit_labels(ds.features, ds.labels[:, k], base, folds, seed, threshold),
        list(range(ds.m)), workers)
    oof = np.column_stack(oof_cols)
    design = np.hstack([ds.features, oof.astype(np.float64)])
    meta = _pmap(lambda k: fit_binary(base, design, ds.labels[:, k]),
                 list(range(ds.m)), workers)
    level1 = fit_binary_relevance(task, base, threshold, workers).per_label_models
    return MultilabelModel(method="STA", base_spec=base, threshold=threshold,
                           label_names=ds.label_names, n_features=ds.p,
                           per_label_models=tuple(meta), level1_models=level1,
                           internal_cv_folds=folds, oof_labels=oof)


METHOD_FITTERS = {
    "BR": fit_binary_relevance,
    "CC": fit_classifier_chains,
    "NST": fit_nested_stacking,
    "DBR": fit_dbr,
    "STA": fit_stacking,
}


def fit_method(method: str, task: Task, base: BaseLearnerSpec, *,
               order: ChainOrder | None = None, folds: int = 2, seed: SeedLike = 0,
               threshold: float = 0.5, workers: int = 1) -> MultilabelModel:
    """Uniform entry point over the five fitters."""
    if method == "BR":
        return fit_binary_relevance(task, base, threshold, workers)
    if method == "CC":
        return fit_classifier_chains(task, base, order, threshold)
    if method == "NST":
        return fit_nested_stacking(task, base, order, folds, seed, threshold)
    if method == "DBR":
        return fit_dbr(task, base, threshold, workers)
    if method == "STA":
        return fit_stacking(task, base, folds, seed, threshold, workers)
    raise UsageError(f"unknown method {method!r}")


def predict_multilabel(model: MultilabelModel, features, truth=None,
                       workers: int = 1) -> PredictionSet:
    """Predict a probability matrix and thresholded hard labels.

    BR predicts labels independently; CC and NST predict recursively along
    the chain, feeding previously predicted hard labels forward; DBR and STA
    first produce hard BR predictions and then apply the per-label
    classifiers to the augmented rows.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError("feature matrix must be 2-d")
    if X.shape[1] != model.n_features:
        raise DimensionError(
            f"model was trained on {model.n_features} feature columns, got {X.shape[1]}")
    n, m = X.shape[0], model.m
    probs = np.empty((n, m), dtype=np.float64)

    if model.method == "BR":
        cols = _pmap(lambda k: predict_prob(model.per_label_models[k], X),
                     list(range(m)), workers)
        for k, col in enumerate(cols):
            probs[:, k] = col
    elif model.method in ("CC", "NST"):
        augmented = X
        for label in model.chain_order.order:
            p = predict_prob(model.per_label_models[label], augmented)
            probs[:, label] = p
            hard = (p >= model.threshold).astype(np.float64)
            augmented = np.hstack([augmented, hard[:, None]])
    else:  # DBR, STA
        level1_cols = _pmap(lambda k: predict_prob(model.level1_models[k], X),
                            list(range(m)), workers)
        level1_hard = (np.column_stack(level1_cols) >= model.threshold).astype(np.float64)

        def meta_col(k: int) -> np.ndarray:
            if model.method == "DBR":
                others = [j for j in range(m) if j != k]
                design = np.hstack([X, level1_hard[:, others]])
            else:
                design = np.hstack([X, level1_hard])
            return predict_prob(model.per_label_models[k], design)

        for k, col in enumerate(_pmap(meta_col, list(range(m)), workers)):
            probs[:, k] = col

    predicted = (probs >= model.threshold).astype(np.int64)
    return PredictionSet(probs=probs, predicted=predicted,
                         label_names=model.label_names,
                         threshold=model.threshold, truth=truth)
