"""Multilabel performance measures and per-label binary performances.

All six multilabel measures are per-instance quantities averaged over the
test set. Zero-denominator conventions (an instance with an empty true or
predicted label set) follow the package-wide policy:

* both sets empty -> the instance scores 1 (vacuous agreement) for accuracy,
  recall and F1;
* recall with an empty true set but nonempty prediction -> 0;
* precision is undefined on any instance with an empty prediction; the
  default "strict" policy reports the aggregate as undefined (NA) whenever
  such an instance exists, while "skip_undefined" averages the remaining
  instances and reports the skipped count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, UsageError

MEASURE_NAMES = ("subset01", "hamming", "accuracy", "precision", "recall", "f1")

# True for measures where larger is better (scores); False for losses.
HIGHER_IS_BETTER = {
    "subset01": False,
    "hamming": False,
    "accuracy": True,
    "precision": True,
    "recall": True,
    "f1": True,
}

PRECISION_POLICIES = ("strict", "skip_undefined")


@dataclass(frozen=True)
class PredictionSet:
    """Probabilities and thresholded hard labels, optionally with the truth."""

    probs: np.ndarray               # (n, m) floats in [0, 1]
    predicted: np.ndarray           # (n, m) ints in {0, 1}
    label_names: tuple[str, ...]
    threshold: float = 0.5
    truth: np.ndarray | None = None

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        predicted = np.asarray(self.predicted, dtype=np.int64)
        if probs.ndim != 2 or predicted.shape != probs.shape:
            raise DimensionError("probs and predicted must be matrices of equal shape")
        if probs.shape[1] != len(self.label_names):
            raise DimensionError("label_names length does not match matrix width")
        if not 0.0 < self.threshold < 1.0:
            raise UsageError("threshold must lie strictly between 0 and 1")
        if probs.size and (not np.isfinite(probs).all()
                           or probs.min() < 0.0 or probs.max() > 1.0):
            raise UsageError("probabilities must lie in [0, 1]")
        if not np.array_equal(predicted, (probs >= self.threshold).astype(np.int64)):
            raise UsageError("predicted matrix is not probs thresholded at the stated threshold")
        truth = self.truth
        if truth is not None:
            truth = np.asarray(truth, dtype=np.int64)
            if truth.shape != probs.shape:
                raise DimensionError("truth shape does not match predictions")
            if not np.isin(truth, (0, 1)).all():
                raise UsageError("truth entries must be 0 or 1")
            truth.setflags(write=False)
        probs.setflags(write=False)
        predicted.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "predicted", predicted)
        object.__setattr__(self, "truth", truth)
        object.__setattr__(self, "label_names", tuple(self.label_names))

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def m(self) -> int:
        return self.probs.shape[1]

    @classmethod
    def from_hard(cls, predicted, label_names, truth=None, threshold: float = 0.5):
        """Wrap a bare 0/1 prediction matrix (probabilities set to the labels)."""
        predicted = np.asarray(predicted, dtype=np.int64)
        return cls(probs=predicted.astype(np.float64), predicted=predicted,
                   label_names=tuple(label_names), threshold=threshold, truth=truth)

    def with_truth(self, truth) -> "PredictionSet":
        return PredictionSet(probs=self.probs, predicted=self.predicted,
                             label_names=self.label_names, threshold=self.threshold,
                             truth=truth)


@dataclass(frozen=True)
class MeasureValue:
    """Aggregate measure value; ``value`` is None when undefined (NA)."""

    measure: str
    value: float | None
    n_undefined_instances: int = 0


def _require_truth(pred: PredictionSet) -> np.ndarray:
    if pred.truth is None:
        raise UsageError("measure needs a PredictionSet with truth attached")
    return pred.truth


def _instance_counts(pred: PredictionSet):
    truth = _require_truth(pred)
    yhat = pred.predicted
    intersection = np.logical_and(truth == 1, yhat == 1).sum(axis=1)
    union = np.logical_or(truth == 1, yhat == 1).sum(axis=1)
    true_size = truth.sum(axis=1)
    pred_size = yhat.sum(axis=1)
    return intersection, union, true_size, pred_size


def subset01_loss(pred: PredictionSet) -> float:
    """Fraction of instances whose full label vector is not exactly right."""
    truth = _require_truth(pred)
    return float(np.any(truth != pred.predicted, axis=1).mean())


def hamming_loss(pred: PredictionSet) -> float:
    """Mean fraction of incorrectly predicted label slots per instance."""
    truth = _require_truth(pred)
    return float((truth != pred.predicted).mean(axis=1).mean())


def accuracy_score(pred: PredictionSet) -> MeasureValue:
    """Jaccard index |y & yhat| / |y | yhat|, both-empty instances score 1."""
    intersection, union, _, _ = _instance_counts(pred)
    scores = np.where(union > 0, intersection / np.maximum(union, 1), 1.0)
    return MeasureValue("accuracy", float(scores.mean()))


def precision_score(pred: PredictionSet, policy: str = "strict") -> MeasureValue:
    """|y & yhat| / |yhat|; undefined on instances predicting no label."""
    if policy not in PRECISION_POLICIES:
        raise UsageError(f"unknown precision policy {policy!r}")
    intersection, _, _, pred_size = _instance_counts(pred)
    defined = pred_size > 0
    n_undefined = int((~defined).sum())
    if n_undefined and policy == "strict":
        return MeasureValue("precision", None, n_undefined)
    if not defined.any():
        return MeasureValue("precision", None, n_undefined)
    scores = intersection[defined] / pred_size[defined]
    return MeasureValue("precision", float(scores.mean()), n_undefined)


def recall_score(pred: PredictionSet) -> MeasureValue:
    """|y & yhat| / |y|; both-empty scores 1, empty-truth-only scores 0."""
    intersection, _, true_size, pred_size = _instance_counts(pred)
    scores = np.where(true_size > 0, intersection / np.maximum(true_size, 1),
                      np.where(pred_size == 0, 1.0, 0.0))
    return MeasureValue("recall", float(scores.mean()))


def f1_score(pred: PredictionSet) -> MeasureValue:
    """2 |y & yhat| / (|y| + |yhat|); both-empty instances score 1."""
    intersection, _, true_size, pred_size = _instance_counts(pred)
    denom = true_size + pred_size
    scores = np.where(denom > 0, 2.0 * intersection / np.maximum(denom, 1), 1.0)
    return MeasureValue("f1", float(scores.mean()))


def compute_measure(name: str, pred: PredictionSet,
                    precision_policy: str = "strict") -> MeasureValue:
    if name == "subset01":
        return MeasureValue("subset01", subset01_loss(pred))
    if name == "hamming":
        return MeasureValue("hamming", hamming_loss(pred))
    if name == "accuracy":
        return accuracy_score(pred)
    if name == "precision":
        return precision_score(pred, policy=precision_policy)
    if name == "recall":
        return recall_score(pred)
    if name == "f1":
        return f1_score(pred)
    raise UsageError(f"unknown measure {name!r}")


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Fractional ranks (1-based); tied values share the mean of their ranks."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < sorted_vals.shape[0]:
        j = i
        while j + 1 < sorted_vals.shape[0] and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auc_score(probs: np.ndarray, truth: np.ndarray) -> float | None:
    """Normalized Mann-Whitney U of the scores; ties weigh 1/2 per pair.

    Returns None when the truth column has a single class.
    """
    probs = np.asarray(probs, dtype=np.float64)
    truth = np.asarray(truth)
    n_pos = int((truth == 1).sum())
    n_neg = int((truth == 0).sum())
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = _average_ranks(probs)
    u = ranks[truth == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


BINARY_MEASURES = ("acc", "mmce", "auc")


def binary_label_performance(pred: PredictionSet,
                             measures=BINARY_MEASURES) -> dict[str, dict[str, float | None]]:
    """Accuracy, mean misclassification error and/or AUC for each label.

    AUC is None for labels whose truth column is one-class.
    """
    truth = _require_truth(pred)
    unknown = set(measures) - set(BINARY_MEASURES)
    if unknown:
        raise UsageError(f"unknown binary measures: {sorted(unknown)}")
    table: dict[str, dict[str, float | None]] = {}
    for k, name in enumerate(pred.label_names):
        acc = float((truth[:, k] == pred.predicted[:, k]).mean())
        row: dict[str, float | None] = {}
        for measure in measures:
            if measure == "acc":
                row["acc"] = acc
            elif measure == "mmce":
                row["mmce"] = 1.0 - acc
            elif measure == "auc":
                row["auc"] = auc_score(pred.probs[:, k], truth[:, k])
        table[name] = row
    return table
