"""Binary base learners consumed by the transformation methods.

Every learner fits a 2-d float feature matrix against a 0/1 target vector and
predicts class-1 probabilities. Three real learners (featureless, logistic
regression, CART-style tree) cover the baseline-to-nonlinear range; three mock
learners (constant, recorder, memorizer) exist for tests of the wrapping
machinery.

A constant training target short-circuits every learner to a constant
predictor of that class, so internal cross-fits on one-class folds never
abort.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DimensionError, UsageError

LEARNER_KINDS = ("featureless", "logistic", "tree",
                 "mock_constant", "mock_recorder", "mock_memorizer")

_DEFAULTS = {
    "featureless": {},
    "logistic": {"learning_rate": 0.1, "iterations": 1000, "regularization": 1e-4},
    "tree": {"max_depth": 8, "min_split": 5},
    "mock_constant": {"value": 1},
    "mock_recorder": {"record_to": None},
    "mock_memorizer": {"unseen_probability": None},
}


def _validate_hyperparameters(kind: str, params: dict) -> dict:
    defaults = _DEFAULTS[kind]
    unknown = set(params) - set(defaults)
    if unknown:
        raise UsageError(f"unknown hyperparameters for {kind}: {sorted(unknown)}")
    merged = {**defaults, **params}
    if kind == "logistic":
        if merged["learning_rate"] <= 0:
            raise UsageError("learning_rate must be positive")
        if int(merged["iterations"]) < 1:
            raise UsageError("iterations must be at least 1")
        if merged["regularization"] < 0:
            raise UsageError("regularization must be nonnegative")
        merged["iterations"] = int(merged["iterations"])
    elif kind == "tree":
        if int(merged["max_depth"]) < 1:
            raise UsageError("max_depth must be at least 1")
        if int(merged["min_split"]) < 2:
            raise UsageError("min_split must be at least 2")
        merged["max_depth"] = int(merged["max_depth"])
        merged["min_split"] = int(merged["min_split"])
    elif kind == "mock_constant":
        if merged["value"] not in (0, 1):
            raise UsageError("mock_constant value must be 0 or 1")
    elif kind == "mock_memorizer":
        u = merged["unseen_probability"]
        if u is not None and not 0.0 <= float(u) <= 1.0:
            raise UsageError("unseen_probability must lie in [0, 1]")
    return merged


@dataclass(frozen=True)
class BaseLearnerSpec:
    """Recipe for constructing a binary learner: kind plus hyperparameters."""

    kind: str
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in LEARNER_KINDS:
            raise UsageError(f"unknown learner kind {self.kind!r}")
        object.__setattr__(self, "hyperparameters",
                           _validate_hyperparameters(self.kind, dict(self.hyperparameters)))


@dataclass(frozen=True)
class BinaryModel:
    """A fitted binary classifier: spec, input width and opaque state."""

    spec: BaseLearnerSpec
    input_dimension: int
    fitted_state: Any
    train_positive_rate: float


# ---------------------------------------------------------------------------
# fitted states


@dataclass(frozen=True)
class ConstantState:
    probability: float


@dataclass(frozen=True)
class FeaturelessState:
    rate: float


@dataclass(frozen=True)
class LogisticState:
    mean: np.ndarray       # per-column training mean
    scale: np.ndarray      # per-column training sd, zero-sd columns excluded
    keep: np.ndarray       # bool mask of columns entering the linear term
    weights: np.ndarray
    bias: float


@dataclass(frozen=True)
class TreeNode:
    """Leaf when ``feature`` is None, else a `x <= threshold` split."""

    probability: float
    feature: int | None = None
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None


@dataclass(frozen=True)
class MemorizerState:
    table: dict            # feature-row bytes -> memorized target
    fallback: float        # probability for unseen rows


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def logistic_loss_and_gradient(weights: np.ndarray, bias: float, features: np.ndarray,
                               target: np.ndarray, regularization: float):
    """Mean cross-entropy with an L2 penalty on the weights (bias unpenalized).

    Returns ``(loss, grad_weights, grad_bias)``. Computed via the softplus
    form, so it stays finite for extreme scores.
    """
    z = features @ weights + bias
    # log(1 + e^z) - y*z, evaluated stably
    loss = float(np.mean(np.logaddexp(0.0, z) - target * z)
                 + 0.5 * regularization * np.dot(weights, weights))
    residual = sigmoid(z) - target
    grad_w = features.T @ residual / features.shape[0] + regularization * weights
    grad_b = float(residual.mean())
    return loss, grad_w, grad_b


def _fit_logistic(X: np.ndarray, y: np.ndarray, params: dict) -> LogisticState:
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    keep = scale > 0.0
    Xs = (X[:, keep] - mean[keep]) / scale[keep]
    weights = np.zeros(int(keep.sum()))
    bias = 0.0
    lr = params["learning_rate"]
    reg = params["regularization"]
    for _ in range(params["iterations"]):
        _, grad_w, grad_b = logistic_loss_and_gradient(weights, bias, Xs, y, reg)
        weights = weights - lr * grad_w
        bias = bias - lr * grad_b
    for arr in (mean, scale, keep, weights):
        arr.setflags(write=False)
    return LogisticState(mean=mean, scale=scale, keep=keep, weights=weights, bias=bias)


def _gini(pos: float, total: float) -> float:
    if total == 0:
        return 0.0
    q = pos / total
    return 2.0 * q * (1.0 - q)


def _best_split(X: np.ndarray, y: np.ndarray):
    """Best Gini split over all features and midpoints, or None.

    Ties go to the earliest feature and lowest threshold; a zero-gain split is
    still returned so patterns like XOR remain reachable at depth 2.
    """
    n = y.shape[0]
    parent = _gini(float(y.sum()), n)
    best = None  # (gain, feature, threshold)
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        ys = y[order]
        cut = np.flatnonzero(np.diff(xs) > 0) + 1  # first index of each new value
        if cut.size == 0:
            continue
        pos_left = np.cumsum(ys)[cut - 1].astype(np.float64)
        n_left = cut.astype(np.float64)
        n_right = n - n_left
        pos_right = float(y.sum()) - pos_left
        q_left = pos_left / n_left
        q_right = pos_right / n_right
        child = (n_left * 2 * q_left * (1 - q_left)
                 + n_right * 2 * q_right * (1 - q_right)) / n
        gains = parent - child
        i = int(np.argmax(gains))
        gain = float(gains[i])
        threshold = float((xs[cut[i] - 1] + xs[cut[i]]) / 2.0)
        if best is None or gain > best[0] + 1e-12:
            best = (gain, j, threshold)
    return best


def _grow_tree(X: np.ndarray, y: np.ndarray, depth: int, params: dict) -> TreeNode:
    probability = float(y.mean())
    if (depth >= params["max_depth"] or y.shape[0] < params["min_split"]
            or probability in (0.0, 1.0)):
        return TreeNode(probability=probability)
    split = _best_split(X, y)
    if split is None:
        return TreeNode(probability=probability)
    _, feature, threshold = split
    mask = X[:, feature] <= threshold
    return TreeNode(
        probability=probability,
        feature=feature,
        threshold=threshold,
        left=_grow_tree(X[mask], y[mask], depth + 1, params),
        right=_grow_tree(X[~mask], y[~mask], depth + 1, params),
    )


def _tree_predict(node: TreeNode, X: np.ndarray, out: np.ndarray, rows: np.ndarray):
    if node.feature is None:
        out[rows] = node.probability
        return
    mask = X[rows, node.feature] <= node.threshold
    _tree_predict(node.left, X, out, rows[mask])
    _tree_predict(node.right, X, out, rows[~mask])


def _as_matrix(features) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError("feature matrix must be 2-d")
    return X


def fit_binary(spec: BaseLearnerSpec, features, target) -> BinaryModel:
    """Fit one binary classifier. Constant targets yield a constant predictor."""
    X = _as_matrix(features)
    y = np.asarray(target, dtype=np.float64).ravel()
    if X.shape[0] != y.shape[0]:
        raise DimensionError(
            f"{X.shape[0]} feature rows vs {y.shape[0]} targets")
    if y.shape[0] < 1:
        raise DimensionError("cannot fit on an empty dataset")
    if not np.isin(y, (0.0, 1.0)).all():
        raise UsageError("binary target must contain only 0 and 1")
    rate = float(y.mean())
    params = spec.hyperparameters

    if spec.kind == "mock_recorder" and params["record_to"] is not None:
        params["record_to"].append(X.shape[1])

    if spec.kind == "mock_constant":
        state: Any = ConstantState(float(params["value"]))
    elif y.min() == y.max():
        state = ConstantState(float(y[0]))
    elif spec.kind in ("featureless", "mock_recorder"):
        state = FeaturelessState(rate)
    elif spec.kind == "logistic":
        state = _fit_logistic(X, y, params)
    elif spec.kind == "tree":
        state = _grow_tree(X, y, 0, params)
    elif spec.kind == "mock_memorizer":
        unseen = params["unseen_probability"]
        table = {X[i].tobytes(): float(y[i]) for i in range(X.shape[0])}
        state = MemorizerState(table=table,
                               fallback=rate if unseen is None else float(unseen))
    else:  # pragma: no cover - kinds are validated at spec construction
        raise UsageError(f"unknown learner kind {spec.kind!r}")
    return BinaryModel(spec=spec, input_dimension=X.shape[1],
                       fitted_state=state, train_positive_rate=rate)


def predict_prob(model: BinaryModel, features) -> np.ndarray:
    """Class-1 probability per row; deterministic given the model."""
    X = _as_matrix(features)
    if X.shape[1] != model.input_dimension:
        raise DimensionError(
            f"model expects {model.input_dimension} columns, got {X.shape[1]}")
    state = model.fitted_state
    if isinstance(state, ConstantState):
        return np.full(X.shape[0], state.probability)
    if isinstance(state, FeaturelessState):
        return np.full(X.shape[0], state.rate)
    if isinstance(state, LogisticState):
        Xs = (X[:, state.keep] - state.mean[state.keep]) / state.scale[state.keep]
        return sigmoid(Xs @ state.weights + state.bias)
    if isinstance(state, TreeNode):
        out = np.empty(X.shape[0])
        _tree_predict(state, X, out, np.arange(X.shape[0]))
        return out
    if isinstance(state, MemorizerState):
        return np.array([state.table.get(X[i].tobytes(), state.fallback)
                         for i in range(X.shape[0])])
    raise UsageError(f"cannot predict with state {type(state).__name__}")


def predict_label(model: BinaryModel, features, threshold: float = 0.5) -> np.ndarray:
    """Hard 0/1 labels: 1 iff probability >= threshold."""
    if not 0.0 < threshold < 1.0:
        raise UsageError(f"threshold must lie strictly between 0 and 1, got {threshold}")
    return (predict_prob(model, features) >= threshold).astype(np.int64)
