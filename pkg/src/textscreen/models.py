"""Classifiers trained by plain mini-batch gradient descent.

Three scorers share one optimizer contract: logistic regression over sparse
features, a one-hidden-layer ReLU MLP, and a linear head over dense
embeddings. The objective is mean binary cross-entropy plus an L2 penalty
on weights (never biases). No adaptive optimizer: a fixed learning rate and
a seeded per-epoch shuffle keep every run bitwise reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.special import expit

from .corpus import CONTROL, DIAGNOSED
from .features import FeatureVector, stack_vectors

MODEL_FORMAT_VERSION = 1

KIND_LOGISTIC = "logistic"
KIND_MLP = "mlp"
KIND_HEAD = "embedding_head"


class ModelError(Exception):
    """Raised for dimension mismatches, bad labels, and file problems."""


class DegenerateDataError(ModelError):
    """Raised when training data contains a single class."""


class DivergenceError(ModelError):
    """Raised when the training loss stops being finite."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    learning_rate: float = 0.1
    batch_size: int = 32
    l2_penalty: float = 1e-4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ModelError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ModelError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ModelError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.l2_penalty < 0:
            raise ModelError(f"l2_penalty must be >= 0, got {self.l2_penalty}")
        if self.seed < 0:
            raise ModelError(f"seed must be an unsigned integer, got {self.seed}")


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float

    @property
    def dimension(self) -> int:
        return len(self.weights)


@dataclass
class MlpModel:
    hidden_weights: np.ndarray  # (hidden, dim)
    hidden_bias: np.ndarray
    output_weights: np.ndarray
    output_bias: float

    @property
    def dimension(self) -> int:
        return self.hidden_weights.shape[1]


@dataclass
class EmbeddingHead:
    weights: np.ndarray
    bias: float
    embedding_dim: int

    @property
    def dimension(self) -> int:
        return self.embedding_dim


def labels_to_targets(labels) -> np.ndarray:
    """Map class labels to {0.0, 1.0} with diagnosed as the positive class."""
    targets = np.empty(len(labels))
    for i, label in enumerate(labels):
        if label == DIAGNOSED:
            targets[i] = 1.0
        elif label == CONTROL:
            targets[i] = 0.0
        else:
            raise ModelError(f"unknown label {label!r}")
    return targets


def _check_both_classes(y: np.ndarray) -> None:
    if len(np.unique(y)) < 2:
        raise DegenerateDataError("training data contains a single class")


def _bce(z: np.ndarray, y: np.ndarray) -> float:
    # log(1+exp(z)) - y*z, written to stay finite for large |z|
    return float(np.mean(np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))))


def linear_gradients(w: np.ndarray, b: float, X, y: np.ndarray, l2: float):
    """Analytic gradient and regularized loss of the logistic objective.

    Shared by logistic regression and the embedding head; X may be a dense
    matrix or CSR.
    """
    z = X @ w + b
    p = expit(z)
    r = (p - y) / len(y)
    grad_w = X.T @ r + l2 * w
    grad_b = float(np.sum(r))
    loss = _bce(z, y) + 0.5 * l2 * float(np.dot(w, w))
    return grad_w, grad_b, loss


def mlp_init(dim: int, hidden_units: int, rng: np.random.Generator):
    """Seeded init: weights uniform in +/-1/sqrt(fan_in), biases zero."""
    bound1 = 1.0 / np.sqrt(dim)
    bound2 = 1.0 / np.sqrt(hidden_units)
    return (
        rng.uniform(-bound1, bound1, size=(hidden_units, dim)),
        np.zeros(hidden_units),
        rng.uniform(-bound2, bound2, size=hidden_units),
        0.0,
    )


def mlp_gradients(params, X, y: np.ndarray, l2: float):
    """Backpropagation gradients and regularized loss for the one-layer MLP."""
    w1, b1, w2, b2 = params
    pre = X @ w1.T + b1
    hidden = np.maximum(pre, 0.0)
    z = hidden @ w2 + b2
    p = expit(z)
    dz = (p - y) / len(y)
    grad_w2 = hidden.T @ dz + l2 * w2
    grad_b2 = float(np.sum(dz))
    dhidden = np.outer(dz, w2) * (pre > 0.0)
    grad_w1 = (X.T @ dhidden).T + l2 * w1
    grad_b1 = dhidden.sum(axis=0)
    loss = (
        _bce(z, y)
        + 0.5 * l2 * (float(np.sum(w1 * w1)) + float(np.dot(w2, w2)))
    )
    return (grad_w1, grad_b1, grad_w2, grad_b2), loss


def _epoch_batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def _train_linear(X, y: np.ndarray, cfg: TrainConfig):
    n, dim = X.shape
    rng = np.random.default_rng(cfg.seed)
    w = np.zeros(dim)
    b = 0.0
    # overflow is not an error here: it surfaces as a non-finite epoch loss,
    # which the divergence check turns into a loud failure
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, cfg.epochs + 1):
            for idx in _epoch_batches(n, cfg.batch_size, rng):
                grad_w, grad_b, _ = linear_gradients(w, b, X[idx], y[idx], cfg.l2_penalty)
                w = w - cfg.learning_rate * grad_w
                b = b - cfg.learning_rate * grad_b
            _, _, loss = linear_gradients(w, b, X, y, cfg.l2_penalty)
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"training diverged at epoch {epoch}: loss is not finite"
                )
    return w, b


def _split_pairs(train):
    inputs = [x for x, _ in train]
    labels = [label for _, label in train]
    return inputs, labels_to_targets(labels)


def _stack_features(inputs) -> sparse.csr_matrix:
    for x in inputs:
        if not isinstance(x, FeatureVector):
            raise ModelError("expected FeatureVector inputs")
    return stack_vectors(inputs)


def train_logistic(train, cfg: TrainConfig) -> LogisticModel:
    """Fit logistic regression on (FeatureVector, label) pairs."""
    if not train:
        raise ModelError("training data is empty")
    inputs, y = _split_pairs(train)
    _check_both_classes(y)
    X = _stack_features(inputs)
    w, b = _train_linear(X, y, cfg)
    return LogisticModel(weights=w, bias=b)


def train_mlp(train, hidden_units: int, cfg: TrainConfig) -> MlpModel:
    """Fit the one-hidden-layer ReLU MLP on (FeatureVector, label) pairs."""
    if not train:
        raise ModelError("training data is empty")
    if hidden_units < 1:
        raise ModelError(f"hidden_units must be >= 1, got {hidden_units}")
    inputs, y = _split_pairs(train)
    _check_both_classes(y)
    X = _stack_features(inputs)
    n, dim = X.shape
    rng = np.random.default_rng(cfg.seed)
    params = mlp_init(dim, hidden_units, rng)
    # see _train_linear: overflow feeds the divergence check, don't warn
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, cfg.epochs + 1):
            for idx in _epoch_batches(n, cfg.batch_size, rng):
                grads, _ = mlp_gradients(params, X[idx], y[idx], cfg.l2_penalty)
                params = tuple(p - cfg.learning_rate * g for p, g in zip(params, grads))
            _, loss = mlp_gradients(params, X, y, cfg.l2_penalty)
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"training diverged at epoch {epoch}: loss is not finite"
                )
    w1, b1, w2, b2 = params
    return MlpModel(hidden_weights=w1, hidden_bias=b1, output_weights=w2, output_bias=float(b2))


def train_embedding_head(train, cfg: TrainConfig) -> EmbeddingHead:
    """Fit the linear head on (dense embedding, label) pairs."""
    if not train:
        raise ModelError("training data is empty")
    inputs, y = _split_pairs(train)
    dims = {len(np.atleast_1d(x)) for x in inputs}
    if len(dims) != 1:
        raise ModelError(f"mixed embedding dimensions: {sorted(dims)}")
    _check_both_classes(y)
    X = np.array([np.asarray(x, dtype=float) for x in inputs])
    w, b = _train_linear(X, y, cfg)
    return EmbeddingHead(weights=w, bias=b, embedding_dim=X.shape[1])


def _decision(model, x) -> float:
    if isinstance(model, (LogisticModel, EmbeddingHead)):
        if isinstance(x, FeatureVector):
            if x.dimension != model.dimension:
                raise ModelError(
                    f"input dimension {x.dimension} != model dimension {model.dimension}"
                )
            return float(model.weights[x.indices] @ x.values) + model.bias
        vec = np.asarray(x, dtype=float)
        if vec.shape != (model.dimension,):
            raise ModelError(
                f"input dimension {vec.shape} != model dimension {model.dimension}"
            )
        return float(vec @ model.weights) + model.bias
    if isinstance(model, MlpModel):
        if isinstance(x, FeatureVector):
            if x.dimension != model.dimension:
                raise ModelError(
                    f"input dimension {x.dimension} != model dimension {model.dimension}"
                )
            pre = model.hidden_weights[:, x.indices] @ x.values + model.hidden_bias
        else:
            vec = np.asarray(x, dtype=float)
            if vec.shape != (model.dimension,):
                raise ModelError(
                    f"input dimension {vec.shape} != model dimension {model.dimension}"
                )
            pre = model.hidden_weights @ vec + model.hidden_bias
        hidden = np.maximum(pre, 0.0)
        return float(hidden @ model.output_weights) + model.output_bias
    raise ModelError(f"unknown model type {type(model).__name__}")


def predict_proba(model, x) -> float:
    """Probability of the diagnosed class for one input."""
    return float(expit(_decision(model, x)))


def predict_proba_batch(model, X) -> np.ndarray:
    """Probabilities for a feature matrix (CSR or dense), one row per input."""
    if isinstance(model, (LogisticModel, EmbeddingHead)):
        if X.shape[1] != model.dimension:
            raise ModelError(
                f"input dimension {X.shape[1]} != model dimension {model.dimension}"
            )
        return expit(X @ model.weights + model.bias)
    if isinstance(model, MlpModel):
        if X.shape[1] != model.dimension:
            raise ModelError(
                f"input dimension {X.shape[1]} != model dimension {model.dimension}"
            )
        hidden = np.maximum(X @ model.hidden_weights.T + model.hidden_bias, 0.0)
        return expit(hidden @ model.output_weights + model.output_bias)
    raise ModelError(f"unknown model type {type(model).__name__}")


def save_model(model, path, config: TrainConfig | None = None, extra: dict | None = None) -> None:
    """Write a versioned JSON snapshot: dimension, config echo, parameters."""
    if isinstance(model, LogisticModel):
        kind, params = KIND_LOGISTIC, {
            "weights": model.weights.tolist(),
            "bias": model.bias,
        }
    elif isinstance(model, MlpModel):
        kind, params = KIND_MLP, {
            "hidden_weights": model.hidden_weights.tolist(),
            "hidden_bias": model.hidden_bias.tolist(),
            "output_weights": model.output_weights.tolist(),
            "output_bias": model.output_bias,
        }
    elif isinstance(model, EmbeddingHead):
        kind, params = KIND_HEAD, {
            "weights": model.weights.tolist(),
            "bias": model.bias,
        }
    else:
        raise ModelError(f"unknown model type {type(model).__name__}")
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": kind,
        "dimension": model.dimension,
        "config": None if config is None else config.__dict__,
        "extra": extra or {},
        "params": params,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path):
    """Load a model snapshot; any version or kind mismatch fails loudly."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelError(
            f"{path}: unsupported model format version {version!r}; "
            f"expected {MODEL_FORMAT_VERSION}"
        )
    kind = payload.get("kind")
    params = payload.get("params", {})
    if kind == KIND_LOGISTIC:
        model = LogisticModel(
            weights=np.asarray(params["weights"], dtype=float), bias=float(params["bias"])
        )
    elif kind == KIND_MLP:
        model = MlpModel(
            hidden_weights=np.asarray(params["hidden_weights"], dtype=float),
            hidden_bias=np.asarray(params["hidden_bias"], dtype=float),
            output_weights=np.asarray(params["output_weights"], dtype=float),
            output_bias=float(params["output_bias"]),
        )
    elif kind == KIND_HEAD:
        model = EmbeddingHead(
            weights=np.asarray(params["weights"], dtype=float),
            bias=float(params["bias"]),
            embedding_dim=int(payload["dimension"]),
        )
    else:
        raise ModelError(f"{path}: unknown model kind {kind!r}")
    if model.dimension != payload.get("dimension"):
        raise ModelError(f"{path}: dimension field does not match parameters")
    return model
