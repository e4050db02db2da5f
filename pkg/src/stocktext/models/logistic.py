"""Multinomial logistic regression trained by full-batch gradient descent.

Objective for n samples, weights ``W`` of shape K x (V+1) (last column is
the bias)::

    mean_i(-log softmax(W x_i)[y_i]) + lam / (2n) * ||W[:, :V]||^2

The bias is not penalised, so heavy regularisation drives predictions to
the class priors rather than to a uniform guess. ``lam / n`` mirrors the
usual ``C = 1 / lam`` parameterisation of summed-loss solvers.
"""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..errors import PipelineRuntimeError, ValidationError
from ._common import as_csr, canonical_order, label_indices, resolve_classes

log = logging.getLogger(__name__)


class DivergedError(PipelineRuntimeError):
    def __init__(self, iteration: int, loss: float):
        super().__init__(f"training diverged at iteration {iteration} (loss={loss})")
        self.iteration = iteration


@dataclass(frozen=True)
class LRConfig:
    step_size: float = 0.1
    max_iter: int = 1000
    tol: float = 1e-6
    lam: float = 1.0
    clip_step: bool = True
    # zero initialisation is deterministic; the seed is carried for provenance
    seed: int = 0

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValidationError(f"step_size must be > 0, got {self.step_size}")
        if self.max_iter < 0:
            raise ValidationError(f"max_iter must be >= 0, got {self.max_iter}")
        if self.lam < 0:
            raise ValidationError(f"lam must be >= 0, got {self.lam}")


@dataclass(frozen=True, eq=False)
class LogisticModel:
    classes: tuple[int, ...]
    weights: np.ndarray
    config: LRConfig = LRConfig()
    final_loss: float = float("nan")
    n_iter: int = 0
    effective_step: float = float("nan")
    loss_history: tuple[float, ...] = ()

    @classmethod
    def zeros(cls, classes: Sequence[int], n_features: int, config: LRConfig = LRConfig()) -> "LogisticModel":
        return cls(tuple(classes), np.zeros((len(classes), n_features + 1)), config)

    @property
    def n_features(self) -> int:
        return self.weights.shape[1] - 1

    def scores(self, X) -> np.ndarray:
        X = as_csr(X)
        if X.shape[1] != self.n_features:
            raise ValidationError(f"expected {self.n_features} features, got {X.shape[1]}")
        return np.asarray(X @ self.weights[:, :-1].T) + self.weights[:, -1]

    def predict_proba(self, X) -> np.ndarray:
        z = self.scores(X)
        z -= z.max(axis=1, keepdims=True)
        p = np.exp(z)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return np.asarray(self.classes)[np.argmax(self.scores(X), axis=1)]


def _objective(W: np.ndarray, X: sp.csr_matrix, yi: np.ndarray, lam: float) -> tuple[float, np.ndarray]:
    n = X.shape[0]
    z = np.asarray(X @ W[:, :-1].T) + W[:, -1]
    z -= z.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    log_p = z - lse[:, None]
    reg = W.copy()
    reg[:, -1] = 0.0
    loss = -log_p[np.arange(n), yi].mean() + lam / (2 * n) * float(np.sum(reg * reg))
    resid = np.exp(log_p)
    resid[np.arange(n), yi] -= 1.0
    grad = np.empty_like(W)
    grad[:, :-1] = np.asarray(X.T @ resid).T / n
    grad[:, -1] = resid.sum(axis=0) / n
    grad += (lam / n) * reg
    return float(loss), grad


def loss_and_gradient(model: LogisticModel, X, y: Sequence[int]) -> tuple[float, np.ndarray]:
    """Regularised mean cross-entropy of ``model`` on (X, y) and its gradient
    with respect to ``model.weights``."""
    X = as_csr(X)
    y = np.asarray(y)
    if X.shape[1] != model.n_features:
        raise ValidationError(f"X has {X.shape[1]} features, model expects {model.n_features}")
    if X.shape[0] != len(y) or len(y) == 0:
        raise ValidationError(f"X has {X.shape[0]} rows but y has {len(y)} labels")
    return _objective(model.weights, X, label_indices(y, model.classes), model.config.lam)


def stable_step_bound(X, lam: float) -> float:
    """Step size under which gradient descent cannot increase the loss.

    Returns 1/L for the smoothness bound
    ``L = 0.5 * ||[X, 1]||_F^2 / n + lam / n``.
    """
    X = as_csr(X)
    n = X.shape[0]
    sq_norm = float(X.multiply(X).sum()) + n
    return 1.0 / (0.5 * sq_norm / n + lam / n)


def train_lr(
    X,
    y: Sequence[int],
    config: LRConfig = LRConfig(),
    classes: Sequence[int] | None = None,
) -> LogisticModel:
    """Fit by gradient descent from zero weights.

    Stops when the loss changes by less than ``config.tol`` or after
    ``config.max_iter`` steps. A step larger than :func:`stable_step_bound`
    is reduced to the bound unless ``config.clip_step`` is off; whenever the
    step is within the bound the loss is checked to be non-increasing.
    """
    X = as_csr(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != len(y):
        raise ValidationError(f"X has {X.shape[0]} rows but y has {len(y)} labels")
    if len(y) == 0:
        raise ValidationError("cannot train on an empty dataset")
    classes = resolve_classes(y, classes)
    if len(classes) < 2:
        raise ValidationError("logistic regression needs at least two classes")
    order = canonical_order(X, y)
    X, y = X[order], y[order]
    yi = label_indices(y, classes)

    bound = stable_step_bound(X, config.lam)
    step = min(config.step_size, bound) if config.clip_step else config.step_size
    if step < config.step_size:
        log.info("step size %.4g exceeds stability bound; using %.4g", config.step_size, step)

    W = np.zeros((len(classes), X.shape[1] + 1))
    loss, grad = _objective(W, X, yi, config.lam)
    history = [loss]
    it = 0
    for it in range(1, config.max_iter + 1):
        W = W - step * grad
        # overflow surfaces as a non-finite loss, reported below
        with np.errstate(over="ignore", invalid="ignore"):
            new_loss, grad = _objective(W, X, yi, config.lam)
        if not np.isfinite(new_loss) or not np.all(np.isfinite(W)):
            raise DivergedError(it, new_loss)
        if step <= bound and new_loss > loss + 1e-12 * max(1.0, abs(loss)):
            raise PipelineRuntimeError(
                f"loss increased at iteration {it} ({loss!r} -> {new_loss!r}) with a stable step"
            )
        history.append(new_loss)
        delta = loss - new_loss
        loss = new_loss
        if abs(delta) < config.tol:
            break
    return LogisticModel(tuple(classes), W, config, loss, it, step, tuple(history))


def predict_lr(model: LogisticModel, x) -> tuple[int, np.ndarray]:
    """Predict one document; returns (label, class probabilities)."""
    X = as_csr(x)
    if X.shape[0] != 1:
        raise ValidationError("predict_lr takes a single document")
    p = model.predict_proba(X)[0]
    return int(model.classes[int(np.argmax(p))]), p


def with_weights(model: LogisticModel, weights: np.ndarray) -> LogisticModel:
    return dataclasses.replace(model, weights=np.asarray(weights, dtype=np.float64))
