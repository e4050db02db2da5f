"""Naive Bayes text classifiers (multinomial and Bernoulli) with additive smoothing."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ValidationError
from ._common import as_csr, canonical_order, resolve_classes


class NBVariant(enum.Enum):
    MULTINOMIAL = "multinomial"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True, eq=False)
class NaiveBayesModel:
    classes: tuple[int, ...]
    log_prior: np.ndarray
    # multinomial: ln P(token | class); bernoulli: ln P(token present | class)
    log_likelihood: np.ndarray
    alpha: float
    variant: NBVariant

    @property
    def n_features(self) -> int:
        return self.log_likelihood.shape[1]

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = as_csr(X)
        if X.shape[1] != self.n_features:
            raise ValidationError(f"expected {self.n_features} features, got {X.shape[1]}")
        if self.variant is NBVariant.MULTINOMIAL:
            return self.log_prior + np.asarray(X @ self.log_likelihood.T)
        log_absent = np.log1p(-np.exp(self.log_likelihood))
        present = X.copy()
        present.data = (present.data > 0).astype(np.float64)
        return self.log_prior + log_absent.sum(axis=1) + np.asarray(present @ (self.log_likelihood - log_absent).T)

    def log_posterior(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        shifted = jll - jll.max(axis=1, keepdims=True)
        return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))

    def predict(self, X) -> np.ndarray:
        # np.argmax keeps the first maximum: lowest class index wins ties
        return np.asarray(self.classes)[np.argmax(self.joint_log_likelihood(X), axis=1)]


def train_nb(
    X,
    y: Sequence[int],
    alpha: float = 1.0,
    variant: NBVariant | str = NBVariant.MULTINOMIAL,
    classes: Sequence[int] | None = None,
) -> NaiveBayesModel:
    """Fit class priors and smoothed per-class token likelihoods.

    Fractional (TF-IDF) weights are treated as fractional counts by the
    multinomial variant; the Bernoulli variant only looks at presence.
    """
    variant = NBVariant(variant)
    if not alpha > 0:
        raise ValidationError(f"alpha must be > 0, got {alpha}")
    X = as_csr(X)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != len(y):
        raise ValidationError(f"X has {X.shape[0]} rows but y has {len(y)} labels")
    if len(y) == 0:
        raise ValidationError("cannot train on an empty dataset")
    classes = resolve_classes(y, classes)
    order = canonical_order(X, y)
    X, y = X[order], y[order]

    n_features = X.shape[1]
    doc_counts = np.array([np.sum(y == c) for c in classes], dtype=np.float64)
    log_prior = np.log(doc_counts / doc_counts.sum())
    log_lik = np.empty((len(classes), n_features))
    for k, c in enumerate(classes):
        rows = X[y == c]
        if variant is NBVariant.MULTINOMIAL:
            counts = np.asarray(rows.sum(axis=0)).ravel()
            log_lik[k] = np.log(counts + alpha) - np.log(counts.sum() + alpha * n_features)
        else:
            present = np.asarray((rows > 0).sum(axis=0), dtype=np.float64).ravel()
            log_lik[k] = np.log(present + alpha) - np.log(doc_counts[k] + 2 * alpha)
    return NaiveBayesModel(tuple(classes), log_prior, log_lik, float(alpha), variant)


def predict_nb(model: NaiveBayesModel, x) -> tuple[int, np.ndarray]:
    """Predict one document; returns (label, normalised log-posterior)."""
    X = as_csr(x)
    if X.shape[0] != 1:
        raise ValidationError("predict_nb takes a single document")
    post = model.log_posterior(X)[0]
    return int(model.classes[int(np.argmax(post))]), post
