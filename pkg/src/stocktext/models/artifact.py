"""Self-describing JSON model artifacts.

Python's ``json`` writes floats with ``repr``, so parameters reload
bit-for-bit. The vocabulary is referenced by content hash, not embedded.
"""
from __future__ import annotations

import dataclasses
import json
from typing import Any

import numpy as np

from ..errors import ValidationError
from .logistic import LogisticModel, LRConfig
from .naive_bayes import NaiveBayesModel, NBVariant

FORMAT = "stocktext-model"
VERSION = 1


def dump_model(model: NaiveBayesModel | LogisticModel, vocabulary_sha256: str, **extra: Any) -> str:
    if isinstance(model, NaiveBayesModel):
        doc = {
            "kind": "naive_bayes",
            "hyperparameters": {"alpha": model.alpha, "variant": model.variant.value},
            "parameters": {
                "log_prior": model.log_prior.tolist(),
                "log_likelihood": model.log_likelihood.tolist(),
            },
        }
    elif isinstance(model, LogisticModel):
        doc = {
            "kind": "logistic_regression",
            "hyperparameters": dataclasses.asdict(model.config),
            "parameters": {"weights": model.weights.tolist()},
            "training": {
                "final_loss": model.final_loss,
                "n_iter": model.n_iter,
                "effective_step": model.effective_step,
                "loss_history": list(model.loss_history),
            },
        }
    else:
        raise TypeError(f"cannot serialise {type(model).__name__}")
    doc = {
        "format": FORMAT,
        "version": VERSION,
        **doc,
        "classes": list(model.classes),
        "n_features": model.n_features,
        "vocabulary_sha256": vocabulary_sha256,
        "extra": extra,
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _matrix(rows, n_cols: int) -> np.ndarray:
    arr = np.asarray(rows, dtype=np.float64)
    return arr.reshape(-1, n_cols)


def load_model(text: str) -> tuple[NaiveBayesModel | LogisticModel, dict]:
    """Returns (model, document) so callers can read the vocabulary hash and extras."""
    doc = json.loads(text)
    if doc.get("format") != FORMAT or doc.get("version") != VERSION:
        raise ValidationError("not a stocktext model artifact (or unsupported version)")
    classes = tuple(int(c) for c in doc["classes"])
    n_features = int(doc["n_features"])
    params = doc["parameters"]
    hp = doc["hyperparameters"]
    if doc["kind"] == "naive_bayes":
        model = NaiveBayesModel(
            classes,
            np.asarray(params["log_prior"], dtype=np.float64),
            _matrix(params["log_likelihood"], n_features),
            float(hp["alpha"]),
            NBVariant(hp["variant"]),
        )
    elif doc["kind"] == "logistic_regression":
        tr = doc["training"]
        model = LogisticModel(
            classes,
            _matrix(params["weights"], n_features + 1),
            LRConfig(**hp),
            float(tr["final_loss"]),
            int(tr["n_iter"]),
            float(tr["effective_step"]),
            tuple(float(v) for v in tr["loss_history"]),
        )
    else:
        raise ValidationError(f"unknown model kind {doc['kind']!r}")
    return model, doc
