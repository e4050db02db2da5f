"""Vectoriser + classifier pipelines and grid search over them."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import StocktextError, ValidationError
from .evaluation import CvSpec, SplitSpec, kfold, macro_f1, train_test_split
from .features import DocTermMatrix, Vocabulary, Weighting, build_vocab, vectorize
from .models import LogisticModel, LRConfig, NaiveBayesModel, train_lr, train_nb

MODEL_KINDS = ("nb", "lr")
NB_PARAMS = ("alpha", "variant")
LR_PARAMS = ("lam", "step_size", "max_iter", "tol", "clip_step")
FEATURE_PARAMS = ("min_df", "max_features")


@dataclass(frozen=True, eq=False)
class FittedPipeline:
    vocab: Vocabulary
    weighting: Weighting
    model: NaiveBayesModel | LogisticModel

    def transform(self, docs: Sequence[Sequence[str]]) -> DocTermMatrix:
        return vectorize(docs, self.vocab, self.weighting)

    def predict(self, docs: Sequence[Sequence[str]]) -> np.ndarray:
        return self.model.predict(self.transform(docs))


def train_model(kind: str, X, y, params: Mapping[str, Any], classes: Sequence[int], seed: int = 0):
    params = dict(params)
    if kind == "nb":
        unknown = set(params) - set(NB_PARAMS)
        if unknown:
            raise ValidationError(f"unknown naive Bayes parameters {sorted(unknown)}")
        return train_nb(X, y, classes=classes, **params)
    if kind == "lr":
        unknown = set(params) - set(LR_PARAMS)
        if unknown:
            raise ValidationError(f"unknown logistic regression parameters {sorted(unknown)}")
        return train_lr(X, y, LRConfig(seed=seed, **params), classes=classes)
    raise ValidationError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def fit_pipeline(
    docs: Sequence[Sequence[str]],
    y: Sequence[int],
    vectorizer: Weighting | str,
    model: str,
    params: Mapping[str, Any] | None = None,
    classes: Sequence[int] | None = None,
    *,
    min_df: int = 1,
    max_features: int | None = None,
    seed: int = 0,
) -> FittedPipeline:
    """Build the vocabulary on ``docs`` only, vectorise, and train."""
    weighting = Weighting(vectorizer)
    vocab = build_vocab(docs, min_df=min_df, max_features=max_features)
    X = vectorize(docs, vocab, weighting)
    classes = tuple(sorted(set(int(v) for v in y))) if classes is None else tuple(classes)
    return FittedPipeline(vocab, weighting, train_model(model, X, y, params or {}, classes, seed))


@dataclass(frozen=True)
class GridCell:
    index: int
    vectorizer: str
    model: str
    params: tuple[tuple[str, Any], ...]
    # per-cell vocabulary settings overriding the search-wide ones
    features: tuple[tuple[str, Any], ...] = ()

    def describe(self) -> str:
        fs = ",".join(f"{k}={v}" for k, v in self.features)
        ps = ",".join(f"{k}={v}" for k, v in self.params)
        return self.vectorizer + (f"({fs})" if fs else "") + f"/{self.model}" + (f"[{ps}]" if ps else "")


@dataclass(frozen=True)
class GridSpec:
    vectorizers: tuple[str, ...] = ("count", "tfidf")
    models: tuple[str, ...] = ("nb", "lr")
    params: Mapping[str, Mapping[str, Sequence[Any]]] = field(default_factory=dict)
    features: Mapping[str, Sequence[Any]] = field(default_factory=dict)

    def cells(self) -> list[GridCell]:
        """Cartesian product in a fixed order: vectorizer, feature settings,
        model, then hyperparameters. Settings are taken sorted by name, each
        value in its listed order."""
        unknown = set(self.features) - set(FEATURE_PARAMS)
        if unknown:
            raise ValidationError(f"unknown feature parameters {sorted(unknown)}")
        feature_names = sorted(self.features)
        out = []
        for vec in self.vectorizers:
            Weighting(vec)
            for feature_values in itertools.product(*(self.features[n] for n in feature_names)):
                features = tuple(zip(feature_names, feature_values))
                for kind in self.models:
                    if kind not in MODEL_KINDS:
                        raise ValidationError(f"unknown model kind {kind!r}")
                    grid = self.params.get(kind, {})
                    names = sorted(grid)
                    for values in itertools.product(*(grid[n] for n in names)):
                        out.append(GridCell(len(out), vec, kind, tuple(zip(names, values)), features))
        return out


@dataclass(frozen=True)
class CellResult:
    cell: GridCell
    score: float | None
    fold_scores: tuple[float, ...] = ()
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class GridResult:
    results: tuple[CellResult, ...]

    def ranked(self) -> list[CellResult]:
        ok = sorted((r for r in self.results if not r.failed), key=lambda r: (-r.score, r.cell.index))
        return ok + [r for r in self.results if r.failed]

    @property
    def best(self) -> CellResult | None:
        ranked = self.ranked()
        return ranked[0] if ranked and not ranked[0].failed else None

    def table(self) -> list[dict]:
        rows = []
        for rank, r in enumerate(self.ranked(), start=1):
            rows.append(
                {
                    "rank": rank if not r.failed else "",
                    "cell": r.cell.index,
                    "vectorizer": r.cell.vectorizer,
                    "features": ";".join(f"{k}={v}" for k, v in r.cell.features),
                    "model": r.cell.model,
                    "params": ";".join(f"{k}={v}" for k, v in r.cell.params),
                    "macro_f1": "" if r.score is None else repr(r.score),
                    "folds": ";".join(repr(s) for s in r.fold_scores),
                    "status": "failed: " + r.error if r.failed else "ok",
                }
            )
        return rows


def _score_cell(cell, docs, y, classes, splits, min_df, max_features, seed) -> CellResult:
    scores = []
    vocab_settings = {"min_df": min_df, "max_features": max_features, **dict(cell.features)}
    try:
        for train_idx, test_idx in splits:
            fitted = fit_pipeline(
                [docs[i] for i in train_idx], y[train_idx], cell.vectorizer, cell.model, dict(cell.params),
                classes, seed=seed, **vocab_settings,
            )
            pred = fitted.predict([docs[i] for i in test_idx])
            scores.append(macro_f1(y[test_idx], pred, classes))
    except StocktextError as exc:
        return CellResult(cell, None, tuple(scores), f"{type(exc).__name__}: {exc}")
    return CellResult(cell, float(math.fsum(scores) / len(scores)), tuple(scores))


def grid_search(
    grid: GridSpec,
    docs: Sequence[Sequence[str]],
    y: Sequence[int],
    classes: Sequence[int],
    cv: CvSpec | None = None,
    split: SplitSpec = SplitSpec(),
    *,
    min_df: int = 1,
    max_features: int | None = None,
    seed: int = 0,
) -> GridResult:
    """Score every cell by macro-F1: the mean over ``cv`` folds when given,
    otherwise on the held-out part of ``split``. A cell that fails (e.g. a
    fold missing a class, or divergence) is recorded, not raised."""
    cells = grid.cells()
    if not cells:
        raise ValidationError("empty grid")
    y = np.asarray(y, dtype=np.int64)
    if len(docs) != len(y):
        raise ValidationError(f"{len(docs)} documents but {len(y)} labels")
    classes = tuple(classes)
    if cv is not None:
        splits = kfold(len(y), cv)
    else:
        splits = [train_test_split(len(y), split, labels=y)]
    return GridResult(tuple(_score_cell(c, docs, y, classes, splits, min_df, max_features, seed) for c in cells))
