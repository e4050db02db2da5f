"""Splits, classification metrics and the precision-thresholded invest signal."""
from __future__ import annotations

import datetime as dt
import enum
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError

INVEST_MESSAGE = "Invest!"
AVOID_MESSAGE = "Avoid investing!"


@dataclass(frozen=True)
class SplitSpec:
    train: int = 90
    test: int = 10
    seed: int = 0
    stratify: bool = False

    def __post_init__(self):
        if self.train <= 0 or self.test <= 0:
            raise ValidationError(f"split ratio parts must be positive, got {self.train}:{self.test}")

    def n_train(self, n: int) -> int:
        # ceil(n * train / (train + test)) in exact integer arithmetic
        return -(-n * self.train // (self.train + self.test))


@dataclass(frozen=True)
class CvSpec:
    k: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValidationError(f"k must be >= 2, got {self.k}")


def train_test_split(n: int, spec: SplitSpec = SplitSpec(), labels: Sequence[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Seeded random split; the first ceil(ratio * n) shuffled indices train.

    With ``spec.stratify`` the same rule is applied within each label group
    (``labels`` required). Both index arrays are returned sorted.
    """
    if n < 2:
        raise ValidationError(f"need at least 2 samples to split, got {n}")
    rng = np.random.default_rng(spec.seed)
    if not spec.stratify:
        perm = rng.permutation(n)
        k = spec.n_train(n)
        return np.sort(perm[:k]), np.sort(perm[k:])
    if labels is None or len(labels) != n:
        raise ValidationError("stratified split needs one label per sample")
    labels = np.asarray(labels)
    train, test = [], []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(len(idx))]
        k = spec.n_train(len(idx))
        train.append(idx[:k])
        test.append(idx[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def kfold(n: int, spec: CvSpec = CvSpec()) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded shuffle cut into k contiguous test folds (sizes differ by <= 1,
    larger folds first)."""
    if n < spec.k:
        raise ValidationError(f"cannot make {spec.k} folds from {n} samples")
    perm = np.random.default_rng(spec.seed).permutation(n)
    folds = []
    for test in np.array_split(perm, spec.k):
        mask = np.ones(n, dtype=bool)
        mask[test] = False
        folds.append((np.flatnonzero(mask), np.sort(test)))
    return folds


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes, both in ``labels`` order."""

    counts: np.ndarray
    labels: tuple[int, ...]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        return (
            isinstance(other, ConfusionMatrix)
            and self.labels == other.labels
            and np.array_equal(self.counts, other.counts)
        )


def confusion(y_true: Sequence[int], y_pred: Sequence[int], labels: int | Sequence[int]) -> ConfusionMatrix:
    """``labels`` is either K (meaning classes 0..K-1) or the class codes in order."""
    labels = tuple(range(labels)) if isinstance(labels, int) else tuple(int(c) for c in labels)
    if len(y_true) != len(y_pred):
        raise ValidationError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    pos = {c: i for i, c in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        try:
            counts[pos[int(t)], pos[int(p)]] += 1
        except KeyError as exc:
            raise ValidationError(f"label {exc.args[0]} not in {list(labels)}") from None
    return ConfusionMatrix(counts, labels)


@dataclass(frozen=True)
class Averages:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True, eq=False)
class ClassReport:
    labels: tuple[int, ...]
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    accuracy: float
    macro: Averages
    weighted: Averages
    # number of metrics that fell back to 0 on a zero denominator
    zero_division: int = 0

    @property
    def total(self) -> int:
        return int(self.support.sum())

    def for_label(self, label: int) -> dict:
        i = self.labels.index(label)
        return {
            "precision": float(self.precision[i]),
            "recall": float(self.recall[i]),
            "f1": float(self.f1[i]),
            "support": int(self.support[i]),
        }

    def to_dict(self) -> dict:
        """Rows in the usual classification-report layout."""
        total = self.total
        return {
            "classes": [{"label": c, **self.for_label(c)} for c in self.labels],
            "accuracy": {"value": self.accuracy, "support": total},
            "macro_avg": {**vars(self.macro), "support": total},
            "weighted_avg": {**vars(self.weighted), "support": total},
            "zero_division": self.zero_division,
        }

    def to_text(self, digits: int = 2) -> str:
        lines = [f"{'':>14}{'precision':>10}{'recall':>10}{'f1-score':>10}{'support':>10}"]
        for c in self.labels:
            r = self.for_label(c)
            lines.append(
                f"{c:>14}{r['precision']:>10.{digits}f}{r['recall']:>10.{digits}f}{r['f1']:>10.{digits}f}{r['support']:>10}"
            )
        lines.append(f"{'accuracy':>14}{'':>20}{self.accuracy:>10.{digits}f}{self.total:>10}")
        for name, avg in (("macro avg", self.macro), ("weighted avg", self.weighted)):
            lines.append(
                f"{name:>14}{avg.precision:>10.{digits}f}{avg.recall:>10.{digits}f}{avg.f1:>10.{digits}f}{self.total:>10}"
            )
        return "\n".join(lines) + "\n"


def _safe_div(num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, int]:
    zero = den == 0
    out = np.divide(num, den, out=np.zeros(num.shape, dtype=np.float64), where=~zero)
    return out, int(zero.sum())


def class_report(m: ConfusionMatrix) -> ClassReport:
    """Per-class precision/recall/F1 plus accuracy, macro and weighted means.

    A zero denominator yields 0 for that metric and bumps ``zero_division``.
    """
    counts = m.counts.astype(np.float64)
    total = counts.sum()
    if total == 0:
        raise ValidationError("class_report of an empty confusion matrix")
    tp = np.diag(counts)
    support = counts.sum(axis=1)
    precision, z1 = _safe_div(tp, counts.sum(axis=0))
    recall, z2 = _safe_div(tp, support)
    f1, z3 = _safe_div(2 * precision * recall, precision + recall)
    w = support / total
    return ClassReport(
        labels=m.labels,
        precision=precision,
        recall=recall,
        f1=f1,
        support=m.counts.sum(axis=1),
        accuracy=float(tp.sum() / total),
        macro=Averages(float(precision.mean()), float(recall.mean()), float(f1.mean())),
        weighted=Averages(float(w @ precision), float(w @ recall), float(w @ f1)),
        zero_division=z1 + z2 + z3,
    )


def macro_f1(y_true: Sequence[int], y_pred: Sequence[int], labels: Sequence[int]) -> float:
    return class_report(confusion(y_true, y_pred, labels)).macro.f1


class Decision(enum.Enum):
    INVEST = "invest"
    AVOID = "avoid"


@dataclass(frozen=True)
class Signal:
    decision: Decision
    precision: float
    tau: float
    window: str | None = None

    @property
    def message(self) -> str:
        return INVEST_MESSAGE if self.decision is Decision.INVEST else AVOID_MESSAGE

    def to_dict(self) -> dict:
        return {
            "decision": self.decision.value,
            "message": self.message,
            "precision": self.precision,
            "tau": self.tau,
            "window": self.window,
        }


def investment_signal(report: ClassReport, tau: float = 0.75, window: str | None = None) -> Signal:
    """Invest when the positive class (code 1) reaches precision ``tau``."""
    if 1 not in report.labels:
        raise ValidationError(f"report has no positive class (labels {list(report.labels)})")
    if not (0 <= tau <= 1) or math.isnan(tau):
        raise ValidationError(f"tau must lie in [0, 1], got {tau}")
    precision = report.for_label(1)["precision"]
    decision = Decision.INVEST if precision >= tau else Decision.AVOID
    return Signal(decision, precision, tau, window)


def last_days_window(dates: Sequence[dt.date], symbols: Sequence[str], days: int = 14) -> dict[str, np.ndarray]:
    """Indices of each symbol's rows within its final ``days`` calendar days
    (both ends inclusive)."""
    if len(dates) != len(symbols):
        raise ValidationError("dates and symbols differ in length")
    if days < 1:
        raise ValidationError(f"window must span at least one day, got {days}")
    last: dict[str, dt.date] = {}
    for d, s in zip(dates, symbols):
        if s not in last or d > last[s]:
            last[s] = d
    out: dict[str, list[int]] = defaultdict(list)
    for i, (d, s) in enumerate(zip(dates, symbols)):
        if d >= last[s] - dt.timedelta(days=days - 1):
            out[s].append(i)
    return {s: np.asarray(out[s], dtype=np.int64) for s in sorted(out)}
