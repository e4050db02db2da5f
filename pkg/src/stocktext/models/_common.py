from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..errors import ValidationError
from ..features import DocTermMatrix


def as_csr(X) -> sp.csr_matrix:
    if isinstance(X, DocTermMatrix):
        X = X.matrix
    if sp.issparse(X):
        return sp.csr_matrix(X, dtype=np.float64)
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    return sp.csr_matrix(arr)


def resolve_classes(y: np.ndarray, classes: Sequence[int] | None) -> tuple[int, ...]:
    present = sorted(set(int(v) for v in y))
    if classes is None:
        return tuple(present)
    classes = tuple(sorted(int(c) for c in classes))
    stray = set(present) - set(classes)
    if stray:
        raise ValidationError(f"labels {sorted(stray)} not among classes {list(classes)}")
    absent = set(classes) - set(present)
    if absent:
        raise ValidationError(f"class(es) {sorted(absent)} absent from training labels")
    return classes


def canonical_order(X: sp.csr_matrix, y: np.ndarray) -> np.ndarray:
    """A row order that depends only on the multiset of (row, label) pairs.

    Training on rows in this order makes floating-point reductions, and so
    the fitted parameters, independent of the caller's row order.
    """
    keys = []
    for i in range(X.shape[0]):
        lo, hi = X.indptr[i], X.indptr[i + 1]
        keys.append((int(y[i]), tuple(X.indices[lo:hi].tolist()), tuple(X.data[lo:hi].tolist())))
    return np.asarray(sorted(range(len(keys)), key=keys.__getitem__), dtype=np.int64)


def label_indices(y: np.ndarray, classes: Sequence[int]) -> np.ndarray:
    lookup = {c: i for i, c in enumerate(classes)}
    try:
        return np.asarray([lookup[int(v)] for v in y], dtype=np.int64)
    except KeyError as exc:
        raise ValidationError(f"label {exc.args[0]} not among classes {list(classes)}") from None
