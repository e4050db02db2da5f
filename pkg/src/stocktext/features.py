"""Bag-of-words features: vocabulary, count vectors and TF-IDF vectors.

TF-IDF uses the smoothed inverse document frequency
``idf(t) = ln((1 + N) / (1 + df(t))) + 1`` followed by L2 row normalisation.
Matrices are stored as ``scipy.sparse.csr_matrix`` with sorted column indices
and no explicit zeros.
"""
from __future__ import annotations

import csv
import enum
import hashlib
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError


class Weighting(enum.Enum):
    COUNT = "count"
    TFIDF = "tfidf"


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    df: tuple[int, ...]
    n_docs: int
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if list(self.tokens) != sorted(set(self.tokens)):
            raise ValidationError("vocabulary tokens must be unique and sorted")
        if len(self.df) != len(self.tokens):
            raise ValidationError("df length does not match token count")
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def idf(self) -> np.ndarray:
        df = np.asarray(self.df, dtype=np.float64)
        return np.log((1.0 + self.n_docs) / (1.0 + df)) + 1.0

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["token", "index", "df", "N"])
        for i, (tok, d) in enumerate(zip(self.tokens, self.df)):
            writer.writerow([tok, i, d, self.n_docs])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, n_docs: int | None = None) -> "Vocabulary":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header != ["token", "index", "df", "N"]:
            raise ValidationError(f"bad vocabulary header {header!r}")
        rows = [r for r in reader if r]
        for expected, row in enumerate(rows):
            if int(row[1]) != expected:
                raise ValidationError(f"vocabulary index {row[1]} out of order (expected {expected})")
        ns = {int(r[3]) for r in rows}
        if len(ns) > 1:
            raise ValidationError("inconsistent N in vocabulary sidecar")
        if ns:
            n_docs = ns.pop()
        if n_docs is None:
            raise ValidationError("empty vocabulary sidecar needs an explicit n_docs")
        return cls(tuple(r[0] for r in rows), tuple(int(r[2]) for r in rows), n_docs)

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_csv().encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class DocTermMatrix:
    matrix: sp.csr_matrix
    weighting: Weighting

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def rows(self, idx) -> "DocTermMatrix":
        return DocTermMatrix(self.matrix[np.asarray(idx, dtype=np.int64)], self.weighting)


def build_vocab(
    corpus: Sequence[Sequence[str]],
    min_df: int = 1,
    max_features: int | None = None,
    *,
    allow_empty: bool = False,
) -> Vocabulary:
    """Vocabulary of tokens appearing in at least ``min_df`` documents.

    With ``max_features`` only the most frequent tokens (by document
    frequency, ties broken lexicographically) are kept. Column indices follow
    lexicographic token order.
    """
    if len(corpus) == 0:
        raise ValidationError("cannot build a vocabulary from an empty corpus")
    if min_df < 1:
        raise ValidationError(f"min_df must be >= 1, got {min_df}")
    if max_features is not None:
        if max_features < 0:
            raise ValidationError(f"max_features must be >= 0, got {max_features}")
        if max_features == 0 and not allow_empty:
            raise ValidationError("max_features=0 yields an empty vocabulary")
    df: Counter[str] = Counter()
    for doc in corpus:
        df.update(set(doc))
    kept = [t for t, d in df.items() if d >= min_df]
    if max_features is not None and len(kept) > max_features:
        kept = sorted(kept, key=lambda t: (-df[t], t))[:max_features]
    kept.sort()
    return Vocabulary(tuple(kept), tuple(df[t] for t in kept), len(corpus))


def _count_csr(docs: Iterable[Sequence[str]], vocab: Vocabulary) -> sp.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    index = vocab.index
    for doc in docs:
        counts = Counter(index[t] for t in doc if t in index)
        for col in sorted(counts):
            indices.append(col)
            data.append(counts[col])
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(indptr) - 1, len(vocab)),
    )


def count_vectorize(docs: Sequence[Sequence[str]], vocab: Vocabulary) -> DocTermMatrix:
    """Raw term counts; out-of-vocabulary tokens are ignored."""
    return DocTermMatrix(_count_csr(docs, vocab), Weighting.COUNT)


def tfidf_vectorize(docs: Sequence[Sequence[str]], vocab: Vocabulary) -> DocTermMatrix:
    """Counts scaled by the vocabulary's idf, then unit-L2 per row."""
    m = _count_csr(docs, vocab)
    if m.nnz:
        idf = vocab.idf()
        m.data *= idf[m.indices]
        sq = np.asarray(m.multiply(m).sum(axis=1)).ravel()
        norms = np.sqrt(sq)
        row_of = np.repeat(np.arange(m.shape[0]), np.diff(m.indptr))
        m.data /= norms[row_of]
    return DocTermMatrix(m, Weighting.TFIDF)


def vectorize(docs: Sequence[Sequence[str]], vocab: Vocabulary, weighting: Weighting | str) -> DocTermMatrix:
    weighting = Weighting(weighting)
    if weighting is Weighting.COUNT:
        return count_vectorize(docs, vocab)
    return tfidf_vectorize(docs, vocab)


def save_matrix(m: DocTermMatrix) -> str:
    """Coordinate triplets ``row,col,value``; a leading comment line carries
    the shape and weighting so empty trailing rows survive a reload."""
    coo = m.matrix.tocoo()
    out = io.StringIO()
    out.write(f"# shape={coo.shape[0]}x{coo.shape[1]} weighting={m.weighting.value}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["row", "col", "value"])
    order = np.lexsort((coo.col, coo.row))
    for k in order:
        writer.writerow([int(coo.row[k]), int(coo.col[k]), repr(float(coo.data[k]))])
    return out.getvalue()


def load_matrix(text: str) -> DocTermMatrix:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# shape="):
        raise ValidationError("matrix file is missing its shape line")
    meta = dict(part.split("=", 1) for part in lines[0][2:].split())
    n_rows, n_cols = (int(x) for x in meta["shape"].split("x"))
    reader = csv.reader(lines[1:])
    if next(reader, None) != ["row", "col", "value"]:
        raise ValidationError("matrix file is missing its row,col,value header")
    rows, cols, vals = [], [], []
    for r, c, v in reader:
        rows.append(int(r))
        cols.append(int(c))
        vals.append(float(v))
    m = sp.csr_matrix(
        (np.asarray(vals, dtype=np.float64), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(n_rows, n_cols),
    )
    m.sort_indices()
    return DocTermMatrix(m, Weighting(meta["weighting"]))
