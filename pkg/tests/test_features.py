import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from sklearn.feature_extraction.text import CountVectorizer, TfidfVectorizer

from stocktext.errors import ValidationError
from stocktext.features import (
    Vocabulary,
    Weighting,
    build_vocab,
    count_vectorize,
    load_matrix,
    save_matrix,
    tfidf_vectorize,
    vectorize,
)


def test_vocab_example():
    v = build_vocab([["a", "b"], ["b", "c"]])
    assert v.index == {"a": 0, "b": 1, "c": 2}
    assert v.df == (1, 2, 1) and v.n_docs == 2


def test_min_df():
    assert build_vocab([["a", "b"], ["b", "c"]], min_df=2).index == {"b": 0}


def test_max_features():
    corpus = [["a", "b"], ["b", "c"], ["c", "d"]]
    # b and c tie at df 2
    assert build_vocab(corpus, max_features=1).tokens == ("b",)
    assert build_vocab(corpus, max_features=2).tokens == ("b", "c")
    with pytest.raises(ValidationError):
        build_vocab(corpus, max_features=0)
    assert len(build_vocab(corpus, max_features=0, allow_empty=True)) == 0


def test_vocab_errors():
    with pytest.raises(ValidationError):
        build_vocab([])
    with pytest.raises(ValidationError):
        build_vocab([["a"]], min_df=0)


def test_count_rows():
    v = build_vocab([["a", "b"], ["b", "c"]])
    m = count_vectorize([["b", "b", "c"], [], ["zz", "yy"]], v).matrix
    assert m.toarray().tolist() == [[0, 2, 1], [0, 0, 0], [0, 0, 0]]
    assert m.nnz == 2


def test_tfidf_single_document():
    v = build_vocab([["a", "a", "b"]])
    np.testing.assert_allclose(v.idf(), [1.0, 1.0])
    row = tfidf_vectorize([["a", "a", "b"]], v).matrix.toarray()[0]
    np.testing.assert_allclose(row, np.array([2, 1]) / math.sqrt(5), rtol=1e-12)


def test_tfidf_two_documents():
    v = build_vocab([["a"], ["a", "b"]])
    idf_b = math.log(3 / 2) + 1
    assert abs(idf_b - 1.4055) < 1e-4
    row = tfidf_vectorize([["a", "b"]], v).matrix.toarray()[0]
    np.testing.assert_allclose(row, np.array([1, idf_b]) / math.hypot(1, idf_b), rtol=1e-12)
    assert abs(row[0] - 0.5797) < 1e-4 and abs(row[1] - 0.8148) < 1e-4


def test_tfidf_empty_row_stays_zero():
    v = build_vocab([["a"]])
    m = tfidf_vectorize([[], ["q"], ["a"]], v).matrix
    assert m.toarray().tolist() == [[0.0], [0.0], [1.0]]
    assert np.isfinite(m.data).all()


def test_vectorize_dispatch():
    v = build_vocab([["a"]])
    assert vectorize([["a"]], v, "count").weighting is Weighting.COUNT
    assert vectorize([["a"]], v, Weighting.TFIDF).weighting is Weighting.TFIDF
    with pytest.raises(ValueError):
        vectorize([["a"]], v, "bm25")


def test_vocab_csv_round_trip():
    v = build_vocab([["a", "b"], ["b", "c"]])
    text = v.to_csv()
    assert text.splitlines() == ["token,index,df,N", "a,0,1,2", "b,1,2,2", "c,2,1,2"]
    assert Vocabulary.from_csv(text) == v
    assert Vocabulary.from_csv(text).content_hash() == v.content_hash()


def test_vocab_csv_errors():
    with pytest.raises(ValidationError):
        Vocabulary.from_csv("tok,index\n")
    with pytest.raises(ValidationError):
        Vocabulary.from_csv("token,index,df,N\nb,1,1,2\na,0,1,2\n")
    with pytest.raises(ValidationError):
        Vocabulary.from_csv("token,index,df,N\n")


# ------------------------------------------------------------------ reference oracle

words = st.sampled_from(["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"])
corpora = st.lists(st.lists(words, max_size=8), min_size=1, max_size=12)


def _sklearn(cls, corpus, **kw):
    vec = cls(analyzer=lambda doc: doc, **kw)
    return vec, vec.fit_transform(corpus)


@settings(max_examples=150, deadline=None)
@given(corpora, st.integers(1, 3))
def test_matches_reference_vectorizers(corpus, min_df):
    df = Counter(t for d in corpus for t in set(d))
    # the reference raises on an empty vocabulary
    assume(any(n >= min_df for n in df.values()))
    v = build_vocab(corpus, min_df=min_df)
    ref_count, ref_c = _sklearn(CountVectorizer, corpus, min_df=min_df)
    assert list(v.tokens) == list(ref_count.get_feature_names_out())
    np.testing.assert_array_equal(count_vectorize(corpus, v).matrix.toarray(), ref_c.toarray())

    ref_tfidf, ref_t = _sklearn(TfidfVectorizer, corpus, min_df=min_df, smooth_idf=True, norm="l2")
    np.testing.assert_allclose(v.idf(), ref_tfidf.idf_, rtol=1e-12)
    np.testing.assert_allclose(tfidf_vectorize(corpus, v).matrix.toarray(), ref_t.toarray(), rtol=1e-9, atol=1e-12)


@settings(max_examples=150, deadline=None)
@given(corpora, corpora)
def test_row_invariants(train, test):
    v = build_vocab(train)
    counts = count_vectorize(test, v).matrix
    tfidf = tfidf_vectorize(test, v).matrix
    for i, doc in enumerate(test):
        in_vocab = sum(t in v for t in doc)
        assert counts[i].sum() == in_vocab
        norm = math.sqrt(tfidf[i].multiply(tfidf[i]).sum())
        assert abs(norm - (1.0 if in_vocab else 0.0)) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(corpora, st.sampled_from(list(Weighting)))
def test_matrix_round_trip(corpus, weighting):
    v = build_vocab(corpus, allow_empty=True)
    m = vectorize(corpus + [[]], v, weighting)
    text = save_matrix(m)
    again = load_matrix(text)
    assert again.weighting is weighting and again.shape == m.shape
    assert (again.matrix != m.matrix).nnz == 0
    np.testing.assert_array_equal(again.matrix.data, m.matrix.data)
    assert save_matrix(again) == text


@settings(max_examples=50, deadline=None)
@given(corpora)
def test_deterministic(corpus):
    a, b = build_vocab(corpus), build_vocab([list(d) for d in corpus])
    assert a.to_csv() == b.to_csv()
    assert save_matrix(tfidf_vectorize(corpus, a)) == save_matrix(tfidf_vectorize(corpus, b))


def test_load_matrix_errors():
    with pytest.raises(ValidationError):
        load_matrix("row,col,value\n")
    with pytest.raises(ValidationError):
        load_matrix("# shape=1x1 weighting=count\nr,c,v\n")
