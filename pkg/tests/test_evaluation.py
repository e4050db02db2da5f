import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import classification_report as sk_report
from sklearn.metrics import confusion_matrix as sk_confusion

from stocktext.errors import ValidationError
from stocktext.evaluation import (
    AVOID_MESSAGE,
    INVEST_MESSAGE,
    ConfusionMatrix,
    CvSpec,
    Decision,
    SplitSpec,
    class_report,
    confusion,
    investment_signal,
    kfold,
    last_days_window,
    macro_f1,
    train_test_split,
)

RECONSTRUCTED = np.array([[115, 840], [194, 2226]])


def _report(counts, labels=(0, 1)):
    return class_report(ConfusionMatrix(np.asarray(counts), tuple(labels)))


# ------------------------------------------------------------------ splits


@pytest.mark.parametrize("n, n_train", [(10, 9), (514_320, 462_888), (2, 2), (11, 10), (19, 18)])
def test_split_sizes(n, n_train):
    train, test = train_test_split(n)
    assert len(train) == n_train and len(test) == n - n_train


def test_split_deterministic_and_seeded():
    a = train_test_split(100, SplitSpec(seed=5))
    b = train_test_split(100, SplitSpec(seed=5))
    c = train_test_split(100, SplitSpec(seed=6))
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[1], c[1])


def test_stratified_split():
    labels = [0] * 20 + [1] * 80
    train, test = train_test_split(100, SplitSpec(stratify=True), labels)
    assert sorted(np.asarray(labels)[test].tolist()) == [0, 0] + [1] * 8
    with pytest.raises(ValidationError):
        train_test_split(100, SplitSpec(stratify=True))


def test_split_errors():
    with pytest.raises(ValidationError):
        train_test_split(1)
    with pytest.raises(ValidationError):
        SplitSpec(train=0)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 500), st.integers(1, 99), st.integers(0, 10**6))
def test_split_partition(n, train_pct, seed):
    spec = SplitSpec(train=train_pct, test=100 - train_pct, seed=seed)
    train, test = train_test_split(n, spec)
    assert len(train) == -(-n * train_pct // 100)
    assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(n))


def test_kfold_sizes():
    assert [len(te) for _, te in kfold(10)] == [2] * 5
    assert [len(te) for _, te in kfold(11)] == [3, 2, 2, 2, 2]
    with pytest.raises(ValidationError):
        kfold(4)
    with pytest.raises(ValidationError):
        CvSpec(k=1)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 10), st.integers(0, 200), st.integers(0, 10**6))
def test_kfold_partition(k, extra, seed):
    n = k + extra
    folds = kfold(n, CvSpec(k, seed))
    assert np.array_equal(np.sort(np.concatenate([te for _, te in folds])), np.arange(n))
    for tr, te in folds:
        assert not set(tr) & set(te)
        assert len(tr) + len(te) == n
    sizes = [len(te) for _, te in folds]
    assert max(sizes) - min(sizes) <= 1


# ------------------------------------------------------------------ confusion and report


def test_confusion_identity_and_empty():
    assert confusion([0, 1], [0, 1], 2).counts.tolist() == [[1, 0], [0, 1]]
    assert confusion([], [], 2).counts.tolist() == [[0, 0], [0, 0]]
    with pytest.raises(ValidationError):
        confusion([0], [0, 1], 2)
    with pytest.raises(ValidationError):
        confusion([5], [0], 2)


def test_reconstructed_matrix_from_label_vectors():
    y_true = [0] * 955 + [1] * 2420
    y_pred = [0] * 115 + [1] * 840 + [0] * 194 + [1] * 2226
    assert np.array_equal(confusion(y_true, y_pred, 2).counts, RECONSTRUCTED)


def test_reconstructed_report_values():
    r = _report(RECONSTRUCTED)
    pos, neg = r.for_label(1), r.for_label(0)
    assert round(pos["precision"], 3) == 0.726
    assert round(pos["recall"], 2) == 0.92
    assert round(pos["f1"], 2) == 0.81
    assert round(neg["recall"], 2) == 0.12
    assert 0.37 <= neg["precision"] <= 0.38
    assert abs(neg["f1"] - 0.19) <= 0.01
    assert round(r.accuracy, 2) == 0.69
    assert round(r.macro.f1, 2) == 0.50
    assert (pos["support"], neg["support"]) == (2420, 955)


def test_identity_report():
    r = _report(np.eye(3, dtype=int) * 4, labels=(-1, 0, 1))
    assert r.accuracy == 1.0
    assert np.all(r.precision == 1) and np.all(r.recall == 1) and np.all(r.f1 == 1)
    assert r.zero_division == 0


def test_never_predicted_class():
    r = _report([[0, 3], [0, 5]])
    assert r.precision[0] == 0.0 and r.f1[0] == 0.0
    assert r.zero_division == 2


def test_report_text_and_dict():
    r = _report(RECONSTRUCTED)
    text = r.to_text()
    assert "0.73      0.92      0.81      2420" in text
    assert text.splitlines()[3].split()[-2:] == ["0.69", "3375"]
    d = r.to_dict()
    assert d["accuracy"]["support"] == 3375
    assert [c["label"] for c in d["classes"]] == [0, 1]


def test_empty_report_rejected():
    with pytest.raises(ValidationError):
        _report([[0, 0], [0, 0]])


label_pairs = st.integers(2, 4).flatmap(
    lambda k: st.lists(st.tuples(st.integers(0, k - 1), st.integers(0, k - 1)), min_size=1, max_size=80).map(
        lambda pairs: (k, pairs)
    )
)


@settings(max_examples=200, deadline=None)
@given(label_pairs)
def test_report_matches_reference(case):
    k, pairs = case
    y_true, y_pred = [p[0] for p in pairs], [p[1] for p in pairs]
    m = confusion(y_true, y_pred, k)
    np.testing.assert_array_equal(m.counts, sk_confusion(y_true, y_pred, labels=list(range(k))))
    r = class_report(m)
    ref = sk_report(y_true, y_pred, labels=list(range(k)), output_dict=True, zero_division=0)
    for c in range(k):
        row = r.for_label(c)
        for ours, theirs in (("precision", "precision"), ("recall", "recall"), ("f1", "f1-score")):
            assert abs(row[ours] - ref[str(c)][theirs]) <= 1e-12
    assert abs(r.macro.f1 - ref["macro avg"]["f1-score"]) <= 1e-12
    assert abs(r.weighted.f1 - ref["weighted avg"]["f1-score"]) <= 1e-12
    # invariants
    assert abs(r.accuracy * m.total - np.trace(m.counts)) <= 1e-9
    assert abs(r.macro.f1 - np.mean(r.f1)) <= 1e-12
    w = r.support / r.support.sum()
    assert abs(r.weighted.recall - float(w @ r.recall)) <= 1e-12
    assert macro_f1(y_true, y_pred, list(range(k))) == r.macro.f1


# ------------------------------------------------------------------ signal


def test_signal_reconstructed_avoid():
    s = investment_signal(_report(RECONSTRUCTED))
    assert s.decision is Decision.AVOID and s.message == AVOID_MESSAGE == "Avoid investing!"
    assert s.tau == 0.75


def test_signal_boundaries():
    # 3 of 4 predicted positives correct -> precision exactly 0.75
    exact = _report([[5, 1], [0, 3]])
    assert exact.for_label(1)["precision"] == 0.75
    assert investment_signal(exact).message == INVEST_MESSAGE == "Invest!"
    perfect = _report([[5, 0], [0, 3]])
    assert investment_signal(perfect).decision is Decision.INVEST
    assert investment_signal(exact, tau=0.76).decision is Decision.AVOID


def test_signal_errors():
    with pytest.raises(ValidationError):
        investment_signal(_report([[1, 0], [0, 1]]), tau=1.5)
    with pytest.raises(ValidationError):
        investment_signal(_report([[1, 0], [0, 1]], labels=(-1, 0)))


def test_signal_three_class_uses_positive_code():
    r = _report([[3, 0, 0], [0, 3, 1], [0, 0, 9]], labels=(-1, 0, 1))
    assert investment_signal(r).precision == 0.9


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 50), st.integers(0, 50), st.integers(1, 50), st.integers(0, 20), st.floats(0, 1))
def test_signal_monotone(tn, fp, tp, extra_tp, tau):
    low = investment_signal(_report([[tn, fp], [0, tp]]), tau)
    high = investment_signal(_report([[tn, fp], [0, tp + extra_tp]]), tau)
    assert high.precision >= low.precision
    if low.decision is Decision.INVEST:
        assert high.decision is Decision.INVEST


# ------------------------------------------------------------------ window


def test_last_days_window():
    d = dt.date(2020, 7, 31)
    dates = [d, d - dt.timedelta(days=13), d - dt.timedelta(days=14), dt.date(2020, 1, 5)]
    symbols = ["A", "A", "A", "B"]
    out = last_days_window(dates, symbols, 14)
    assert out["A"].tolist() == [0, 1]
    assert out["B"].tolist() == [3]
    with pytest.raises(ValidationError):
        last_days_window(dates, symbols, 0)
