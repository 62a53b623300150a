import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen2out.metrics import average_precision, evaluate_ranking, roc_auc


def brute_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    total = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p, n in itertools.product(pos, neg))
    return total / (len(pos) * len(neg))


def brute_ap(scores, labels):
    order = sorted(range(len(scores)), key=lambda i: -scores[i])  # sorted() is stable
    hits, total = 0, 0.0
    for rank, i in enumerate(order, 1):
        if labels[i]:
            hits += 1
            total += hits / rank
    return total / sum(labels)


def test_examples():
    assert roc_auc([0.9, 0.8, 0.1], [1, 0, 0]) == 1.0
    assert roc_auc([0.1, 0.8, 0.9], [1, 0, 0]) == 0.0
    assert roc_auc([0.5, 0.5], [1, 0]) == 0.5
    assert average_precision([0.9, 0.8, 0.7, 0.1], [1, 0, 1, 0]) == pytest.approx((1 + 2 / 3) / 2)
    assert average_precision([3, 2, 1], [1, 1, 1]) == 1.0


labelled = st.integers(2, 60).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 6).map(float), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(lambda l: 0 < sum(l) < len(l)),
    )
)


@settings(max_examples=150, deadline=None)
@given(labelled)
def test_against_brute_force(data):
    scores, labels = data
    assert roc_auc(scores, labels) == pytest.approx(brute_auc(scores, labels), abs=1e-12)
    assert average_precision(scores, labels) == pytest.approx(brute_ap(scores, labels), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(labelled)
def test_monotone_transform_invariance(data):
    scores, labels = data
    moved = np.exp(np.asarray(scores)) * 3 - 1
    assert roc_auc(moved, labels) == roc_auc(scores, labels)
    assert average_precision(moved, labels) == average_precision(scores, labels)


def test_evaluate_counts():
    res = evaluate_ranking([0.2, 0.4, 0.9], [0, 0, 1])
    assert (res.n_pos, res.n_neg, res.roc_auc, res.ap) == (1, 2, 1.0, 1.0)


def test_errors():
    with pytest.raises(ValueError):
        roc_auc([1, 2], [1, 1])
    with pytest.raises(ValueError):
        average_precision([1, 2], [0, 0])
    with pytest.raises(ValueError):
        roc_auc([1, 2, 3], [0, 1])
    with pytest.raises(ValueError):
        roc_auc([1, 2], [0, 2])
    with pytest.raises(ValueError):
        roc_auc([np.nan, 2], [0, 1])
