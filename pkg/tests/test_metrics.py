import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpbench.metrics import NEG_LOG_CAP, auc_roc, best_accuracy_threshold, neg_log_complement


def brute_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return total / (len(pos) * len(neg))


def brute_threshold(scores, labels):
    """Try every candidate threshold explicitly."""
    uniq = sorted(set(scores))
    cands = [-math.inf] + [(a + b) / 2 for a, b in zip(uniq, uniq[1:])] + [math.inf]
    best = None
    for t in cands:
        pred = [s > t for s in scores]
        acc = sum(p == bool(l) for p, l in zip(pred, labels)) / len(labels)
        if best is None or acc >= best[1]:
            best = (t, acc)
    return best


def test_separated_and_all_ties():
    assert auc_roc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert auc_roc([0.3] * 6, [0, 1, 0, 1, 1, 0]) == 0.5


def test_one_class_rejected():
    with pytest.raises(ValueError):
        auc_roc([0.1, 0.2], [1, 1])
    with pytest.raises(ValueError):
        best_accuracy_threshold([0.1, 0.2], [0, 0])


def test_brute_force_on_200_instances():
    rng = np.random.default_rng(7)
    for _ in range(200):
        m = int(rng.integers(2, 500))
        labels = rng.integers(0, 2, size=m)
        labels[0], labels[1] = 0, 1
        scores = rng.integers(0, 20, size=m) / 4.0  # heavy ties
        assert abs(auc_roc(scores, labels) - brute_auc(scores.tolist(), labels.tolist())) < 1e-12


@pytest.mark.parametrize("auc,want", [(0.9, 1.0), (0.99, 2.0), (0.5, 0.30103)])
def test_neg_log_complement(auc, want):
    assert neg_log_complement(auc) == pytest.approx(want, abs=1e-5)


def test_neg_log_cap():
    assert neg_log_complement(1.0) == NEG_LOG_CAP
    with pytest.raises(ValueError):
        neg_log_complement(1.2)
    xs = np.linspace(0, 0.999, 50)
    ys = [neg_log_complement(x) for x in xs]
    assert np.all(np.diff(ys) > 0)


def test_threshold_separable():
    t, tpr, fpr, acc = best_accuracy_threshold([0.1, 0.2, 0.7, 0.9], [0, 0, 1, 1])
    assert (tpr, fpr, acc) == (1.0, 0.0, 1.0)
    assert t == pytest.approx(0.45)


def test_threshold_matches_exhaustive_oracle():
    rng = np.random.default_rng(3)
    for _ in range(100):
        m = int(rng.integers(2, 60))
        labels = rng.integers(0, 2, size=m)
        labels[:2] = [0, 1]
        scores = np.round(rng.random(m), 1)
        t, tpr, fpr, acc = best_accuracy_threshold(scores, labels)
        bt, bacc = brute_threshold(scores.tolist(), labels.tolist())
        assert acc == pytest.approx(bacc) and t == bt


def test_independent_balanced_labels_near_half():
    rng = np.random.default_rng(0)
    scores = rng.random(4000)
    labels = np.repeat([0, 1], 2000)
    rng.shuffle(labels)
    _, _, _, acc = best_accuracy_threshold(scores, labels)
    # exhaustive search can only exploit noise; stays close to chance
    assert 0.5 <= acc < 0.53


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(0, 1)), min_size=2, max_size=60))
def test_auc_properties(rows):
    scores = np.array([r[0] for r in rows], dtype=float)
    labels = np.array([r[1] for r in rows])
    if labels.all() or not labels.any():
        return
    a = auc_roc(scores, labels)
    assert a == pytest.approx(auc_roc(np.exp(scores) * 3 + 1, labels))
    assert a + auc_roc(scores, 1 - labels) == pytest.approx(1.0)
    _, _, _, acc = best_accuracy_threshold(scores, labels)
    prior = labels.mean()
    assert acc >= max(prior, 1 - prior) - 1e-12
