"""AUC-ROC, its log-complement display transform and best-accuracy thresholds."""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import rankdata

__all__ = ["auc_roc", "neg_log_complement", "best_accuracy_threshold", "NEG_LOG_CAP"]

#: value reported by :func:`neg_log_complement` for a perfect AUC
NEG_LOG_CAP = 16.0


def _check(scores, labels):
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if s.shape != y.shape:
        raise ValueError(f"scores and labels differ in length: {s.shape} vs {y.shape}")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    y = y.astype(bool)
    if y.all() or not y.any():
        raise ValueError("both classes must be present")
    if not np.isfinite(s).all():
        raise ValueError("scores must be finite")
    return s, y


def auc_roc(scores, labels) -> float:
    """Area under the ROC curve via the Mann-Whitney statistic.

    Ties between a positive and a negative count one half.
    """
    s, y = _check(scores, labels)
    ranks = rankdata(s, method="average")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def neg_log_complement(auc: float) -> float:
    """``-log10(1 - auc)``; a perfect AUC maps to :data:`NEG_LOG_CAP`."""
    auc = float(auc)
    if not 0.0 <= auc <= 1.0:
        raise ValueError(f"AUC must lie in [0, 1], got {auc}")
    if auc >= 1.0:
        return NEG_LOG_CAP
    return min(-math.log10(1.0 - auc), NEG_LOG_CAP)


def best_accuracy_threshold(scores, labels):
    """Threshold maximising accuracy when predicting ``score > threshold``.

    Candidates are the midpoints between consecutive distinct scores plus
    ``-inf`` and ``+inf``; ties go to the higher threshold.

    Returns
    -------
    threshold, tpr, fpr, accuracy : float
    """
    s, y = _check(scores, labels)
    uniq = np.unique(s)
    cands = np.concatenate([[-np.inf], (uniq[:-1] + uniq[1:]) / 2.0, [np.inf]])
    order = np.argsort(s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    # number of samples with score <= threshold for every candidate
    below = np.searchsorted(s_sorted, cands, side="right")
    pos_cum = np.concatenate([[0], np.cumsum(y_sorted)])
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    fn = pos_cum[below]
    tn = below - fn
    tp = n_pos - fn
    fp = n_neg - tn
    acc = (tp + tn) / len(y)
    best = len(cands) - 1 - int(np.argmax(acc[::-1]))
    return (float(cands[best]), float(tp[best] / n_pos), float(fp[best] / n_neg),
            float(acc[best]))
