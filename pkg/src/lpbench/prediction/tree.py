"""CART decision trees with Gini impurity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["TreeModel", "dt_fit"]

_TIE = 1e-12


@dataclass(frozen=True)
class TreeModel:
    """Binary tree stored as parallel arrays.

    ``feature[k] == -1`` marks a leaf; internal nodes send ``x[feature] <=
    threshold`` to ``left``. ``value`` holds the class-1 fraction.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    max_depth: int
    n_features: int

    @property
    def depth(self) -> int:
        depth = np.zeros(len(self.feature), dtype=int)
        for k in range(len(self.feature)):
            if self.feature[k] >= 0:
                depth[self.left[k]] = depth[k] + 1
                depth[self.right[k]] = depth[k] + 1
        return int(depth.max())

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            f = self.feature[node]
            active = f >= 0
            if not active.any():
                return node
            rows = np.flatnonzero(active)
            go_left = X[rows, f[active]] <= self.threshold[node[rows]]
            node[rows] = np.where(go_left, self.left[node[rows]], self.right[node[rows]])


def _best_split(X, y, min_leaf):
    """Return ``(feature, threshold, score)`` maximising the child purity.

    ``score`` is ``sum_child (pos^2 + neg^2) / n_child``; maximising it is
    equivalent to minimising the weighted Gini impurity. Ties keep the
    lowest feature, then the lowest threshold.
    """
    n = len(y)
    best = (-1, 0.0, -np.inf)
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        # split after position k-1: left = first k samples
        k = np.arange(min_leaf, n - min_leaf + 1)
        k = k[(k > 0) & (k < n)]
        k = k[xs[k - 1] < xs[k]]
        if len(k) == 0:
            continue
        cpos = np.cumsum(ys)
        lp = cpos[k - 1]
        ln = k - lp
        rp = cpos[-1] - lp
        rn = (n - k) - rp
        score = (lp * lp + ln * ln) / k + (rp * rp + rn * rn) / (n - k)
        j = int(np.argmax(score))
        if best[0] < 0 or score[j] > best[2] + _TIE * max(1.0, abs(best[2])):
            best = (f, (xs[k[j] - 1] + xs[k[j]]) / 2.0, float(score[j]))
    return best


def dt_fit(X, y, max_depth: int = 10, min_leaf: int = 5) -> TreeModel:
    """Grow a CART tree on Gini impurity.

    Impure nodes are split while depth allows and both children keep at
    least ``min_leaf`` samples; thresholds are midpoints between
    consecutive distinct feature values.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or len(X) == 0 or len(X) != len(y):
        raise ValueError("need a non-empty 2-D feature array with one label per row")
    if max_depth < 0 or min_leaf < 1:
        raise ValueError("max_depth must be >= 0 and min_leaf >= 1")
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[idx].mean()))
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        yy = y[idx]
        pure = yy.min() == yy.max()
        if pure or depth >= max_depth or len(idx) < 2 * min_leaf:
            continue
        f, thr, _ = _best_split(X[idx], yy, min_leaf)
        if f < 0:
            continue
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return TreeModel(np.array(feature, dtype=np.int64), np.array(threshold),
                     np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                     np.array(value), int(max_depth), X.shape[1])
