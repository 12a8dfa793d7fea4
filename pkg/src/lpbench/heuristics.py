"""Neighbourhood-based link prediction scores.

Scores always come from the graph handed to :func:`heuristic_score` or
:meth:`HeuristicFeatures.fit`, which in an evaluation is the train graph.
"""

from __future__ import annotations

from enum import Enum

import numba
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._utils import check_pairs
from .graph import Graph

__all__ = ["HeuristicKind", "heuristic_score", "ne_heuristics_features", "HeuristicFeatures",
           "write_scores"]


class HeuristicKind(str, Enum):
    CN = "CN"
    JC = "JC"
    AA = "AA"
    RAI = "RAI"
    PA = "PA"


# column order of the stacked feature vector
_ORDER = (HeuristicKind.CN, HeuristicKind.JC, HeuristicKind.AA, HeuristicKind.RAI,
          HeuristicKind.PA)


@numba.njit(cache=True)
def _score_kernel(indptr, indices, pairs, out):
    for r in range(pairs.shape[0]):
        i = pairs[r, 0]
        j = pairs[r, 1]
        a, a_end = indptr[i], indptr[i + 1]
        b, b_end = indptr[j], indptr[j + 1]
        di = a_end - a
        dj = b_end - b
        cn = 0
        aa = 0.0
        rai = 0.0
        while a < a_end and b < b_end:
            x = indices[a]
            y = indices[b]
            if x == y:
                dk = indptr[x + 1] - indptr[x]
                cn += 1
                aa += 1.0 / np.log(dk)
                rai += 1.0 / dk
                a += 1
                b += 1
            elif x < y:
                a += 1
            else:
                b += 1
        union = di + dj - cn
        out[r, 0] = cn
        out[r, 1] = cn / union if union > 0 else 0.0
        out[r, 2] = aa
        out[r, 3] = rai
        out[r, 4] = float(di) * float(dj)


def _all_scores(g: Graph, pairs) -> np.ndarray:
    p = check_pairs(pairs, g.n)
    out = np.zeros((len(p), 5), dtype=np.float64)
    if len(p):
        _score_kernel(g.indptr, g.indices, np.ascontiguousarray(p), out)
    return out


def heuristic_score(g_train: Graph, pairs, kind) -> np.ndarray:
    """Score node pairs with one neighbourhood heuristic.

    Parameters
    ----------
    g_train : Graph
        Graph whose neighbourhoods define the scores.
    pairs : array-like of shape (k, 2)
    kind : HeuristicKind or str
        One of CN, JC, AA, RAI, PA. AA uses the natural logarithm.

    Returns
    -------
    ndarray of shape (k,)
    """
    kind = HeuristicKind(kind)
    return _all_scores(g_train, pairs)[:, _ORDER.index(kind)]


def ne_heuristics_features(g_train: Graph, pairs) -> np.ndarray:
    """Per-pair vectors ``(CN, JC, AA, RAI, PA)``, shape ``(k, 5)``."""
    return _all_scores(g_train, pairs)


class HeuristicFeatures(TransformerMixin, BaseEstimator):
    """Transformer from node pairs to heuristic scores on a fitted graph.

    ``fit`` takes the train graph; ``transform`` maps an ``(k, 2)`` array of
    node pairs to one column per requested heuristic.

    Parameters
    ----------
    kinds : sequence of str, default all five in CN, JC, AA, RAI, PA order
    """

    def __init__(self, kinds=("CN", "JC", "AA", "RAI", "PA")):
        self.kinds = kinds

    def fit(self, X: Graph, y=None):
        if not isinstance(X, Graph):
            raise TypeError("HeuristicFeatures.fit expects a Graph")
        self.columns_ = [_ORDER.index(HeuristicKind(k)) for k in self.kinds]
        self.graph_ = X
        return self

    def transform(self, X):
        check_is_fitted(self, "graph_")
        return _all_scores(self.graph_, X)[:, self.columns_]


def write_scores(pairs, scores, dest) -> None:
    """Write ``"i j score"`` lines for inspection."""
    lines = "".join(f"{i} {j} {s!r}\n" for (i, j), s in zip(np.asarray(pairs).tolist(),
                                                         np.asarray(scores).tolist()))
    if hasattr(dest, "write"):
        dest.write(lines)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(lines)
