"""Node-pair operators turning two node vectors into one pair vector."""

from __future__ import annotations

from enum import Enum

import numpy as np

from .._utils import check_pairs

__all__ = ["PairOperator", "OPERATORS", "apply_operator"]


class PairOperator(str, Enum):
    AVERAGE = "average"
    HADAMARD = "hadamard"
    WEIGHTED_L1 = "weighted_l1"
    WEIGHTED_L2 = "weighted_l2"


#: tie-breaking order used during operator tuning
OPERATORS = tuple(PairOperator)


def apply_operator(X, pairs, op) -> np.ndarray:
    """Pair features ``x_i o x_j`` for every row of ``pairs``.

    ``X`` is an ``(n, d)`` node embedding (or an object with a ``matrix``
    attribute). All four operators are symmetric in ``(i, j)``.
    """
    op = PairOperator(op)
    X = np.asarray(getattr(X, "matrix", X), dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("node embedding must be a 2-D array")
    try:
        p = check_pairs(pairs, len(X))
    except IndexError as exc:
        raise KeyError(f"node missing from embedding: {exc}") from None
    xi = X[p[:, 0]]
    xj = X[p[:, 1]]
    if op is PairOperator.AVERAGE:
        return (xi + xj) / 2.0
    if op is PairOperator.HADAMARD:
        return xi * xj
    diff = np.abs(xi - xj)
    if op is PairOperator.WEIGHTED_L1:
        return diff
    return diff * diff
