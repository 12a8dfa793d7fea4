"""LINE: first- and second-order proximity by edge sampling."""

from __future__ import annotations

import numba
import numpy as np

from .._utils import as_rng, kernel_seed
from ..graph import Graph
from .base import AliasTable, Embedding, alias_draw, init_uniform
from .sgns import LR_FLOOR, NonFiniteLossError, _ns_update

__all__ = ["embed_line", "LINE_ORDERS"]

LINE_ORDERS = ("1", "2", "joint")
_CHUNKS = 10


@numba.njit(cache=True)
def _line_chunk(U, V, src, dst, eprob, ealias, nprob, nalias, n_samples, offset, total,
                negatives, rho0, seed):
    np.random.seed(seed)
    buf = np.empty(U.shape[1])
    negs = np.empty(negatives, dtype=np.int64)
    loss = 0.0
    for t in range(n_samples):
        frac = 1.0 - (offset + t) / total
        rho = rho0 * max(frac, LR_FLOOR)
        e = alias_draw(eprob, ealias)
        # undirected edges are used in both directions
        if np.random.random() < 0.5:
            i, j = src[e], dst[e]
        else:
            i, j = dst[e], src[e]
        k = 0
        for _ in range(negatives):
            cand = alias_draw(nprob, nalias)
            if cand != i and cand != j:
                negs[k] = cand
                k += 1
        loss += _ns_update(U, V, i, j, negs, k, rho, buf)
    return loss


def _train_order(g, d, order, rho, negative_ratio, budget, rng):
    U = init_uniform(rng, g.n, d)
    # first order has no context vectors: the node vectors play both roles
    V = U if order == 1 else np.zeros((g.n, d))
    edges = g.edges()
    src = np.ascontiguousarray(edges[:, 0])
    dst = np.ascontiguousarray(edges[:, 1])
    edge_table = AliasTable(np.ones(len(edges)))
    noise = AliasTable(g.degrees.astype(np.float64) ** 0.75)
    sizes = np.diff(np.linspace(0, budget, _CHUNKS + 1).astype(np.int64))
    offset = 0
    for chunk, size in enumerate(sizes, start=1):
        loss = _line_chunk(U, V, src, dst, edge_table.prob, edge_table.alias, noise.prob,
                           noise.alias, int(size), offset, float(budget), int(negative_ratio),
                           float(rho), kernel_seed(rng))
        offset += int(size)
        if not np.isfinite(loss) or not np.isfinite(U).all():
            raise NonFiniteLossError(f"LINE loss became non-finite in chunk {chunk}")
    return U


def _unit_rows(M):
    norms = np.linalg.norm(M, axis=1, keepdims=True)
    return M / np.where(norms > 0, norms, 1.0)


def embed_line(g_train: Graph, d: int = 128, order="joint", rho: float = 0.025,
               negative_ratio: int = 5, samples: int | None = None, seed=None) -> Embedding:
    """Edge-sampling LINE embedding.

    Parameters
    ----------
    order : {"1", "2", "joint"}
        ``"joint"`` trains a ``d/2`` first-order and a ``d/2`` second-order
        model and concatenates their row-normalised vectors.
    rho : float
        Initial learning rate, decayed linearly to ``1e-4 * rho``.
    negative_ratio : int
        Negative samples per positive edge; noise is degree^0.75. Draws
        that hit either endpoint are skipped.
    samples : int, optional
        Edge samples per model; defaults to ``100 * |E_train|``.
    """
    order = str(order)
    if order not in LINE_ORDERS:
        raise ValueError(f"order must be one of {LINE_ORDERS}, got {order!r}")
    if rho <= 0:
        raise ValueError("rho must be positive")
    if g_train.edge_count == 0:
        raise ValueError("LINE needs at least one edge")
    if order == "joint" and d % 2:
        raise ValueError("joint LINE needs an even dimension")
    budget = int(samples) if samples is not None else 100 * g_train.edge_count
    rng = as_rng(seed)
    if order == "joint":
        first = _train_order(g_train, d // 2, 1, rho, negative_ratio, budget, rng)
        second = _train_order(g_train, d // 2, 2, rho, negative_ratio, budget, rng)
        return Embedding(np.hstack([_unit_rows(first), _unit_rows(second)]))
    return Embedding(_train_order(g_train, d, int(order), rho, negative_ratio, budget, rng))
