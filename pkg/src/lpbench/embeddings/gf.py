"""Graph factorization by per-edge stochastic gradient descent."""

from __future__ import annotations

import numba
import numpy as np

from .._utils import as_rng
from ..graph import Graph
from .base import Embedding, GraphEmbedder, init_uniform

__all__ = ["embed_gf", "gf_loss", "GFEmbedder", "DivergenceError"]


class DivergenceError(FloatingPointError):
    def __init__(self, message, epoch):
        super().__init__(message)
        self.epoch = epoch


def gf_loss(Z, edges, reg) -> float:
    """``sum_(i,j) (1 - <z_i, z_j>)^2 + reg / 2 * ||Z||_F^2``."""
    e = np.asarray(edges, dtype=np.int64)
    r = 1.0 - np.einsum("ij,ij->i", Z[e[:, 0]], Z[e[:, 1]])
    return float(r @ r + 0.5 * reg * np.sum(Z * Z))


@numba.njit(cache=True)
def _gf_epoch(Z, edges, order, inv_deg, reg, lr):
    d = Z.shape[1]
    gi = np.empty(d)
    for t in range(order.shape[0]):
        k = order[t]
        i = edges[k, 0]
        j = edges[k, 1]
        dot = 0.0
        for c in range(d):
            dot += Z[i, c] * Z[j, c]
        err = 1.0 - dot
        # the node regulariser is spread evenly over a node's incident edges
        for c in range(d):
            gi[c] = -2.0 * err * Z[j, c] + reg * inv_deg[i] * Z[i, c]
        for c in range(d):
            gj = -2.0 * err * Z[i, c] + reg * inv_deg[j] * Z[j, c]
            Z[j, c] -= lr * gj
            Z[i, c] -= lr * gi[c]


def embed_gf(g_train: Graph, d: int = 128, reg: float = 0.1, lr: float = 0.01,
             epochs: int = 100, seed=None, return_history: bool = False):
    """Factorize the adjacency so that ``<z_i, z_j>`` is close to 1 on edges.

    Each epoch visits every training edge once in a freshly shuffled order
    and updates both endpoints.

    Parameters
    ----------
    g_train : Graph
    d : int
        Embedding dimension.
    reg : float
        L2 strength ``lambda`` on the node vectors.
    lr : float
    epochs : int
    seed : int or Generator, optional
    return_history : bool
        Also return the full objective after every epoch.

    Raises
    ------
    DivergenceError
        When an update produces a non-finite entry; ``epoch`` is 1-based.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if reg < 0:
        raise ValueError("reg must be non-negative")
    rng = as_rng(seed)
    Z = init_uniform(rng, g_train.n, d)
    edges = np.ascontiguousarray(g_train.edges())
    deg = g_train.degrees.astype(np.float64)
    inv_deg = np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)
    history = []
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(edges))
        _gf_epoch(Z, edges, order, inv_deg, float(reg), float(lr))
        if not np.isfinite(Z).all():
            raise DivergenceError(f"graph factorization diverged in epoch {epoch}", epoch)
        if return_history:
            history.append(gf_loss(Z, edges, reg))
    emb = Embedding(Z)
    return (emb, history) if return_history else emb


class GFEmbedder(GraphEmbedder):
    def __init__(self, d=128, reg=0.1, lr=0.01, epochs=100, seed=None):
        self.d = d
        self.reg = reg
        self.lr = lr
        self.epochs = epochs
        self.seed = seed

    def _embed(self, graph):
        return embed_gf(graph, self.d, self.reg, self.lr, self.epochs, self.seed)
