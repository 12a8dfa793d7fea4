"""Laplacian eigenmaps on the normalized graph Laplacian."""

from __future__ import annotations

import numpy as np
from scipy.sparse import diags
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from ..graph import Graph
from .base import Embedding, GraphEmbedder

__all__ = ["embed_le", "EigenConvergenceError", "LEEmbedder", "DENSE_LIMIT", "RESIDUAL_TOL"]

#: graphs up to this many nodes are solved with a dense eigendecomposition
DENSE_LIMIT = 500
RESIDUAL_TOL = 1e-6


class EigenConvergenceError(ArithmeticError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def _fix_signs(Y):
    # deterministic orientation: largest-magnitude entry of each column positive
    idx = np.argmax(np.abs(Y), axis=0)
    signs = np.sign(Y[idx, np.arange(Y.shape[1])])
    signs[signs == 0] = 1.0
    return Y * signs


def embed_le(g_train: Graph, d: int = 128, max_iters: int | None = None,
             return_eigenvalues: bool = False):
    """Solve ``L y = lambda D y`` and keep the ``d`` smallest non-trivial pairs.

    The problem is solved through the symmetric normalized Laplacian
    ``I - D^-1/2 A D^-1/2``; its eigenvectors ``u`` map back to
    ``y = D^-1/2 u``, which are orthonormal under ``<a, b>_D = a^T D b``.
    The constant vector (eigenvalue 0) is dropped. Small graphs use a dense
    solver, larger ones ARPACK (Lanczos) on the shifted operator.

    Raises
    ------
    ValueError
        If the graph is disconnected or ``d >= n``.
    EigenConvergenceError
        If the solver stops early or a residual
        ``||L y - lambda D y|| / ||y||`` exceeds 1e-6.
    """
    n = g_train.n
    if not 1 <= d < n:
        raise ValueError(f"need 1 <= d < n, got d={d}, n={n}")
    if not g_train.is_connected():
        raise ValueError("Laplacian eigenmaps needs a connected graph")
    A = g_train.to_csr()
    deg = g_train.degrees.astype(np.float64)
    s = 1.0 / np.sqrt(deg)
    N = diags(s) @ A @ diags(s)  # normalized adjacency, spectrum in [-1, 1]
    k = d + 1
    if n <= DENSE_LIMIT or k >= n - 1:
        vals, vecs = np.linalg.eigh(np.eye(n) - N.toarray())
        vals, vecs = vals[:k], vecs[:, :k]
    else:
        # largest eigenvalues of I + N are the smallest of I - N
        shifted = N + diags(np.ones(n))
        v0 = np.random.default_rng(0).uniform(0.5, 1.5, size=n)
        try:
            mu, vecs = eigsh(shifted, k=k, which="LA", v0=v0, tol=1e-10,
                             maxiter=max_iters)
        except ArpackNoConvergence as exc:
            raise EigenConvergenceError(
                f"eigensolver stopped after {len(exc.eigenvalues)} of {k} eigenpairs",
                float("inf")) from None
        order = np.argsort(-mu, kind="stable")
        vals, vecs = 2.0 - mu[order], vecs[:, order]
    Y = vecs * s[:, None]
    # drop the trivial eigenvector (first column: smallest eigenvalue)
    vals, Y = vals[1:], Y[:, 1:]
    Y = _fix_signs(Y)
    L = diags(deg) - A
    resid = np.linalg.norm(L @ Y - (deg[:, None] * Y) * vals, axis=0)
    resid = resid / np.linalg.norm(Y, axis=0)
    worst = float(resid.max())
    if worst > RESIDUAL_TOL:
        raise EigenConvergenceError(
            f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_TOL:g}", worst)
    emb = Embedding(Y)
    return (emb, vals) if return_eigenvalues else emb


class LEEmbedder(GraphEmbedder):
    def __init__(self, d=128):
        self.d = d

    def _embed(self, graph):
        return embed_le(graph, self.d)
