"""Native node embedding methods and an adapter for external programs.

Every method maps a train :class:`~lpbench.graph.Graph` to an
:class:`Embedding` with one row per internal node id. Estimator wrappers
expose the hyperparameters through ``get_params`` / ``set_params`` so
that the pipeline can tune them over grids.
"""

from __future__ import annotations

from .._utils import as_rng
from .base import (AliasTable, Embedding, EmbeddingFormatError, GraphEmbedder, read_embedding,
                   write_embedding)
from .external import (DimensionMismatchError, ExternalExitError, ExternalMethodError,
                       ExternalTimeoutError, MalformedOutputError, MissingNodeError,
                       run_external_method)
from .gf import DivergenceError, GFEmbedder, embed_gf, gf_loss
from .le import EigenConvergenceError, LEEmbedder, embed_le
from .line import LINE_ORDERS, embed_line
from .sgns import NonFiniteLossError, ns_gradient, ns_loss, train_sgns
from .walks import WalkCorpus, generate_walks

__all__ = [
    "Embedding", "EmbeddingFormatError", "read_embedding", "write_embedding", "AliasTable",
    "GraphEmbedder", "embed_gf", "gf_loss", "embed_le", "generate_walks", "WalkCorpus",
    "train_sgns", "ns_loss", "ns_gradient", "embed_line", "run_external_method",
    "GFEmbedder", "LEEmbedder", "Node2VecEmbedder", "LINEEmbedder", "ExternalEmbedder",
    "make_embedder", "NATIVE_METHODS", "DivergenceError", "EigenConvergenceError",
    "NonFiniteLossError", "ExternalMethodError", "ExternalExitError", "ExternalTimeoutError",
    "MalformedOutputError", "DimensionMismatchError", "MissingNodeError", "LINE_ORDERS",
]


class Node2VecEmbedder(GraphEmbedder):
    """Biased walks followed by skip-gram; ``p = q = 1`` gives DeepWalk-style walks."""

    def __init__(self, d=128, num_walks=10, walk_len=80, window=10, p=1.0, q=1.0,
                 negatives=5, lr=0.025, epochs=1, seed=None):
        self.d = d
        self.num_walks = num_walks
        self.walk_len = walk_len
        self.window = window
        self.p = p
        self.q = q
        self.negatives = negatives
        self.lr = lr
        self.epochs = epochs
        self.seed = seed

    def _embed(self, graph):
        rng = as_rng(self.seed)
        corpus = generate_walks(graph, self.num_walks, self.walk_len, self.p, self.q, rng)
        return train_sgns(corpus, self.d, self.window, self.negatives, self.lr, self.epochs,
                          rng)


class LINEEmbedder(GraphEmbedder):
    def __init__(self, d=128, order="joint", rho=0.025, negative_ratio=5, samples=None,
                 seed=None):
        self.d = d
        self.order = order
        self.rho = rho
        self.negative_ratio = negative_ratio
        self.samples = samples
        self.seed = seed

    def _embed(self, graph):
        return embed_line(graph, self.d, self.order, self.rho, self.negative_ratio,
                          self.samples, self.seed)


class ExternalEmbedder(GraphEmbedder):
    """Wraps :func:`run_external_method`; ``seed`` is accepted and ignored."""

    def __init__(self, command="", d=128, timeout=None, workdir=None, seed=None):
        self.command = command
        self.d = d
        self.timeout = timeout
        self.workdir = workdir
        self.seed = seed

    def _embed(self, graph):
        return run_external_method(self.command, graph, self.d, self.workdir, self.timeout)


_NATIVE = {
    "gf": GFEmbedder,
    "le": LEEmbedder,
    "node2vec": Node2VecEmbedder,
    "deepwalk": Node2VecEmbedder,
    "line": LINEEmbedder,
}
NATIVE_METHODS = tuple(_NATIVE)


def make_embedder(algorithm: str, seed=None, **params) -> GraphEmbedder:
    """Instantiate a native embedder by name (``gf``, ``le``, ``node2vec``,
    ``deepwalk``, ``line``) or ``external``."""
    key = algorithm.lower()
    if key == "external":
        return ExternalEmbedder(seed=seed, **params)
    if key not in _NATIVE:
        raise ValueError(f"unknown embedding algorithm {algorithm!r}; "
                         f"choose from {', '.join(NATIVE_METHODS)} or external")
    cls = _NATIVE[key]
    if key == "deepwalk":
        params = {**params, "p": 1.0, "q": 1.0}
    if "seed" in cls().get_params():
        params["seed"] = seed
    return cls(**params)
