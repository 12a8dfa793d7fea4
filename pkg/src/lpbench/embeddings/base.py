"""Embedding container, text format, alias sampling and the estimator base."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numba
import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..graph import Graph

__all__ = ["Embedding", "EmbeddingFormatError", "read_embedding", "write_embedding",
           "AliasTable", "GraphEmbedder", "init_uniform"]


class EmbeddingFormatError(ValueError):
    """Malformed embedding text."""


@dataclass(frozen=True)
class Embedding:
    """``N x d`` node embedding, one row per internal node id."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2:
            raise ValueError(f"embedding matrix must be 2-D, got shape {m.shape}")
        if not np.isfinite(m).all():
            raise ValueError("embedding contains non-finite entries")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.matrix.shape[1]


def write_embedding(emb: Embedding, dest, header: bool = True) -> None:
    """Write ``"N d"`` (optional) then ``"node v1 ... vd"`` per row."""
    buf = io.StringIO()
    if header:
        buf.write(f"{emb.n} {emb.d}\n")
    for i, row in enumerate(emb.matrix.tolist()):
        buf.write(str(i) + " " + " ".join(repr(v) for v in row) + "\n")
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    else:
        dest.write(buf.getvalue())


def _is_header(lines, d):
    tokens = lines[0][1]
    if len(tokens) != 2:
        return False
    try:
        a, b = int(tokens[0]), int(tokens[1])
    except ValueError:
        return False
    if d is not None and b != d:
        return False
    return a == len(lines) - 1 and all(len(t) == b + 1 for _, t in lines[1:])


def parse_embedding_rows(text: str, d: int | None = None):
    """Parse embedding text into ``{node_id: row}``.

    The first line counts as an ``"N d"`` header only when it has two
    integer tokens, ``N`` equals the number of following rows, every
    following row holds ``d`` values and, when ``d`` is given, the second
    token equals it.

    Raises
    ------
    EmbeddingFormatError
        Non-numeric tokens, ragged rows, duplicate ids or non-finite values.
    """
    lines = [(k, ln.split()) for k, ln in enumerate(text.splitlines(), start=1) if ln.strip()]
    if lines and _is_header(lines, d):
        lines = lines[1:]
    rows = {}
    width = None
    for lineno, tokens in lines:
        try:
            node = int(tokens[0])
            vals = [float(t) for t in tokens[1:]]
        except ValueError:
            raise EmbeddingFormatError(f"line {lineno}: non-numeric token") from None
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise EmbeddingFormatError(
                f"line {lineno}: {len(vals)} values where earlier rows have {width}")
        if not np.isfinite(vals).all():
            raise EmbeddingFormatError(f"line {lineno}: non-finite value")
        if node in rows:
            raise EmbeddingFormatError(f"line {lineno}: duplicate node {node}")
        rows[node] = vals
    return rows, width


def read_embedding(source, n: int | None = None) -> Embedding:
    """Read an embedding written by :func:`write_embedding`.

    Rows may come in any order; node ids must cover ``0..n-1``.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    rows, width = parse_embedding_rows(text)
    if not rows:
        raise EmbeddingFormatError("no embedding rows found")
    n = len(rows) if n is None else n
    missing = [i for i in range(n) if i not in rows]
    if missing or len(rows) != n:
        raise EmbeddingFormatError(f"rows do not cover nodes 0..{n - 1}")
    return Embedding(np.array([rows[i] for i in range(n)], dtype=np.float64).reshape(n, width))


def init_uniform(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """Rows uniform in ``[-0.5/d, 0.5/d]`` (word2vec convention)."""
    return rng.uniform(-0.5 / d, 0.5 / d, size=(n, d))


# -- alias sampling ----------------------------------------------------

@numba.njit(cache=True)
def _alias_build(weights):
    k = weights.shape[0]
    prob = np.empty(k, dtype=np.float64)
    alias = np.zeros(k, dtype=np.int64)
    scaled = weights * (k / weights.sum())
    small = np.empty(k, dtype=np.int64)
    large = np.empty(k, dtype=np.int64)
    ns = 0
    nl = 0
    for i in range(k):
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        l_ = large[nl - 1]
        prob[s] = scaled[s]
        alias[s] = l_
        scaled[l_] = scaled[l_] + scaled[s] - 1.0
        if scaled[l_] < 1.0:
            nl -= 1
            small[ns] = l_
            ns += 1
    for t in range(nl):
        prob[large[t]] = 1.0
        alias[large[t]] = large[t]
    for t in range(ns):
        prob[small[t]] = 1.0
        alias[small[t]] = small[t]
    return prob, alias


@numba.njit(cache=True)
def alias_draw(prob, alias):
    """One draw from an alias table using numba's global generator."""
    i = np.random.randint(0, prob.shape[0])
    if np.random.random() < prob[i]:
        return i
    return alias[i]


class AliasTable:
    """Walker/Vose alias table for O(1) sampling from a discrete distribution.

    Parameters
    ----------
    weights : array-like of non-negative floats with a positive sum
    """

    def __init__(self, weights):
        w = np.asarray(weights, dtype=np.float64).ravel()
        if len(w) == 0 or (w < 0).any() or not np.isfinite(w).all() or w.sum() <= 0:
            raise ValueError("alias weights must be finite, non-negative and not all zero")
        self.prob, self.alias = _alias_build(w)

    def probabilities(self) -> np.ndarray:
        """Implied sampling distribution, for checking the construction."""
        k = len(self.prob)
        p = self.prob / k
        np.add.at(p, self.alias, (1.0 - self.prob) / k)
        return p

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        i = rng.integers(0, len(self.prob), size=size)
        keep = rng.random(size) < self.prob[i]
        return np.where(keep, i, self.alias[i])


# -- estimator base ----------------------------------------------------

class GraphEmbedder(BaseEstimator):
    """Base for estimators that map a :class:`Graph` to an :class:`Embedding`.

    Subclasses implement ``_embed(graph) -> ndarray``; ``fit`` stores the
    result in ``embedding_``.
    """

    def _embed(self, graph: Graph) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def fit(self, X: Graph, y=None):
        if not isinstance(X, Graph):
            raise TypeError(f"{type(self).__name__}.fit expects a Graph")
        emb = self._embed(X)
        self.embedding_ = emb if isinstance(emb, Embedding) else Embedding(emb)
        if self.embedding_.n != X.n:
            raise ValueError("embedding row count differs from the graph node count")
        return self

    def transform(self, X=None) -> np.ndarray:
        """Return the fitted embedding matrix."""
        check_is_fitted(self, "embedding_")
        return self.embedding_.matrix

    def fit_transform(self, X: Graph, y=None) -> np.ndarray:
        return self.fit(X).transform()
