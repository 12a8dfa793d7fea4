"""Undirected simple graphs: loading, cleaning and neighbourhood queries.

Graphs are immutable once built. Adjacency is kept in CSR form (``indptr``,
``indices``) with every neighbour list sorted ascending, which keeps
neighbourhood intersections a linear merge.
"""

from __future__ import annotations

import io
import os
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ._utils import check_pairs

__all__ = [
    "Graph",
    "TimestampedEdgeList",
    "EdgeListParseError",
    "load_edge_list",
    "write_edge_list",
    "main_connected_component",
    "neighbors_and_degree",
]

_SPLIT = re.compile(r"[\s,]+")


class EdgeListParseError(ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def _readonly(a):
    a.setflags(write=False)
    return a


class Graph:
    """Undirected simple graph over contiguous node ids ``0..n-1``.

    Parameters
    ----------
    n : int
        Number of nodes.
    edges : array-like of shape (m, 2)
        Undirected edges. Orientation and duplicates are ignored; self-loops
        are rejected.
    ids : array-like of shape (n,), optional
        External id of every internal node. Defaults to ``arange(n)``.
    """

    def __init__(self, n, edges, ids=None):
        n = int(n)
        if n < 0:
            raise ValueError("node count must be non-negative")
        e = check_pairs(edges, n, name="edges")
        if (e[:, 0] == e[:, 1]).any():
            raise ValueError("self-loops are not allowed in a simple graph")
        e = np.unique(np.sort(e, axis=1), axis=0)
        self.n = n
        self.edge_count = int(len(e))
        both = np.concatenate([e, e[:, ::-1]]) if len(e) else e
        order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else np.empty(0, int)
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=n) if len(both) else np.zeros(n, np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        self.indptr = _readonly(indptr)
        self.indices = _readonly(np.ascontiguousarray(both[:, 1], dtype=np.int64))
        self._edges = _readonly(e)
        if ids is None:
            ids = np.arange(n, dtype=np.int64)
        ids = np.asarray(ids, dtype=np.int64)
        if ids.shape != (n,):
            raise ValueError("ids must have one entry per node")
        self.ids = _readonly(ids.copy())
        self._connected = None

    # -- queries -------------------------------------------------------
    @property
    def id_map(self) -> dict:
        """Mapping from external id to internal id."""
        return {int(x): i for i, x in enumerate(self.ids)}

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def adjacency(self) -> list:
        return [self.neighbors(i) for i in range(self.n)]

    def neighbors(self, i) -> np.ndarray:
        self._check_node(i)
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degree(self, i) -> int:
        self._check_node(i)
        return int(self.indptr[i + 1] - self.indptr[i])

    def edges(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` array, ``i < j``, sorted lexicographically."""
        return self._edges

    def edge_keys(self) -> np.ndarray:
        """Sorted int64 keys ``i * n + j`` of the canonical edges."""
        return self._edges[:, 0] * np.int64(self.n) + self._edges[:, 1]

    def has_edges(self, pairs) -> np.ndarray:
        p = np.sort(check_pairs(pairs, self.n), axis=1)
        keys = p[:, 0] * np.int64(self.n) + p[:, 1]
        ek = self.edge_keys()
        pos = np.searchsorted(ek, keys)
        pos = np.minimum(pos, max(len(ek) - 1, 0))
        return (ek[pos] == keys) if len(ek) else np.zeros(len(keys), bool)

    def to_csr(self) -> csr_matrix:
        data = np.ones(len(self.indices), dtype=np.float64)
        return csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def is_connected(self) -> bool:
        if self._connected is None:
            if self.n == 0:
                self._connected = False
            else:
                ncomp, _ = connected_components(self.to_csr(), directed=False)
                self._connected = bool(ncomp == 1)
        return self._connected

    # -- derived graphs ------------------------------------------------
    def subgraph(self, nodes) -> "Graph":
        """Induced subgraph on ``nodes``, relabelled in ascending id order."""
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[nodes] = np.arange(len(nodes))
        e = remap[self._edges]
        e = e[(e >= 0).all(axis=1)]
        return Graph(len(nodes), e, ids=self.ids[nodes])

    def with_edges(self, edges) -> "Graph":
        """Graph on the same node set with a different edge set."""
        return Graph(self.n, edges, ids=self.ids)

    def _check_node(self, i):
        if not 0 <= int(i) < self.n:
            raise IndexError(f"node {i} outside 0..{self.n - 1}")

    def __repr__(self):
        return f"Graph(n={self.n}, edge_count={self.edge_count})"


@dataclass(frozen=True)
class TimestampedEdgeList:
    """Cleaned edge list with one integer timestamp per undirected edge.

    ``edges`` holds rows ``(i, j, t)`` with ``i < j`` in internal ids.
    """

    n: int
    edges: np.ndarray
    ids: np.ndarray = field(repr=False)

    def static_graph(self) -> Graph:
        return Graph(self.n, self.edges[:, :2], ids=self.ids)

    def restrict(self, nodes) -> "TimestampedEdgeList":
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[nodes] = np.arange(len(nodes))
        pairs = remap[self.edges[:, :2]]
        keep = (pairs >= 0).all(axis=1)
        rows = np.column_stack([pairs[keep], self.edges[keep, 2]])
        return TimestampedEdgeList(len(nodes), rows, self.ids[nodes])

    def main_connected_component(self) -> "TimestampedEdgeList":
        nodes = _largest_component_nodes(self.static_graph())
        if len(nodes) == self.n:
            return self
        return self.restrict(nodes)


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8"), True
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8")), True
    if isinstance(source, io.TextIOBase):
        return source, False
    # binary stream
    return io.TextIOWrapper(source, encoding="utf-8"), False


def load_edge_list(source, has_timestamps: bool = False):
    """Parse an edge list into a :class:`Graph` or :class:`TimestampedEdgeList`.

    Each non-empty line not starting with ``#`` must hold two integer tokens
    (three when ``has_timestamps``) separated by whitespace or commas.
    Self-loops are dropped and duplicate undirected edges collapsed, keeping
    the earliest timestamp. Internal ids follow ascending external id.

    Raises
    ------
    EdgeListParseError
        On a malformed line (the message carries the line number) or when
        no edge survives cleaning.
    """
    ncols = 3 if has_timestamps else 2
    fh, owned = _open_text(source)
    rows = []
    try:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = [t for t in _SPLIT.split(line) if t]
            if len(tokens) != ncols:
                raise EdgeListParseError(
                    f"expected {ncols} tokens, found {len(tokens)}: {line!r}", lineno)
            try:
                vals = [int(t) for t in tokens]
            except ValueError:
                raise EdgeListParseError(f"non-integer token in {line!r}", lineno) from None
            if vals[0] < 0 or vals[1] < 0:
                raise EdgeListParseError("node ids must be non-negative", lineno)
            if has_timestamps and vals[2] < 0:
                raise EdgeListParseError("timestamps must be non-negative", lineno)
            rows.append(vals)
    finally:
        if owned:
            fh.close()

    arr = np.asarray(rows, dtype=np.int64).reshape(-1, ncols)
    arr = arr[arr[:, 0] != arr[:, 1]]
    if len(arr) == 0:
        raise EdgeListParseError("edge list contains no edges after cleaning")
    ext, inv = np.unique(arr[:, :2], return_inverse=True)
    pairs = np.sort(inv.reshape(-1, 2), axis=1)
    n = len(ext)
    if not has_timestamps:
        return Graph(n, pairs, ids=ext)
    # keep the earliest timestamp per undirected edge
    keys = pairs[:, 0] * np.int64(n) + pairs[:, 1]
    order = np.lexsort((arr[:, 2], keys))
    keys, pairs, ts = keys[order], pairs[order], arr[order, 2]
    first = np.ones(len(keys), dtype=bool)
    first[1:] = keys[1:] != keys[:-1]
    out = np.column_stack([pairs[first], ts[first]])
    return TimestampedEdgeList(n, out, ext)


def write_edge_list(g, dest) -> None:
    """Write ``g`` as ``"i j"`` lines in internal ids, ``i < j``, sorted."""
    text = "".join(f"{i} {j}\n" for i, j in g.edges().tolist())
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        dest.write(text)


def _largest_component_nodes(g: Graph) -> np.ndarray:
    ncomp, labels = connected_components(g.to_csr(), directed=False)
    if ncomp == 1:
        return np.arange(g.n)
    sizes = np.bincount(labels, minlength=ncomp)
    lowest = np.full(ncomp, g.n, dtype=np.int64)
    np.minimum.at(lowest, labels, np.arange(g.n))
    best = int(np.lexsort((lowest, -sizes))[0])
    return np.flatnonzero(labels == best)


def main_connected_component(g: Graph) -> Graph:
    """Largest connected component of ``g`` (ties: lowest contained id).

    The result is relabelled monotonically so its ``ids`` compose with
    those of ``g``; a connected input is returned unchanged.
    """
    if g.n == 0:
        raise ValueError("empty graph")
    nodes = _largest_component_nodes(g)
    if len(nodes) == g.n:
        return g
    return g.subgraph(nodes)


def neighbors_and_degree(g: Graph, i):
    nbrs = g.neighbors(i)
    return nbrs, len(nbrs)
