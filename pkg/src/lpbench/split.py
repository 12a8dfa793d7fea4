"""Train/test edge splits, non-edge sampling and validation splits.

Four strategies are provided:

``random``
    Drop a random ``(1 - f)`` share of the edges, keep the main connected
    component of what remains as the train graph and retain only those test
    edges whose endpoints both survive.
``st``
    Keep a uniformly random spanning tree (Wilson's algorithm) and fill up
    with uniformly chosen extra edges.
``dft``
    Same fill-up, but the tree is a depth-first traversal tree rooted at
    node 0 with neighbours visited in ascending order.
``timestamp``
    Move the most recent edges to the test set, skipping any whose removal
    would disconnect the train graph.

All pairs of a split are expressed in the node ids of its ``train_graph``;
for the ``random`` strategy these differ from the ids of the input graph.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass

import numba
import numpy as np

from ._utils import as_rng, check_fraction, check_pairs, kernel_seed, keys_to_pairs, pair_keys
from .graph import Graph, TimestampedEdgeList, _largest_component_nodes

__all__ = [
    "STRATEGIES",
    "EdgePartition",
    "EdgeSplit",
    "SplitError",
    "LeakageError",
    "wilson_ust",
    "dfs_tree",
    "split_edges",
    "split_timestamp",
    "sample_non_edges",
    "make_split",
    "validation_split",
    "check_no_leakage",
    "save_split",
    "load_split_files",
]

STRATEGIES = ("random", "st", "dft", "timestamp")
VALIDATION_FRACTION = 0.9


class SplitError(ValueError):
    pass


class LeakageError(RuntimeError):
    """A test pair is visible to a training stage."""


@dataclass(frozen=True)
class EdgePartition:
    """Edge-level result of a split, before non-edges are drawn."""

    e_train: np.ndarray
    e_test: np.ndarray
    train_graph: Graph
    graph: Graph
    strategy: str
    f: float
    node_loss: float = 0.0
    train_times: np.ndarray | None = None


@dataclass(frozen=True)
class EdgeSplit:
    """Train/test edges and non-edges for one link prediction experiment.

    Attributes
    ----------
    e_train, e_test, d_train, d_test : ndarray of shape (k, 2)
        Canonical (``i < j``) node pairs in ``train_graph`` ids.
    train_graph : Graph
        Graph spanned by ``e_train``; the only structure training may see.
    graph : Graph
        Input graph restricted to the train graph's nodes, in the same ids.
        Used solely to exclude true edges from ``d_test``.
    node_loss : float
        Fraction of input nodes absent from the train graph.
    """

    e_train: np.ndarray
    e_test: np.ndarray
    d_train: np.ndarray
    d_test: np.ndarray
    strategy: str
    f: float
    seed: int | None
    train_graph: Graph
    graph: Graph
    node_loss: float = 0.0
    train_times: np.ndarray | None = None

    @property
    def actual_f(self) -> float:
        total = len(self.e_train) + len(self.e_test)
        return len(self.e_train) / total if total else float("nan")

    def train_pairs(self):
        """Stacked train pairs and labels (edges first, then non-edges)."""
        pairs = np.concatenate([self.e_train, self.d_train])
        labels = np.concatenate([np.ones(len(self.e_train)), np.zeros(len(self.d_train))])
        return pairs, labels

    def test_pairs(self):
        pairs = np.concatenate([self.e_test, self.d_test])
        labels = np.concatenate([np.ones(len(self.e_test)), np.zeros(len(self.d_test))])
        return pairs, labels


# -- spanning trees ------------------------------------------------------

@numba.njit(cache=True)
def _wilson_kernel(indptr, indices, root, seed):
    np.random.seed(seed)
    n = len(indptr) - 1
    in_tree = np.zeros(n, np.bool_)
    nxt = np.full(n, -1, np.int64)
    in_tree[root] = True
    for start in range(n):
        u = start
        while not in_tree[u]:
            lo = indptr[u]
            deg = indptr[u + 1] - lo
            # overwriting nxt[u] on revisits performs the loop erasure
            nxt[u] = indices[lo + np.random.randint(0, deg)]
            u = nxt[u]
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
    return nxt


def _tree_edges(parent: np.ndarray) -> np.ndarray:
    child = np.flatnonzero(parent >= 0)
    e = np.column_stack([child, parent[child]])
    e = np.sort(e, axis=1)
    return e[np.lexsort((e[:, 1], e[:, 0]))]


def wilson_ust(g: Graph, seed=None) -> np.ndarray:
    """Uniformly random spanning tree of a connected graph.

    Uses loop-erased random walks from every node not yet in the tree
    towards the tree (Wilson's algorithm), rooted at a random node.

    Returns
    -------
    ndarray of shape (n - 1, 2)
        Canonical tree edges sorted lexicographically.
    """
    if not g.is_connected():
        raise SplitError("a spanning tree requires a connected graph")
    rng = as_rng(seed)
    root = int(rng.integers(g.n))
    parent = _wilson_kernel(g.indptr, g.indices, root, kernel_seed(rng))
    return _tree_edges(parent)


def dfs_tree(g: Graph, root: int = 0) -> np.ndarray:
    """Depth-first traversal tree from ``root``, neighbours in ascending order."""
    if not g.is_connected():
        raise SplitError("a spanning tree requires a connected graph")
    indptr, indices = g.indptr, g.indices
    parent = np.full(g.n, -1, dtype=np.int64)
    visited = np.zeros(g.n, dtype=bool)
    cursor = indptr[:-1].copy()
    visited[root] = True
    stack = [root]
    while stack:
        u = stack[-1]
        end = indptr[u + 1]
        c = cursor[u]
        while c < end and visited[indices[c]]:
            c += 1
        cursor[u] = c
        if c == end:
            stack.pop()
            continue
        v = int(indices[c])
        visited[v] = True
        parent[v] = u
        stack.append(v)
    return _tree_edges(parent)


# -- edge partitions -----------------------------------------------------

def _relabel_to(g: Graph, nodes: np.ndarray, *pair_sets):
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[nodes] = np.arange(len(nodes))
    out = []
    for p in pair_sets:
        q = remap[p] if len(p) else np.empty((0, 2), np.int64)
        out.append(np.sort(q, axis=1))
    return remap, out


def _sorted_pairs(p):
    if len(p) == 0:
        return np.empty((0, 2), np.int64)
    return p[np.lexsort((p[:, 1], p[:, 0]))]


def split_edges(g: Graph, strategy: str, f: float, seed=None) -> EdgePartition:
    """Split the edges of ``g`` into train and test sets.

    Parameters
    ----------
    g : Graph
        Connected input graph (normally its main connected component).
    strategy : {"random", "st", "dft"}
    f : float
        Train fraction ``|E_train| / |E|`` in (0, 1).
    seed : int or Generator, optional

    Returns
    -------
    EdgePartition
    """
    f = check_fraction(f)
    rng = as_rng(seed)
    m = g.edge_count
    edges = g.edges()
    if strategy == "random":
        n_test = int(round((1.0 - f) * m))
        test_idx = np.sort(rng.choice(m, size=n_test, replace=False))
        is_test = np.zeros(m, dtype=bool)
        is_test[test_idx] = True
        remaining = g.with_edges(edges[~is_test])
        nodes = _largest_component_nodes(remaining)
        in_train = np.zeros(g.n, dtype=bool)
        in_train[nodes] = True
        rem = edges[~is_test]
        rem = rem[in_train[rem[:, 0]] & in_train[rem[:, 1]]]
        prelim = edges[is_test]
        refined = prelim[in_train[prelim[:, 0]] & in_train[prelim[:, 1]]]
        _, (e_train, e_test) = _relabel_to(g, nodes, rem, refined)
        graph = g.subgraph(nodes)
        train_graph = Graph(len(nodes), e_train, ids=graph.ids)
        return EdgePartition(_sorted_pairs(e_train), _sorted_pairs(e_test), train_graph,
                             graph, strategy, f, node_loss=1.0 - len(nodes) / g.n)

    if strategy not in ("st", "dft"):
        raise SplitError(f"unknown edge split strategy {strategy!r}")
    n_train = int(round(f * m))
    if n_train < g.n - 1:
        need = (g.n - 1) / m
        raise SplitError(
            f"train fraction {f} keeps {n_train} edges but a connected train graph needs "
            f"{g.n - 1}; use f >= {need:.4f} (e.g. a 35-65 split on sparse graphs)")
    tree = wilson_ust(g, rng) if strategy == "st" else dfs_tree(g, 0)
    tree_keys = pair_keys(tree, g.n)
    all_keys = g.edge_keys()
    in_tree = np.isin(all_keys, tree_keys, assume_unique=True)
    rest = np.flatnonzero(~in_tree)
    extra = rng.choice(rest, size=n_train - len(tree), replace=False)
    is_train = in_tree.copy()
    is_train[extra] = True
    e_train = edges[is_train]
    e_test = edges[~is_train]
    return EdgePartition(e_train, e_test, g.with_edges(e_train), g, strategy, f)


@numba.njit(cache=True)
def _kruskal_keep(pairs, n):
    parent = np.arange(n)
    keep = np.zeros(len(pairs), np.bool_)
    for k in range(len(pairs)):
        a = pairs[k, 0]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = pairs[k, 1]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a != b:
            parent[a] = b
            keep[k] = True
    return keep


def split_timestamp(tg: TimestampedEdgeList, f: float) -> EdgePartition:
    """Move the most recent edges to the test set while staying connected.

    Edges are visited newest first (timestamp ties: canonical edge order)
    and moved to the test set unless that would disconnect the remaining
    train graph, until ``round((1 - f) * |E|)`` test edges are collected.
    Emits a ``UserWarning`` with the achieved fraction when the budget
    cannot be met.

    Greedy newest-first deletion of non-bridges keeps exactly the edges of
    the spanning tree that Kruskal's algorithm builds oldest first, so the
    bridge checks reduce to one union-find pass.
    """
    f = check_fraction(f)
    g = tg.static_graph()
    if not g.is_connected():
        raise SplitError("timestamp split requires a connected graph")
    m = len(tg.edges)
    budget = int(round((1.0 - f) * m))
    rows = tg.edges
    newest_first = np.lexsort((rows[:, 1], rows[:, 0], -rows[:, 2]))
    ordered = rows[newest_first]
    tree = _kruskal_keep(np.ascontiguousarray(ordered[::-1, :2]), tg.n)[::-1]
    removable = np.flatnonzero(~tree)[:budget]
    if len(removable) < budget:
        warnings.warn(
            f"timestamp split reached only {len(removable)} of {budget} test edges "
            f"without disconnecting the train graph; actual f = {1 - len(removable) / m:.4f}",
            stacklevel=2)
    is_test = np.zeros(m, dtype=bool)
    is_test[removable] = True
    train_rows = ordered[~is_test]
    train_rows = train_rows[np.lexsort((train_rows[:, 1], train_rows[:, 0]))]
    e_train = train_rows[:, :2]
    e_test = _sorted_pairs(ordered[is_test, :2])
    return EdgePartition(e_train, e_test, g.with_edges(e_train), g, "timestamp", f,
                         train_times=train_rows[:, 2])


# -- non-edges -----------------------------------------------------------

def _draw_pairs(n, forbidden, count, rng, what):
    """``count`` distinct uniformly random node pairs outside ``forbidden``."""
    total = n * (n - 1) // 2
    forbidden = np.unique(forbidden)
    available = total - len(forbidden)
    if count > available:
        raise SplitError(f"cannot draw {count} {what}: only {available} admissible pairs")
    if count == 0:
        return np.empty(0, dtype=np.int64)
    if len(forbidden) > 0.5 * total:
        iu, ju = np.triu_indices(n, k=1)
        keys = iu.astype(np.int64) * n + ju
        keys = keys[~np.isin(keys, forbidden, assume_unique=True)]
        return keys[rng.permutation(len(keys))[:count]]
    chosen = np.empty(0, dtype=np.int64)
    while len(chosen) < count:
        need = count - len(chosen)
        batch = max(2 * need, 1024)
        i = rng.integers(n, size=batch)
        j = rng.integers(n, size=batch)
        ok = i != j
        a, b = np.minimum(i[ok], j[ok]), np.maximum(i[ok], j[ok])
        keys = a.astype(np.int64) * n + b
        keys = keys[~np.isin(keys, forbidden)]
        keys = keys[~np.isin(keys, chosen)]
        _, first = np.unique(keys, return_index=True)
        keys = keys[np.sort(first)]
        chosen = np.concatenate([chosen, keys[:need]])
    return chosen


def sample_non_edges(g: Graph, e_train, e_test, n_train=None, n_test=None, seed=None,
                     exclude_test_from_train: bool = False):
    """Draw train and test non-edges under the open-world assumption.

    Train non-edges avoid ``e_train`` only, so they may coincide with test
    edges unless ``exclude_test_from_train`` is set. Test non-edges avoid
    every edge of ``g`` and every train non-edge.

    Parameters
    ----------
    g : Graph
        Complete graph in the same ids as the pairs.
    n_train, n_test : int, optional
        Defaults to ``len(e_train)`` and ``len(e_test)``.

    Returns
    -------
    d_train, d_test : ndarray of shape (k, 2)
    """
    rng = as_rng(seed)
    n = g.n
    e_train = check_pairs(e_train, n, "e_train")
    e_test = check_pairs(e_test, n, "e_test")
    n_train = len(e_train) if n_train is None else int(n_train)
    n_test = len(e_test) if n_test is None else int(n_test)
    total = n * (n - 1) // 2
    m = g.edge_count
    if n_train + n_test > total - m + len(e_test):
        raise SplitError(
            f"{n_train} train + {n_test} test non-edges exceed the bound "
            f"C(n,2) - |E| + |E_test| = {total - m + len(e_test)}")
    if n_test > total - m - n_train:
        raise SplitError(
            f"{n_test} test non-edges exceed the bound C(n,2) - |E| - n_train = "
            f"{total - m - n_train}")
    train_forbid = pair_keys(e_train, n)
    if exclude_test_from_train:
        train_forbid = np.concatenate([train_forbid, pair_keys(e_test, n)])
    d_train = _draw_pairs(n, train_forbid, n_train, rng, "train non-edges")
    test_forbid = np.concatenate([g.edge_keys(), d_train])
    d_test = _draw_pairs(n, test_forbid, n_test, rng, "test non-edges")
    return keys_to_pairs(d_train, n), keys_to_pairs(d_test, n)


# -- full splits ---------------------------------------------------------

def make_split(source, strategy: str, f: float, seed=None, *,
               exclude_test_from_train: bool = False) -> EdgeSplit:
    """Edge partition plus matching non-edge sets.

    ``source`` is a :class:`Graph`, or a :class:`TimestampedEdgeList` for
    the ``timestamp`` strategy.
    """
    recorded_seed = int(seed) if isinstance(seed, (int, np.integer)) else None
    rng = as_rng(seed)
    if strategy == "timestamp":
        if not isinstance(source, TimestampedEdgeList):
            raise SplitError("the timestamp strategy needs a timestamped edge list")
        part = split_timestamp(source, f)
    else:
        if isinstance(source, TimestampedEdgeList):
            source = source.static_graph()
        part = split_edges(source, strategy, f, rng)
    d_train, d_test = sample_non_edges(part.graph, part.e_train, part.e_test, seed=rng,
                                       exclude_test_from_train=exclude_test_from_train)
    return EdgeSplit(part.e_train, part.e_test, d_train, d_test, strategy, f, recorded_seed,
                     part.train_graph, part.graph, part.node_loss, part.train_times)


def validation_split(split: EdgeSplit, seed=None, strategy: str | None = None, *,
                     exclude_test_from_train: bool = False) -> EdgeSplit:
    """Split ``split.train_graph`` 90/10 into inner-train and validation sets.

    The outer test pairs are never consulted: inner non-edges are drawn
    relative to the outer train graph alone.
    """
    strategy = split.strategy if strategy is None else strategy
    if strategy != split.strategy:
        raise SplitError("the validation split must reuse the outer split strategy")
    if strategy == "timestamp":
        if split.train_times is None:
            raise SplitError("timestamp validation split needs train edge timestamps")
        tg = TimestampedEdgeList(split.train_graph.n,
                                 np.column_stack([split.e_train, split.train_times]),
                                 split.train_graph.ids)
        source = tg
    else:
        source = split.train_graph
    try:
        return make_split(source, strategy, VALIDATION_FRACTION, seed,
                          exclude_test_from_train=exclude_test_from_train)
    except SplitError as exc:
        raise SplitError(f"validation split failed: {exc}") from exc


def check_no_leakage(split: EdgeSplit) -> None:
    """Raise :class:`LeakageError` if any test pair is visible to training."""
    n = split.train_graph.n
    if len(split.e_test) and split.train_graph.has_edges(split.e_test).any():
        raise LeakageError("test edges are present in the train graph")
    e_train = pair_keys(split.e_train, n)
    if np.isin(pair_keys(split.e_test, n), e_train).any():
        raise LeakageError("test edges overlap the train edges")
    # d_train may hold test edges (open world); d_test must avoid all train pairs
    train_keys = np.concatenate([e_train, pair_keys(split.d_train, n)])
    if np.isin(pair_keys(split.d_test, n), train_keys).any():
        raise LeakageError("test non-edges overlap the train pairs")
    if len(split.d_test) and split.graph.has_edges(split.d_test).any():
        raise LeakageError("test non-edges contain true edges")


# -- persistence ---------------------------------------------------------

_PAIR_FILES = {
    "e_train": "train_edges.txt",
    "e_test": "test_edges.txt",
    "d_train": "train_non_edges.txt",
    "d_test": "test_non_edges.txt",
}


def save_split(split: EdgeSplit, directory) -> None:
    """Write the four pair files and ``manifest.txt`` to ``directory``."""
    os.makedirs(directory, exist_ok=True)
    for attr, fname in _PAIR_FILES.items():
        pairs = getattr(split, attr)
        with open(os.path.join(directory, fname), "w", encoding="utf-8") as fh:
            fh.writelines(f"{i} {j}\n" for i, j in pairs.tolist())
    manifest = {
        "strategy": split.strategy,
        "f": repr(split.f),
        "actual_f": repr(split.actual_f),
        "seed": "" if split.seed is None else str(split.seed),
        "nodes": str(split.train_graph.n),
        "node_loss": repr(split.node_loss),
        "e_train": str(len(split.e_train)),
        "e_test": str(len(split.e_test)),
        "d_train": str(len(split.d_train)),
        "d_test": str(len(split.d_test)),
    }
    with open(os.path.join(directory, "manifest.txt"), "w", encoding="utf-8") as fh:
        fh.writelines(f"{k} = {v}\n" for k, v in manifest.items())


def load_split_files(directory):
    """Read pair files and manifest written by :func:`save_split`.

    Returns ``(pairs, manifest)`` where ``pairs`` maps ``e_train``,
    ``e_test``, ``d_train``, ``d_test`` to arrays.
    """
    pairs = {}
    for attr, fname in _PAIR_FILES.items():
        arr = np.loadtxt(os.path.join(directory, fname), dtype=np.int64, ndmin=2)
        pairs[attr] = arr.reshape(-1, 2)
    manifest = {}
    with open(os.path.join(directory, "manifest.txt"), encoding="utf-8") as fh:
        for line in fh:
            if "=" in line:
                k, v = line.split("=", 1)
                manifest[k.strip()] = v.strip()
    return pairs, manifest
