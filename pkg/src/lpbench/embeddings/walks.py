"""Second-order biased random walks (node2vec style)."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .._utils import as_rng, kernel_seed
from ..graph import Graph

__all__ = ["WalkCorpus", "generate_walks"]


@dataclass(frozen=True)
class WalkCorpus:
    """Walks stored row-wise in a ``(num_walks * n, walk_len)`` array.

    Positions after the end of a walk hold ``-1``; ``lengths`` gives the
    number of valid nodes per row.
    """

    walks: np.ndarray
    lengths: np.ndarray
    n: int
    num_walks: int
    walk_len: int
    p: float
    q: float

    def __len__(self):
        return len(self.walks)

    def as_lists(self) -> list:
        return [row[:k].tolist() for row, k in zip(self.walks, self.lengths)]

    def counts(self) -> np.ndarray:
        """Occurrences of every node across the corpus."""
        w = self.walks[self.walks >= 0]
        return np.bincount(w, minlength=self.n)


@numba.njit(cache=True)
def _is_neighbor(indptr, indices, a, b):
    lo = indptr[a]
    hi = indptr[a + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        v = indices[mid]
        if v == b:
            return True
        if v < b:
            lo = mid + 1
        else:
            hi = mid
    return False


@numba.njit(cache=True)
def _walk_kernel(indptr, indices, starts, walk_len, p, q, seed, out, lengths):
    np.random.seed(seed)
    w_ret = 1.0 / p
    w_out = 1.0 / q
    w_max = max(w_ret, 1.0, w_out)
    for r in range(starts.shape[0]):
        cur = starts[r]
        out[r, 0] = cur
        length = 1
        prev = -1
        while length < walk_len:
            lo = indptr[cur]
            deg = indptr[cur + 1] - lo
            if deg == 0:
                break
            if prev < 0:
                nxt = indices[lo + np.random.randint(0, deg)]
            else:
                # rejection sampling against the unnormalised second-order weights
                while True:
                    nxt = indices[lo + np.random.randint(0, deg)]
                    if nxt == prev:
                        w = w_ret
                    elif _is_neighbor(indptr, indices, prev, nxt):
                        w = 1.0
                    else:
                        w = w_out
                    if w >= w_max or np.random.random() * w_max < w:
                        break
            out[r, length] = nxt
            length += 1
            prev = cur
            cur = nxt
        lengths[r] = length


def generate_walks(g_train: Graph, num_walks: int = 10, walk_len: int = 80, p: float = 1.0,
                   q: float = 1.0, seed=None) -> WalkCorpus:
    """Sample ``num_walks`` walks from every node.

    From ``cur`` reached via ``prev`` the next node ``x`` is drawn with
    weight ``1/p`` if ``x == prev``, ``1`` if ``x`` neighbours ``prev`` and
    ``1/q`` otherwise; the first step is uniform. The node order is
    reshuffled in every round. Walks stop early at isolated nodes.
    """
    if num_walks < 1 or walk_len < 1:
        raise ValueError("num_walks and walk_len must be positive")
    if not (p > 0 and q > 0):
        raise ValueError("p and q must be positive")
    rng = as_rng(seed)
    starts = np.concatenate([rng.permutation(g_train.n) for _ in range(num_walks)])
    starts = starts.astype(np.int64)
    out = np.full((len(starts), walk_len), -1, dtype=np.int64)
    lengths = np.zeros(len(starts), dtype=np.int64)
    _walk_kernel(g_train.indptr, g_train.indices, starts, int(walk_len), float(p), float(q),
                 kernel_seed(rng), out, lengths)
    return WalkCorpus(out, lengths, g_train.n, int(num_walks), int(walk_len), float(p),
                      float(q))
