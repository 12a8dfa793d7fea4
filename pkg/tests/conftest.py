import itertools

import numpy as np
import pytest

from lpbench.graph import Graph


def path_graph(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return Graph(n, list(itertools.combinations(range(n), 2)))


def star_graph(leaves):
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def random_graph(n, p, seed, connected=False):
    rng = np.random.default_rng(seed)
    while True:
        pairs = [(i, j) for i, j in itertools.combinations(range(n), 2) if rng.random() < p]
        if connected:
            # chain through a random permutation guarantees connectivity
            perm = rng.permutation(n)
            pairs += [(int(perm[k]), int(perm[k + 1])) for k in range(n - 1)]
        if pairs:
            return Graph(n, pairs)


def planted_partition(n, blocks, p_in, p_out, seed):
    """Community-structured graph kept connected by a random chain."""
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % blocks
    iu, ju = np.triu_indices(n, k=1)
    same = labels[iu] == labels[ju]
    keep = rng.random(len(iu)) < np.where(same, p_in, p_out)
    pairs = np.column_stack([iu[keep], ju[keep]])
    perm = rng.permutation(n)
    chain = np.column_stack([perm[:-1], perm[1:]])
    return Graph(n, np.concatenate([pairs, chain]))


def bipartite_random(n_left, n_right, p, seed):
    """Random bipartite graph: links only across the two node types."""
    rng = np.random.default_rng(seed)
    left = np.arange(n_left)
    right = np.arange(n_left, n_left + n_right)
    ii, jj = np.meshgrid(left, right, indexing="ij")
    keep = rng.random(ii.shape) < p
    pairs = np.column_stack([ii[keep], jj[keep]])
    return Graph(n_left + n_right, pairs)


@pytest.fixture
def triangle():
    return complete_graph(3)


@pytest.fixture
def s3():
    return star_graph(3)
