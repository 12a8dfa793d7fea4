import itertools
import warnings
from collections import Counter, deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from lpbench.graph import Graph, TimestampedEdgeList
from lpbench.split import (LeakageError, SplitError, check_no_leakage, dfs_tree, load_split_files,
                           make_split, sample_non_edges, save_split, split_edges, split_timestamp,
                           validation_split, wilson_ust)

from conftest import complete_graph, cycle_graph, path_graph, planted_partition, random_graph


def is_connected(n, edges):
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen, q = {0}, deque([0])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                q.append(v)
    return len(seen) == n


def enumerate_spanning_trees(g):
    edges = [tuple(e) for e in g.edges().tolist()]
    return [frozenset(c) for c in itertools.combinations(edges, g.n - 1) if is_connected(g.n, c)]


def tree_key(tree):
    return frozenset(map(tuple, tree.tolist()))


def test_path_has_one_tree():
    g = path_graph(3)
    for seed in range(5):
        assert wilson_ust(g, seed).tolist() == [[0, 1], [1, 2]]


def test_ust_rejects_disconnected():
    with pytest.raises(SplitError):
        wilson_ust(Graph(4, [(0, 1), (2, 3)]), 0)


@pytest.mark.parametrize("g,n_trees,samples,tol", [
    (cycle_graph(4), 4, 40_000, 0.01),
    (complete_graph(4), 16, 160_000, 0.005),
])
def test_ust_uniform_chi_square(g, n_trees, samples, tol):
    trees = enumerate_spanning_trees(g)
    assert len(trees) == n_trees  # Cayley: 4^(4-2) = 16 for K4
    rng = np.random.default_rng(2024)
    counts = Counter(tree_key(wilson_ust(g, rng)) for _ in range(samples))
    assert set(counts) == set(trees)
    freq = np.array([counts[t] for t in trees])
    assert np.all(np.abs(freq / samples - 1 / n_trees) <= tol)
    assert chisquare(freq).pvalue > 0.01


def test_dfs_tree_is_deterministic_spanning():
    g = random_graph(40, 0.15, 3, connected=True)
    t = dfs_tree(g)
    assert len(t) == g.n - 1 and is_connected(g.n, t.tolist())
    assert np.array_equal(t, dfs_tree(g))
    # ascending-neighbour DFS on a path through the triangle 0-1-2
    assert dfs_tree(complete_graph(3)).tolist() == [[0, 1], [1, 2]]


def test_triangle_st_forced_sizes(triangle):
    for seed in range(4):
        part = split_edges(triangle, "st", 2 / 3, seed)
        assert len(part.e_train) == 2 and len(part.e_test) == 1
        assert part.train_graph.is_connected()


@pytest.mark.parametrize("strategy", ["st", "dft"])
def test_tree_strategies_keep_all_nodes(strategy):
    g = planted_partition(200, 4, 0.12, 0.01, 0)
    for seed in range(3):
        part = split_edges(g, strategy, 0.8, seed)
        assert len(part.e_train) == round(0.8 * g.edge_count)
        assert part.train_graph.n == g.n and part.train_graph.is_connected()
        assert part.node_loss == 0.0
        keys = set(map(tuple, part.e_train.tolist()))
        assert keys.isdisjoint(map(tuple, part.e_test.tolist()))
        assert len(keys) + len(part.e_test) == g.edge_count


def test_st_replay_and_low_f_error():
    g = random_graph(50, 0.1, 1, connected=True)
    a = split_edges(g, "st", 0.8, 11)
    b = split_edges(g, "st", 0.8, 11)
    assert np.array_equal(a.e_train, b.e_train)
    with pytest.raises(SplitError, match="f >="):
        split_edges(g, "st", 0.2, 0)


def test_random_strategy_loses_nodes_on_sparse_graph():
    g = random_graph(300, 0.012, 5, connected=True)
    part = split_edges(g, "random", 0.8, 0)
    assert part.node_loss > 0
    assert part.train_graph.is_connected()
    assert part.train_graph.degrees.min() >= 1
    # refined test edges live inside the train node set and are real edges
    assert part.graph.has_edges(part.e_test).all()
    assert not part.train_graph.has_edges(part.e_test).any()
    assert part.train_graph.n == round((1 - part.node_loss) * g.n)


def naive_timestamp_split(tg, f):
    """Brute-force oracle: BFS connectivity check for every candidate."""
    rows = sorted(tg.edges.tolist(), key=lambda r: (-r[2], r[0], r[1]))
    budget = round((1 - f) * len(rows))
    current = [tuple(r[:2]) for r in rows]
    test = []
    for r in rows:
        if len(test) == budget:
            break
        e = tuple(r[:2])
        trial = [x for x in current if x != e]
        if is_connected(tg.n, trial):
            current = trial
            test.append(e)
    return sorted(test)


def test_timestamp_cycle_removes_newest():
    tg = TimestampedEdgeList(4, np.array([[0, 1, 1], [1, 2, 2], [2, 3, 3], [0, 3, 4]]),
                             np.arange(4))
    part = split_timestamp(tg, 0.75)
    assert part.e_test.tolist() == [[0, 3]]


def test_timestamp_path_warns():
    tg = TimestampedEdgeList(3, np.array([[0, 1, 5], [1, 2, 9]]), np.arange(3))
    with pytest.warns(UserWarning, match="actual f"):
        part = split_timestamp(tg, 0.5)
    assert len(part.e_test) == 0


@pytest.mark.parametrize("seed", range(8))
def test_timestamp_matches_naive_greedy(seed):
    g = random_graph(25, 0.2, seed, connected=True)
    rng = np.random.default_rng(seed)
    times = rng.integers(0, 10, size=g.edge_count)  # plenty of ties
    tg = TimestampedEdgeList(g.n, np.column_stack([g.edges(), times]), g.ids)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        part = split_timestamp(tg, 0.6)
    assert sorted(map(tuple, part.e_test.tolist())) == naive_timestamp_split(tg, 0.6)
    assert part.train_graph.is_connected()


def test_non_edges_unique_pair(s3=None):
    g = path_graph(3)
    d_train, d_test = sample_non_edges(g, g.edges(), np.empty((0, 2)), n_train=1, seed=0)
    assert d_train.tolist() == [[0, 2]] and len(d_test) == 0


def test_non_edges_infeasible_on_triangle(triangle):
    with pytest.raises(SplitError, match="bound"):
        sample_non_edges(triangle, triangle.edges(), np.empty((0, 2)), seed=0)


def test_dense_graph_infeasible():
    g = random_graph(20, 0.7, 2, connected=True)
    with pytest.raises(SplitError, match="bound"):
        make_split(g, "st", 0.8, 0)


def test_dense_graph_uses_complement_enumeration():
    g = random_graph(30, 0.55, 1)
    k = 20
    d_train, d_test = sample_non_edges(g, g.edges(), np.empty((0, 2)), n_train=k, seed=3)
    assert len(d_train) == k and not g.has_edges(d_train).any()
    again, _ = sample_non_edges(g, g.edges(), np.empty((0, 2)), n_train=k, seed=3)
    assert np.array_equal(d_train, again)


@pytest.mark.parametrize("n,p,seed", [(30, 0.1, 0), (40, 0.3, 1), (20, 0.35, 2), (50, 0.05, 3)])
def test_non_edge_exclusions_exhaustive(n, p, seed):
    g = random_graph(n, p, seed, connected=True)
    split = make_split(g, "st", 0.8, seed)
    e_train = set(map(tuple, split.e_train.tolist()))
    e_all = set(map(tuple, split.graph.edges().tolist()))
    d_train = list(map(tuple, split.d_train.tolist()))
    d_test = list(map(tuple, split.d_test.tolist()))
    assert len(d_train) == len(split.e_train) and len(d_test) == len(split.e_test)
    assert len(set(d_train)) == len(d_train) and len(set(d_test)) == len(d_test)
    assert all(a < b for a, b in d_train + d_test)
    assert e_train.isdisjoint(d_train)
    assert e_all.isdisjoint(d_test) and set(d_train).isdisjoint(d_test)
    check_no_leakage(split)


def test_strict_flag_excludes_test_edges():
    g = random_graph(20, 0.2, 4, connected=True)
    for seed in range(10):
        split = make_split(g, "st", 0.5, seed, exclude_test_from_train=True)
        assert set(map(tuple, split.d_train.tolist())).isdisjoint(map(tuple, split.e_test.tolist()))


def test_non_edge_uniformity_on_small_graph():
    g = path_graph(4)  # 3 non-adjacent pairs
    counts = Counter()
    rng = np.random.default_rng(0)
    for _ in range(3000):
        d, _ = sample_non_edges(g, g.edges(), np.empty((0, 2)), n_train=1, seed=rng)
        counts[tuple(d[0])] += 1
    assert chisquare(list(counts.values())).pvalue > 0.01


def test_validation_split_properties():
    g = planted_partition(150, 3, 0.15, 0.02, 1)
    outer = make_split(g, "st", 0.8, 3)
    inner = validation_split(outer, 5)
    assert inner.train_graph.is_connected()
    assert len(inner.e_train) == round(0.9 * len(outer.e_train))
    outer_train = set(map(tuple, outer.e_train.tolist()))
    assert set(map(tuple, inner.e_test.tolist())) <= outer_train
    again = validation_split(outer, 5)
    for attr in ("e_train", "e_test", "d_train", "d_test"):
        assert np.array_equal(getattr(inner, attr), getattr(again, attr))
    with pytest.raises(SplitError):
        validation_split(outer, 5, strategy="dft")


def test_leakage_canary():
    g = random_graph(30, 0.2, 0, connected=True)
    split = make_split(g, "st", 0.8, 0)
    from dataclasses import replace
    leaky = replace(split, e_test=split.e_train[:5])
    with pytest.raises(LeakageError):
        check_no_leakage(leaky)


def test_split_persistence_roundtrip(tmp_path):
    g = random_graph(30, 0.2, 0, connected=True)
    split = make_split(g, "dft", 0.7, 9)
    save_split(split, tmp_path)
    pairs, manifest = load_split_files(tmp_path)
    for attr in ("e_train", "e_test", "d_train", "d_test"):
        assert np.array_equal(pairs[attr], getattr(split, attr))
    assert manifest["strategy"] == "dft" and manifest["seed"] == "9"
    assert int(manifest["e_train"]) == len(split.e_train)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["random", "st", "dft"]),
       st.floats(0.55, 0.9))
def test_split_invariants_and_replay(seed, strategy, f):
    g = random_graph(35, 0.15, seed % 7, connected=True)
    a = make_split(g, strategy, f, seed)
    b = make_split(g, strategy, f, seed)
    for attr in ("e_train", "e_test", "d_train", "d_test"):
        assert np.array_equal(getattr(a, attr), getattr(b, attr))
    check_no_leakage(a)
    assert a.train_graph.is_connected()
    if strategy != "random":
        assert a.train_graph.n == g.n
        assert len(a.e_train) == round(f * g.edge_count)
    else:
        assert a.node_loss >= 0 and a.train_graph.degrees.min() >= 1
