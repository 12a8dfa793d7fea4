import io
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpbench.graph import (EdgeListParseError, Graph, load_edge_list,
                           main_connected_component, neighbors_and_degree, write_edge_list)

from conftest import random_graph, star_graph


def bfs_components(g):
    """Flood-fill oracle independent of scipy."""
    seen = [-1] * g.n
    comps = []
    adj = [set() for _ in range(g.n)]
    for i, j in g.edges().tolist():
        adj[i].add(j)
        adj[j].add(i)
    for s in range(g.n):
        if seen[s] >= 0:
            continue
        comp, q = [s], deque([s])
        seen[s] = len(comps)
        while q:
            u = q.popleft()
            for v in adj[u]:
                if seen[v] < 0:
                    seen[v] = len(comps)
                    comp.append(v)
                    q.append(v)
        comps.append(sorted(comp))
    return comps


def test_triangle_loads():
    g = load_edge_list(b"1 2\n2 3\n3 1\n")
    assert (g.n, g.edge_count) == (3, 3)


def test_dedupe_and_self_loop_drop():
    g = load_edge_list(b"1 2\n2 1\n1 1\n")
    assert (g.n, g.edge_count) == (2, 1)


def test_commas_comments_and_id_map():
    g = load_edge_list(io.StringIO("# header\n10, 30\n\n30 20\n"))
    assert g.id_map == {10: 0, 20: 1, 30: 2}
    assert g.edges().tolist() == [[0, 2], [1, 2]]


@pytest.mark.parametrize("text,lineno", [(b"1 2\n3\n", 2), (b"1 x\n", 1), (b"# c\n1 2 3\n", 2)])
def test_malformed_line_reports_line_number(text, lineno):
    with pytest.raises(EdgeListParseError) as exc:
        load_edge_list(text)
    assert exc.value.lineno == lineno
    assert f"line {lineno}" in str(exc.value)


def test_empty_graph_is_an_error():
    with pytest.raises(EdgeListParseError):
        load_edge_list(b"# nothing\n4 4\n")


def test_timestamped_keeps_earliest():
    tg = load_edge_list(b"1 2 50\n2 1 10\n2 3 7\n3 3 1\n", has_timestamps=True)
    assert tg.n == 3
    assert tg.edges.tolist() == [[0, 1, 10], [1, 2, 7]]


def test_negative_timestamp_rejected():
    with pytest.raises(EdgeListParseError):
        load_edge_list(b"1 2 -5\n", has_timestamps=True)


def test_main_component_drops_small_parts(triangle):
    assert main_connected_component(triangle) is triangle
    g = load_edge_list(b"1 2\n2 3\n3 1\n4 5\n")
    mcc = main_connected_component(g)
    assert mcc.n == 3 and mcc.edge_count == 3
    assert sorted(mcc.ids.tolist()) == [1, 2, 3]


def test_main_component_tie_lowest_id():
    g = Graph(4, [(2, 3), (0, 1)])
    assert main_connected_component(g).ids.tolist() == [0, 1]


@pytest.mark.parametrize("seed", range(5))
def test_main_component_matches_bfs_oracle(seed):
    g = random_graph(60, 0.03, seed)
    comps = bfs_components(g)
    best = max(comps, key=lambda c: (len(c), -c[0]))
    mcc = main_connected_component(g)
    assert mcc.ids.tolist() == g.ids[best].tolist()
    assert len(bfs_components(mcc)) == 1


def test_neighbors_and_degree(s3):
    assert neighbors_and_degree(s3, 0)[1] == 3
    nbrs, deg = neighbors_and_degree(s3, 2)
    assert deg == 1 and nbrs.tolist() == [0]
    with pytest.raises(IndexError):
        neighbors_and_degree(s3, 4)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), min_size=1, max_size=80))
def test_loaded_graph_invariants(pairs):
    text = "".join(f"{a} {b}\n" for a, b in pairs)
    if all(a == b for a, b in pairs):
        with pytest.raises(EdgeListParseError):
            load_edge_list(text.encode())
        return
    g = load_edge_list(text.encode())
    assert g.degrees.sum() == 2 * g.edge_count
    for i in range(g.n):
        nb = g.neighbors(i)
        assert i not in nb
        assert np.all(np.diff(nb) > 0)
        for j in nb:
            assert i in g.neighbors(j)
    mcc = main_connected_component(g)
    assert main_connected_component(mcc) is mcc
    buf = io.StringIO()
    write_edge_list(g, buf)
    again = load_edge_list(buf.getvalue().encode())
    assert again.edges().tolist() == g.edges().tolist()
    assert again.ids.tolist() == list(range(g.n))
