import gzip
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import graph_of, path, star
from kcore import EdgeListError, Graph, load_edge_list
from kcore.graph import degree, neighbors, parse_edge_pairs, write_edge_list


def triangle():
    return load_edge_list(b"0 1\n1 2\n2 0\n")


def test_triangle():
    g = triangle()
    assert g.node_count == 3
    assert g.edge_count == 3
    assert [degree(g, u) for u in range(3)] == [2, 2, 2]
    assert neighbors(g, 1).tolist() == [0, 2]


def test_self_loop_dropped_but_node_kept():
    g = load_edge_list(b"5 5\n5 7\n")
    assert (g.node_count, g.edge_count) == (2, 1)
    assert g.labels.tolist() == [5, 7]

    g = load_edge_list(b"3 3\n1 2\n")
    assert g.node_count == 3
    assert g.degree(int(np.searchsorted(g.labels, 3))) == 0


def test_directed_and_duplicate_edges_collapse():
    g = load_edge_list(b"1 2\n2 1\n1 2\n2 3\n")
    assert g.edge_count == 2
    assert g.degrees().tolist() == [1, 2, 1]


def test_comments_tabs_and_sparse_ids():
    text = b"# Directed graph\n# FromNodeId\tToNodeId\n100\t7\n7 42\n\n"
    g = load_edge_list(text)
    assert g.labels.tolist() == [7, 42, 100]
    assert g.neighbors_of(0).tolist() == [1, 2]
    g.check_invariants()


def test_gzip_is_transparent(tmp_path):
    p = tmp_path / "g.txt.gz"
    p.write_bytes(gzip.compress(b"0 1\n1 2\n2 0\n"))
    assert load_edge_list(p) == triangle()
    assert load_edge_list(io.BytesIO(p.read_bytes())) == triangle()


@pytest.mark.parametrize("text", [b"", b"\n\n", b"# only a comment\n"])
def test_empty_input_is_empty_graph(text):
    g = load_edge_list(text)
    assert g.node_count == 0 and g.edge_count == 0
    assert len(g.offsets) == 1


@pytest.mark.parametrize("text, lineno", [
    (b"0 1\n1 x\n", 2),
    (b"# c\n0 1\n\n2 3 4\n", 4),
    (b"0\n", 1),
    (b"0 1\n1 2.5\n", 2),
])
def test_malformed_line_reports_line_number(text, lineno):
    with pytest.raises(EdgeListError) as info:
        load_edge_list(text)
    assert info.value.lineno == lineno
    assert str(lineno) in str(info.value)


def test_missing_file_is_os_error(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_edge_list(tmp_path / "nope.txt")


def test_degree_examples():
    assert star(4).degree(0) == 4
    assert path(4).neighbors_of(0).tolist() == [1]
    assert Graph.from_edges([(0, 1)]).max_degree == 1
    assert Graph.empty().max_degree == 0


@pytest.mark.parametrize("u", [-1, 3, 10])
def test_out_of_range_node(u):
    g = triangle()
    with pytest.raises(IndexError):
        g.degree(u)
    with pytest.raises(IndexError):
        g.neighbors_of(u)


def test_arrays_are_read_only():
    g = triangle()
    with pytest.raises(ValueError):
        g.neighbors[0] = 1
    with pytest.raises(ValueError):
        g.offsets[0] = 1


edge_lists = st.lists(st.tuples(st.integers(0, 40), st.integers(0, 40)), max_size=120)


@settings(max_examples=200, deadline=None)
@given(edge_lists)
def test_invariants_hold(edges):
    g = Graph.from_edges(edges)
    g.check_invariants()
    want = {(min(u, v), max(u, v)) for u, v in edges if u != v}
    got = {tuple(g.labels[e].tolist()) for e in g.edges()}
    assert got == want
    assert g.offsets[-1] == 2 * g.edge_count
    for u in range(g.node_count):
        assert np.all(np.diff(g.neighbors_of(u)) > 0)
        assert u not in g.neighbors_of(u)


@settings(max_examples=100, deadline=None)
@given(edge_lists)
def test_round_trip(edges):
    g = Graph.from_edges(edges)
    buf = io.BytesIO()
    write_edge_list(g, buf)
    h = load_edge_list(buf.getvalue())
    # isolated nodes have no line to be written on
    if np.all(g.degrees() > 0):
        assert h == g
    else:
        assert h.edge_count == g.edge_count


def test_round_trip_file(tmp_path):
    rng = np.random.default_rng(3)
    edges = rng.integers(0, 300, size=(2000, 2))
    g = Graph.from_edges(edges)
    write_edge_list(g, tmp_path / "g.txt")
    assert load_edge_list(tmp_path / "g.txt") == Graph.from_edges(g.labels[g.edges()])


@pytest.mark.parametrize("n, p, seed", [(50, 0.2, 0), (300, 0.02, 1), (1000, 0.004, 2)])
def test_binary_search_membership_matches_linear_scan(n, p, seed):
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, 1)
    g = graph_of(n, np.argwhere(upper))
    dense = upper | upper.T
    us = rng.integers(0, n, 20000)
    vs = rng.integers(0, n, 20000)
    if n <= 300:
        us, vs = np.divmod(np.arange(n * n), n)
    for u, v in zip(us.tolist(), vs.tolist()):
        assert g.has_edge(u, v) == (v in g.neighbors_of(u).tolist()) == bool(dense[u, v])


def test_parse_pairs_keeps_raw_ids():
    pairs = parse_edge_pairs(b"3 3\n9 1\n")
    assert pairs.tolist() == [[3, 3], [9, 1]]
