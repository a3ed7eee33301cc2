import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import clique, graph_of, naive_coreness, random_gnp, small_graphs, star
from kcore import CorenessResult, Graph, peel_coreness, verify
from kcore.oracle import Mismatch


def test_triangle():
    assert peel_coreness(clique(3)).coreness.tolist() == [2, 2, 2]


def test_k4_with_pendant():
    g = graph_of(5, [(i, j) for i in range(4) for j in range(i + 1, 4)] + [(0, 4)])
    assert peel_coreness(g).coreness.tolist() == [3, 3, 3, 3, 1]


def test_summary_values():
    r = peel_coreness(star(4))
    assert r.k_max == 1
    assert r.k_avg == pytest.approx(1.0)
    empty = peel_coreness(Graph.empty())
    assert (empty.k_max, empty.k_avg, len(empty)) == (0, 0.0, 0)
    isolated = peel_coreness(graph_of(3, []))
    assert isolated.coreness.tolist() == [0, 0, 0]


def test_matches_naive_on_every_graph_up_to_7_nodes():
    for g in small_graphs(7):
        assert peel_coreness(g).coreness.tolist() == naive_coreness(g).tolist()


def test_matches_naive_on_random_graphs_up_to_12_nodes():
    for g in random_gnp(400, max_nodes=12, seed=11):
        assert peel_coreness(g).coreness.tolist() == naive_coreness(g).tolist()


def test_matches_networkx_on_larger_graphs():
    for seed in range(5):
        h = nx.powerlaw_cluster_graph(2000, 4, 0.3, seed=seed)
        g = graph_of(2000, h.edges())
        want = nx.core_number(h)
        assert peel_coreness(g).coreness.tolist() == [want[u] for u in range(2000)]


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 25), st.integers(0, 25)), max_size=90), st.randoms())
def test_properties(edges, rnd):
    g = Graph.from_edges(edges)
    c = peel_coreness(g).coreness
    assert np.all(c <= g.degrees())
    for k in range(int(c.max(initial=0)) + 1):
        above = set(np.flatnonzero(c >= k + 1).tolist())
        assert above <= set(np.flatnonzero(c >= k).tolist())
        # every node of the k-core keeps k neighbors inside it
        members = np.flatnonzero(c >= k)
        for u in members:
            assert np.count_nonzero(c[g.neighbors_of(u)] >= k) >= k
    # relabeling changes the tie order of the peeling but not the answer
    perm = list(range(g.node_count))
    rnd.shuffle(perm)
    h = graph_of(g.node_count, [(perm[u], perm[v]) for u, v in g.edges().tolist()])
    assert peel_coreness(h).coreness[perm].tolist() == c.tolist()


def test_verify_examples():
    a = CorenessResult(np.array([2, 2, 2], dtype=np.int32))
    assert verify(a, a) == []
    assert verify([2, 1, 2], a) == [Mismatch(1, 1, 2)]
    with pytest.raises(ValueError):
        verify([1, 2], a)
