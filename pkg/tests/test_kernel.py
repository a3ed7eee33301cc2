import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import barabasi_albert, clique, graph_of, random_gnp, small_graphs, star
from kcore import RunReport, compute_index, peel_coreness, sequentialk_run, verify
from kcore.kernel import INF, MessageMail
from kcore.report import Convergence, record_iteration


def brute_index(values, core):
    return max(t for t in range(core + 1) if sum(e >= t for e in values) >= t)


@pytest.mark.parametrize("values, core, want", [
    ([1, 2, 3], 3, 2),
    ([5, 5, 5, 5], 4, 4),
    ([2, 1, 1], 3, 1),
    ([], 0, 0),
    ([], 3, 0),
    ([0, 0], 2, 0),
    ([INF, INF, INF], 3, 3),
    ([INF, 1], 2, 1),
])
def test_compute_index_examples(values, core, want):
    assert compute_index(values, core) == want


@settings(max_examples=500, deadline=None)
@given(st.lists(st.integers(0, 60), max_size=50), st.integers(0, 60))
def test_compute_index_bounds(values, core):
    got = compute_index(values, core)
    assert got == brute_index(values, core)
    h_index = brute_index(values, len(values))
    assert got <= min(core, h_index)


def test_compute_index_rejects_negative():
    with pytest.raises(ValueError):
        compute_index([1, -1], 2)
    with pytest.raises(ValueError):
        compute_index([1], -1)


def test_record_iteration_examples():
    report = RunReport("t")
    tri = clique(3)
    truth = peel_coreness(tri)
    assert record_iteration(report, tri.degrees(), truth).mean_error == 0.0
    s = star(4)
    row = record_iteration(report, s.degrees(), peel_coreness(s), active_count=5)
    assert row.mean_error == pytest.approx(0.6)
    assert row.active_fraction == 1.0
    assert [r.iteration for r in report.trace] == [0, 1]


def test_convergence_counts_increases_and_undershoot():
    report = RunReport("t")
    conv = Convergence([1, 1, 1])
    conv.observe(report, [2, 1, 1])
    conv.observe(report, [1, 2, 0])
    assert report.monotone_violations == 1
    assert report.soundness_violations == 1


def test_sequentialk_examples():
    result, report = sequentialk_run(clique(3))
    assert result.coreness.tolist() == [2, 2, 2]
    # the degree announcements change nothing, so the first round is quiescent
    assert report.iterations == 1
    result, _ = sequentialk_run(star(4))
    assert result.coreness.tolist() == [1] * 5


def test_sequentialk_trace():
    s = star(4)
    _, report = sequentialk_run(s, truth=peel_coreness(s))
    assert report.trace[0].mean_error == pytest.approx(0.6)
    assert report.trace[0].active_fraction == 1.0
    assert report.trace[-1].mean_error == 0.0
    assert report.trace[-1].active_fraction == 0.0
    assert report.monotone_violations == report.soundness_violations == 0


def test_sequentialk_matches_oracle_on_small_graphs():
    for g in small_graphs(7) + random_gnp(300, max_nodes=40, seed=5):
        result, report = sequentialk_run(g)
        assert verify(result, peel_coreness(g)) == []
        assert report.messages_sent == report.messages_received


def test_sequentialk_on_scale_free_graph():
    g = barabasi_albert(20000, 5)
    truth = peel_coreness(g)
    result, report = sequentialk_run(g, truth=truth)
    assert result == truth
    assert report.monotone_violations == report.soundness_violations == 0
    assert report.trace[-1].mean_error == 0.0


def test_isolated_nodes_stay_zero():
    result, report = sequentialk_run(graph_of(4, [(0, 1)]))
    assert result.coreness.tolist() == [1, 1, 0, 0]


class TestMessageMail:
    def test_drain_fold_and_recompute(self):
        m = MessageMail(star(4))
        counts, stats = m.scratch(), m.new_stats()
        for leaf in range(1, 5):
            m.post(0, leaf, 1)
        assert m.pending(0) == [(1, 1), (2, 1), (3, 1), (4, 1)]
        assert m.process(0, 1, counts, stats)
        assert m.core[0] == 1
        assert m.changed[0] == 1
        assert m.pending(0) == []
        assert m.known_estimate(0, 3) == 1

    def test_empty_mailbox_changes_nothing(self):
        m = MessageMail(clique(3))
        m.changed[:] = 0
        assert not m.process(0, 3, m.scratch(), m.new_stats())

    def test_duplicate_message_is_noop(self):
        g = graph_of(4, [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (1, 3)])
        m = MessageMail(g)
        counts, stats = m.scratch(), m.new_stats()
        m.post(0, 1, 1)
        m.process(0, 1, counts, stats)
        before = (m.core[0], m.known.copy())
        m.post(0, 1, 1)
        assert not m.process(0, 1, counts, stats)
        assert m.core[0] == before[0]
        assert np.array_equal(m.known, before[1])

    @pytest.mark.parametrize("sorted_neighbors", [True, False])
    def test_neighbor_layouts_agree(self, sorted_neighbors):
        g = barabasi_albert(300, 3)
        m = MessageMail(g, sorted_neighbors=sorted_neighbors)
        for u in range(g.node_count):
            for v in g.neighbors_of(u).tolist():
                m.post(u, v, v % 7)
        m.process(0, g.node_count, m.scratch(), m.new_stats())
        for u in range(g.node_count):
            for v in g.neighbors_of(u).tolist():
                assert m.known_estimate(u, v) == v % 7

    def test_overflow_guard(self):
        m = MessageMail(graph_of(2, [(0, 1)]))
        m.post(0, 1, 0)
        with pytest.raises(OverflowError):
            m.post(0, 1, 0)
