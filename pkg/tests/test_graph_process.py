import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dprocess.graph_process import (
    STUCK,
    AddedEdge,
    GraphProcessState,
    code_from_edges,
    edges_from_code,
    graph_terminal_codes,
    merge_checkpoints,
    new,
    pair_index,
)
from dprocess.oracle import exact_outcome_distribution


def run_to_end(g):
    while g.step() is not STUCK:
        pass
    return g


def check_invariants(g):
    n, d = g.n, g.d
    deg = [len(g.neighbors(u)) for u in range(n)]
    assert all(x <= d for x in deg)
    assert sum(deg) == 2 * g.s <= 2 * g.N
    assert g.deficit == g.N - g.s
    assert g.unsaturated_vertices() == [u for u in range(n) if deg[u] < d]
    for u in range(n):
        assert u not in g.neighbors(u)
        for v in g.neighbors(u):
            assert u in g.neighbors(v)
    counts = g.degree_counts()
    assert sum(counts) == n
    assert sum(i * c for i, c in enumerate(counts)) == 2 * g.s


@pytest.mark.parametrize("n,d,N", [(5, 2, 5), (2, 2, 2), (3, 3, 4)])
def test_new(n, d, N):
    g = new(n, d, 1)
    assert (g.N, g.s, g.deficit, g.unsaturated_count) == (N, 0, N, n)


@pytest.mark.parametrize("n,d", [(5, 1), (1, 2), (0, 3)])
def test_new_rejects_small(n, d):
    with pytest.raises(ValueError):
        new(n, d, 0)


def test_two_vertices():
    g = new(2, 2, 0)
    assert g.step() == AddedEdge(0, 1)
    assert g.step() is STUCK
    assert g.s == 1
    out = g.classify_final()
    assert not out.saturated
    assert out.unsaturated_degrees == (1, 1)


def test_stuck_leaves_state_unchanged():
    g = run_to_end(new(7, 3, 4))
    before = (g.edges(), g.degree_counts(), g.s)
    assert g.step() is STUCK
    assert (g.edges(), g.degree_counts(), g.s) == before


def test_triangle_is_forced_for_three_vertices():
    for seed in range(50):
        g = run_to_end(new(3, 2, seed))
        assert g.edges() == [(0, 1), (0, 2), (1, 2)]
        assert g.classify_final().saturated
        assert g.degree_counts() == [0, 0, 3]


def test_classify_final_rejects_live_state():
    with pytest.raises(ValueError):
        new(4, 2, 0).classify_final()


def test_classify_final_second_branch():
    # dn odd: a full run ends with degrees (d, ..., d, d-1) and counts as saturated
    seen = 0
    for seed in range(60):
        out = run_to_end(new(5, 3, seed)).classify_final()
        if out.final_edges == 7:
            seen += 1
            assert out.saturated and out.unsaturated_degrees == (2,)
        else:
            assert not out.saturated
    assert seen > 0


def test_degree_counts_and_edge_classes_examples():
    g = new(4, 2, 0)
    for u, v in [(0, 1), (1, 2), (0, 2)]:
        g.add_edge(u, v)
    assert g.edge_class_counts()[0] == 0
    assert g.degree_counts() == [1, 0, 3]
    h = new(4, 2, 0)
    h.add_edge(0, 1)
    h.add_edge(2, 3)
    assert h.edge_class_counts()[0] == 2
    e = new(6, 2, 0)
    assert e.edge_class_counts() == (0, 0, 6)
    p = new(3, 2, 0)
    p.add_edge(0, 1)
    p.add_edge(1, 2)
    assert p.degree_counts() == [0, 2, 1]


def test_critical_edges_need_a_low_endpoint():
    g = new(6, 3, 0)
    g.add_edge(0, 1)
    g.add_edge(0, 2)  # vertex 0 has degree 2 = d-1, vertices 1, 2 degree 1
    ue, ce, cv = g.edge_class_counts()
    assert ue == 2 and ce == 2
    assert cv == 5  # all but vertex 0 have degree <= 1


def test_add_edge_rejects_disallowed():
    g = new(3, 2, 0)
    g.add_edge(0, 1)
    with pytest.raises(ValueError):
        g.add_edge(0, 1)
    with pytest.raises(ValueError):
        g.add_edge(2, 2)


@given(st.integers(2, 40), st.integers(2, 5), st.integers(0, 2**64 - 1))
def test_invariants_along_trajectory(n, d, seed):
    g = new(n, d, seed)
    while True:
        t = g.deficit
        u = g.unsaturated_count
        assert d * u >= 2 * t
        assert u <= 2 * t + 1
        if u > d:
            assert not g.is_stuck()
        out = g.step()
        check_invariants(g)
        if out is STUCK:
            break
    # stuck: unsaturated vertices form a clique of size <= d
    low = g.unsaturated_vertices()
    assert len(low) <= d
    for a in low:
        for b in low:
            if a < b:
                assert g.has_edge(a, b)


@given(st.integers(2, 60), st.integers(2, 4), st.integers(0, 2**64 - 1))
def test_run_matches_stepping(n, d, seed):
    rec = GraphProcessState(n, d, seed).run(checkpoints_s=[0, 1], checkpoints_t=[0, 1], check=True)
    g = run_to_end(new(n, d, seed))
    assert rec.violations == 0
    assert rec.final_edges == g.s
    assert rec.saturated == g.classify_final().saturated
    assert rec.row("s", 0).degree_counts == [n] + [0] * d
    # S_j: last s with minimum degree <= j, replayed by stepping
    h = new(n, d, seed)
    last = [0] * (d - 1)
    while True:
        mindeg = min(h.deg)
        for j in range(d - 1):
            if mindeg <= j:
                last[j] = h.s
        if h.step() is STUCK:
            break
    assert rec.last_times == last


def test_determinism():
    a = GraphProcessState(500, 3, 99).run(checkpoints_t=[5, 50])
    b = GraphProcessState(500, 3, 99).run(checkpoints_t=[5, 50])
    assert a.to_json() == b.to_json()
    g = GraphProcessState(500, 3, 1)
    g.run()
    g.reset(99)
    assert g.run(checkpoints_t=[5, 50]).to_json() == a.to_json()


def test_unreached_checkpoint_flagged():
    rec = GraphProcessState(2, 2, 0).run(checkpoints_t=[0, 1, 2])
    assert not rec.row("t", 0).reached
    assert rec.row("t", 1).reached and rec.row("t", 2).reached


def test_checkpoint_rows_agree_with_stepping():
    n, d, seed = 300, 3, 12
    rec = GraphProcessState(n, d, seed).run(checkpoints_s=[100, 400], checkpoints_t=[3])
    g = new(n, d, seed)
    for target in (100, 400):
        while g.s < target:
            g.step()
        row = rec.row("s", target)
        assert row.degree_counts == g.degree_counts()
        ue, ce, cv = g.edge_class_counts()
        assert (row.unsaturated_edges, row.critical_edges, row.critical_vertices) == (ue, ce, cv)
        assert row.unsaturated == g.unsaturated_count


def test_checkpoints_out_of_range():
    with pytest.raises(ValueError):
        GraphProcessState(10, 2, 0).run(checkpoints_s=[11])
    with pytest.raises(ValueError):
        merge_checkpoints(10, [], [-1])


def test_run_requires_fresh_state():
    g = new(10, 2, 0)
    g.step()
    with pytest.raises(ValueError):
        g.run()


def test_first_step_uniform_on_three_vertices():
    # each pair of the empty triangle with frequency 1/3 +- 5 sigma over 10^6 steps
    trials = 10**6
    g = new(3, 2, 0)
    counts = Counter()
    for i in range(trials):
        g.reset(i)
        e = g.step()
        counts[(e.u, e.v)] += 1
    sigma = math.sqrt(trials * (1 / 3) * (2 / 3))
    assert set(counts) == {(0, 1), (0, 2), (1, 2)}
    for c in counts.values():
        assert abs(c - trials / 3) < 5 * sigma


def test_terminal_law_four_vertices_matches_oracle():
    trials = 200000
    codes = graph_terminal_codes(4, 2, np.arange(trials, dtype=np.uint64))
    exact = exact_outcome_distribution(4, 2).entries
    counts = Counter(codes.tolist())
    assert set(counts) <= set(exact)
    for code, p in exact.items():
        sd = math.sqrt(float(p) * (1 - float(p)) / trials)
        assert abs(counts[code] / trials - float(p)) < 5 * sd
    three = sum(c for code, c in counts.items() if len(edges_from_code(code, 4)) == 3)
    p = 4 / 15
    assert abs(three / trials - p) < 5 * math.sqrt(p * (1 - p) / trials)


@given(st.integers(2, 11))
def test_edge_codes_round_trip(n):
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if (u * 7 + v) % 3 == 0]
    assert edges_from_code(code_from_edges(edges, n), n) == edges
    idx = sorted(pair_index(u, v, n) for u in range(n) for v in range(u + 1, n))
    assert idx == list(range(n * (n - 1) // 2))
