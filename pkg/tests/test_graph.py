import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlinkpred.graph import (
    ABSENT,
    EdgeListParseError,
    EmptyGraphError,
    Graph,
    InvalidNodeError,
    QueryLedger,
    degree_queries,
    degree_query,
    degree_statistics,
    load_edge_list,
    neighbour_queries,
    neighbour_query,
    vertex_pair_queries,
    vertex_pair_query,
    write_edge_list,
)

from conftest import complete, cycle, path3, random_graphs, star


def test_degree_query_examples():
    led = QueryLedger()
    assert degree_query(path3(), led, 1) == 2
    g = Graph.from_edges(4, [(0, 1)])
    assert degree_query(g, led, 3) == 0
    s = star(3)
    # brute-force count from the dense matrix
    a = s.adjacency_matrix()
    assert [degree_query(s, led, v) for v in range(4)] == list(a.sum(axis=1)) == [3, 1, 1, 1]
    assert led.degree_queries == 6


def test_degree_query_invalid_node():
    with pytest.raises(InvalidNodeError):
        degree_query(path3(), QueryLedger(), 3)
    with pytest.raises(InvalidNodeError):
        neighbour_query(path3(), QueryLedger(), -1, 1)


def test_neighbour_query_examples():
    g, led = path3(), QueryLedger()
    assert neighbour_query(g, led, 1, 1) == 0
    assert neighbour_query(g, led, 1, 2) == 2
    assert neighbour_query(g, led, 1, 3) == ABSENT
    assert neighbour_query(g, led, 0, 1) == 1
    assert led.neighbour_queries == 4


def test_vertex_pair_query_examples():
    g, led = path3(), QueryLedger()
    assert vertex_pair_query(g, led, 0, 1) == 1
    assert vertex_pair_query(g, led, 0, 2) == 0
    assert all(vertex_pair_query(g, led, v, v) == 0 for v in range(3))
    k4 = complete(4)
    assert all(vertex_pair_query(k4, led, u, v) == 1 for u in range(4) for v in range(4) if u != v)
    assert led.pair_queries == 2 + 3 + 12


def test_batched_queries_charge_per_element():
    g, led = cycle(5), QueryLedger()
    assert list(degree_queries(g, led, range(5))) == [2] * 5
    assert list(neighbour_queries(g, led, [0, 0, 0], [1, 2, 3])) == [1, 4, ABSENT]
    assert list(vertex_pair_queries(g, led, [0, 0, 0], [1, 2, 0])) == [1, 0, 0]
    assert led.as_tuple() == (5, 3, 3)


def test_load_edge_list_examples():
    g, st_ = load_edge_list(io.StringIO("0 1\n1 2"))
    assert (g.node_count, g.edge_count) == (3, 2)
    g, st_ = load_edge_list(io.StringIO("a b\nb a\na a"))
    assert (g.node_count, g.edge_count) == (2, 1)
    assert (st_.dropped_duplicates, st_.dropped_self_loops) == (1, 1)
    assert g.labels == ("a", "b")
    g, _ = load_edge_list(io.StringIO("# comment\n5 9"))
    assert (g.node_count, g.edge_count) == (2, 1)
    assert g.labels == ("5", "9")


def test_load_edge_list_errors():
    with pytest.raises(EdgeListParseError) as e:
        load_edge_list(io.StringIO("0 1\n# fine\n2 3 4\n"))
    assert e.value.lineno == 3
    with pytest.raises(EmptyGraphError):
        load_edge_list(io.StringIO(""))
    with pytest.raises(EmptyGraphError):
        load_edge_list(io.StringIO("# only comments\n\n"))


def test_edge_list_roundtrip_keeps_labels():
    g, _ = load_edge_list(io.StringIO("x y\ny z\nünï x\n"))
    buf = io.StringIO()
    write_edge_list(g, buf, ["hello"])
    h, _ = load_edge_list(io.StringIO(buf.getvalue()))
    def named(x):
        return {frozenset((x.labels[u], x.labels[v])) for u, v in x.edges().tolist()}

    assert sorted(h.labels) == sorted(g.labels)
    assert named(h) == named(g)


def test_degree_statistics_examples():
    s = degree_statistics(path3(), orders=(2,))
    degs = [1, 2, 1]
    assert s.k_av == Fraction(4, 3)
    assert s.moments[2] == Fraction(sum(k * k for k in degs), 3) == 2
    assert s.k_max == 2
    assert degree_statistics(cycle(5), orders=(3,)).moments[3] == 8
    assert degree_statistics(cycle(5)).k_av == 2
    assert degree_statistics(star(3), orders=(2,)).moments[2] == Fraction(9 + 3, 4) == 3


edge_lists = st.lists(st.tuples(st.integers(0, 14), st.integers(0, 14)), max_size=60)


@given(edge_lists)
@settings(max_examples=100, deadline=None)
def test_constructed_graphs_satisfy_invariants(edges):
    g = Graph.from_edges(15, edges if edges else np.empty((0, 2), int))
    g.check_invariants()
    want = {tuple(sorted(e)) for e in edges if e[0] != e[1]}
    assert {tuple(e) for e in g.edges().tolist()} == want


@pytest.mark.parametrize("g", random_graphs(10, 2, 40, seed=3), ids=lambda g: f"N{g.node_count}")
def test_scans_reconstruct_graph_at_exact_cost(g):
    led = QueryLedger()
    n = g.node_count
    degs = [degree_query(g, led, v) for v in range(n)]
    assert sum(degs) == 2 * g.edge_count
    assert led.degree_queries == n
    seen = []
    for v in range(n):
        for l in range(1, degs[v] + 1):
            seen.append((v, neighbour_query(g, led, v, l)))
    assert led.neighbour_queries == 2 * g.edge_count
    assert sorted(seen) == sorted((v, int(u)) for v in range(n) for u in g.neighbours(v))
    rng = np.random.default_rng(0)
    for u, v in rng.integers(0, n, size=(50, 2)):
        assert vertex_pair_query(g, led, u, v) == vertex_pair_query(g, led, v, u)


@given(*[st.tuples(st.integers(0, 100), st.integers(0, 100), st.integers(0, 100))] * 3)
def test_ledger_merge_associative_commutative(a, b, c):
    la, lb, lc = QueryLedger(*a), QueryLedger(*b), QueryLedger(*c)
    assert ((la + lb) + lc).as_tuple() == (la + (lb + lc)).as_tuple()
    assert (la + lb).as_tuple() == (lb + la).as_tuple()
    assert (la + lb).as_tuple() == tuple(x + y for x, y in zip(a, b))


def test_with_edges_removed_keeps_nodes():
    g = cycle(5)
    h = g.with_edges_removed([(1, 0)])
    assert h.node_count == 5 and h.edge_count == 4
    assert not h.has_edge(0, 1)
    assert h.labels == g.labels
