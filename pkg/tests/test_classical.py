import numpy as np
import pytest

from qlinkpred.classical import (
    SupportExhaustedError,
    a2_counting,
    a2_prepare,
    a2_sample_raw,
    a2_sample_useful,
    a3_counting,
    a3_prepare,
    a3_sample_raw,
    a3_sample_useful,
)
from qlinkpred.graph import Graph, QueryLedger
from qlinkpred.harness import distribution_check
from qlinkpred.sampling import EmptySupportError, RandomStream, derive_stream

from conftest import complete, cycle, path3, random_graphs, star


def test_a2_counting_path():
    assert a2_counting(path3()).matrix.tolist() == [[1, 0, 1], [0, 2, 0], [1, 0, 1]]


def test_a3_counting_closed_forms():
    p = path3()
    assert np.array_equal(a3_counting(p).matrix, 2 * p.adjacency_matrix())
    c = cycle(5)
    a = c.adjacency_matrix()
    ring = np.array([[min((i - j) % 5, (j - i) % 5) == 2 for j in range(5)] for i in range(5)], dtype=int)
    assert np.array_equal(a3_counting(c).matrix, 3 * a + ring)
    s = star(3)
    m = a3_counting(s)
    assert np.array_equal(m.matrix, 3 * s.adjacency_matrix())
    assert np.allclose(m.probabilities()[s.adjacency_matrix() == 1], 3 / 18)


def test_k3_counting():
    assert a2_counting(complete(3)).matrix.tolist() == [[2, 1, 1], [1, 2, 1], [1, 1, 2]]


@pytest.mark.parametrize("g", random_graphs(12, 2, 40, seed=5), ids=lambda g: f"N{g.node_count}")
def test_counting_matches_dense_powers(g):
    a = g.adjacency_matrix()
    led = QueryLedger()
    m2 = a2_counting(g, led).matrix
    assert np.array_equal(m2, a @ a)
    assert led.as_tuple() == (g.node_count, 2 * g.edge_count, 0)
    m3 = a3_counting(g).matrix
    assert np.array_equal(m3, a @ a @ a)
    k = a.sum(axis=1)
    # ||A^2|| = sum_v k_v^2 and ||A^3|| = sum over directed edges of k_u k_v
    assert m2.sum() == (k**2).sum()
    assert m3.sum() == (np.outer(k, k) * a).sum()


@pytest.mark.parametrize("g, total", [(path3(), 6), (cycle(5), 20), (star(3), 12)])
def test_a2_prepare_weights(g, total):
    led = QueryLedger()
    prep = a2_prepare(g, led)
    assert prep.table.total == total
    assert list(prep.table.weights()) == [k * k for k in g.adjacency_matrix().sum(axis=1)]
    assert led.as_tuple() == (g.node_count, 0, 0)


@pytest.mark.parametrize("g, total", [(path3(), 8), (cycle(5), 40)])
def test_a3_prepare_weights(g, total):
    led = QueryLedger()
    prep = a3_prepare(g, led)
    assert prep.table.total == total
    assert led.as_tuple() == (g.node_count, 2 * g.edge_count, 0)


def test_prepare_rejects_edgeless():
    g = Graph.from_edges(3, np.empty((0, 2), int))
    with pytest.raises(EmptySupportError):
        a2_prepare(g, QueryLedger())
    with pytest.raises(EmptySupportError):
        a3_prepare(g, QueryLedger())


def test_raw_draw_costs():
    g = cycle(7)
    led = QueryLedger()
    prep = a2_prepare(g, led)
    rng = RandomStream(1)
    for _ in range(50):
        a2_sample_raw(g, led, prep, rng)
    assert led.as_tuple() == (7, 100, 0)
    led = QueryLedger()
    prep = a3_prepare(g, led)
    before = led.as_tuple()
    for _ in range(50):
        i, j = a3_sample_raw(g, led, prep, rng)
        assert 0 <= i < 7 and 0 <= j < 7
    assert led.as_tuple() == before


def test_a2_useful_path_support_and_attempts():
    g, led = path3(), QueryLedger()
    prep = a2_prepare(g, led)
    recs = a2_sample_useful(g, led, prep, RandomStream(2), 4000)
    assert {(r.i, r.j) for r in recs} == {(0, 2), (2, 0)}
    attempts = np.array([r.raw_attempts for r in recs])
    assert attempts.min() >= 1
    # geometric with p = 1/3: mean 3, sd sqrt(6)
    assert abs(attempts.mean() - 3) < 4 * np.sqrt(6 / 4000)
    n_raw = attempts.sum()
    assert led.neighbour_queries == 2 * n_raw
    assert 4000 <= led.pair_queries <= n_raw


def test_a2_useful_exact_pair_charge(monkeypatch):
    import qlinkpred.classical as cl

    g = random_graphs(1, 30, 30, seed=9)[0]
    self_draws = []
    real = cl.a2_sample_raw_batch

    def spy(*args):
        i, j = real(*args)
        self_draws.append(int((i == j).sum()))
        return i, j

    monkeypatch.setattr(cl, "a2_sample_raw_batch", spy)
    led = QueryLedger()
    prep = a2_prepare(g, led)
    recs = a2_sample_useful(g, led, prep, RandomStream(3), 500)
    n_raw = sum(r.raw_attempts for r in recs)
    assert led.as_tuple() == (30, 2 * n_raw, n_raw - sum(self_draws))


def test_support_exhausted():
    g = complete(3)
    led = QueryLedger()
    with pytest.raises(SupportExhaustedError) as e:
        a2_sample_useful(g, led, a2_prepare(g, led), RandomStream(0), 5, attempt_cap=1000)
    assert e.value.attempts == 1000 and e.value.accepted == 0
    for g in (path3(), star(4)):
        with pytest.raises(SupportExhaustedError):
            a3_sample_useful(g, led, a3_prepare(g, led), RandomStream(0), 5, attempt_cap=1000)


def test_a3_useful_cycle_hits_only_diagonals():
    g, led = cycle(5), QueryLedger()
    prep = a3_prepare(g, led)
    recs = a3_sample_useful(g, led, prep, RandomStream(4), 3000)
    want = {(i, j) for i in range(5) for j in range(5) if min((i - j) % 5, (j - i) % 5) == 2}
    assert len(want) == 10
    assert {(r.i, r.j) for r in recs} == want
    # acceptance 10/40 for A^3 on C5
    assert abs(np.mean([r.raw_attempts for r in recs]) - 4) < 4 * np.sqrt(12 / 3000)


@pytest.mark.parametrize("method", ["a2", "a3"])
@pytest.mark.parametrize("k", range(4))
def test_small_graph_raw_distribution(method, k):
    g = random_graphs(1, 5, 8, seed=100 + k, density=(0.4, 0.7))[0]
    if g.edge_count == 0:
        pytest.skip("edgeless draw")
    rep = distribution_check(method, g, 10**5, derive_stream(8, k))
    assert rep.tv < 0.02
    assert rep.chi2_pvalue > 1e-3
