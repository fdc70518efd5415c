import math

import numpy as np
import pytest

from qlinkpred.metrics import (
    InvalidHoldoutError,
    RegimeError,
    ScoreDistribution,
    SolutionMask,
    UnnormalizedError,
    correct_curve,
    crossover_samples,
    good_curve,
    good_mask,
    kmax_scalefree,
    p_bad,
    p_cg_classical,
    p_correct_given_good,
    p_correct_qlp,
    p_good,
    p_good_classical,
    p_good_qlp,
    query_cost_table,
)
from qlinkpred.qlp import decompose, evolve, qlp_distribution

from conftest import c5_tail, cycle, k2, path3, random_graphs


def test_good_and_bad_examples():
    g = path3()
    a = g.adjacency_matrix()
    d = ScoreDistribution.from_scores(a @ a)
    assert p_bad(d, g) == pytest.approx(4 / 6)
    assert p_good(d, g) == pytest.approx(1 / 3)
    c = cycle(5)
    a = c.adjacency_matrix()
    assert p_good(ScoreDistribution.from_scores(a @ a @ a), c) == pytest.approx(1 / 4)
    assert p_good_classical(g, 2) == pytest.approx(1 / 3)
    assert p_good_classical(c, 3) == pytest.approx(1 / 4)
    assert p_good_classical(path3(), 3) == 0.0


def test_unnormalized_rejected():
    d = ScoreDistribution(np.array([[0.5, 0.6], [0.0, 0.0]]), 1)
    with pytest.raises(UnnormalizedError):
        p_good(d, k2())


@pytest.mark.parametrize("g", random_graphs(8, 3, 30, seed=31) + [c5_tail()], ids=lambda g: f"N{g.node_count}")
def test_qlp_curves_match_brute_force(g):
    dec = decompose(g)
    ts = [0.1, 0.9, 3.0]
    even, odd = good_curve(g, dec, ts)
    m = good_mask(g)
    rng = np.random.default_rng(g.node_count)
    pairs = [(u, v) for u in range(g.node_count) for v in range(u + 1, g.node_count)
             if not g.has_edge(u, v)]
    take = rng.permutation(len(pairs))[: max(1, len(pairs) // 3)] if pairs else []
    sol = SolutionMask.from_edges(g.node_count, [pairs[k] for k in take])
    ce, co = correct_curve(dec, sol, ts)
    for k, t in enumerate(ts):
        pe, po = qlp_distribution(evolve(dec, t))
        assert even[k] == pytest.approx((pe * m).sum(), abs=1e-10)
        assert odd[k] == pytest.approx((po * m).sum(), abs=1e-10)
        s = sol.matrix()
        assert ce[k] == pytest.approx((pe * s).sum(), abs=1e-10)
        assert co[k] == pytest.approx((po * s).sum(), abs=1e-10)
        good = p_good_qlp(g, evolve(dec, t))
        assert good.total == pytest.approx(even[k] + odd[k])


def test_p_correct_cases():
    assert p_correct_given_good(0.1, 0.4) == pytest.approx(0.25)
    assert p_correct_given_good(0.0, 0.4) == 0.0
    assert p_correct_given_good(0.1, 1e-7) is None
    assert p_correct_given_good(0.1, 0.0) is None
    # all good mass on the solution
    assert p_correct_given_good(0.3, 0.3 - 1e-15) == 1.0


def test_classical_precision_on_cycle_diagonals():
    g = cycle(5)
    diag = [(i, (i + 2) % 5) for i in range(5)]
    train_sol = SolutionMask.from_edges(5, diag)
    assert p_cg_classical(g, 2, train_sol) == pytest.approx(1.0)
    assert p_cg_classical(g, 3, train_sol) == pytest.approx(1.0)
    half = SolutionMask.from_edges(5, diag[:2])
    assert p_cg_classical(g, 3, half) == pytest.approx(2 / 5)
    assert p_cg_classical(path3(), 3, SolutionMask.from_edges(3, [(0, 2)])) is None
    pe, po = p_correct_qlp(g, evolve(decompose(g), 1.0), train_sol)
    good = p_good_qlp(g, evolve(decompose(g), 1.0))
    assert pe == pytest.approx(good.even) and po == pytest.approx(good.odd)


def test_invalid_holdout():
    g = cycle(5)
    with pytest.raises(InvalidHoldoutError):
        p_cg_classical(g, 2, SolutionMask.from_edges(5, [(0, 1)]))
    with pytest.raises(InvalidHoldoutError):
        SolutionMask.from_edges(5, [(2, 2)])
    with pytest.raises(InvalidHoldoutError):
        p_correct_qlp(g, evolve(decompose(g), 1.0), SolutionMask.from_edges(6, [(0, 5)]))


def test_scale_free_formulas():
    assert kmax_scalefree(10**6, 3) == pytest.approx(1000)
    assert crossover_samples(10**6, 3) == pytest.approx(1000)
    assert crossover_samples(10**6, 2.5) == pytest.approx(10**2)
    for bad in (2, 1.5):
        with pytest.raises(RegimeError):
            kmax_scalefree(100, bad)
        with pytest.raises(RegimeError):
            crossover_samples(100, bad)


def test_cost_table_example():
    n = 10**6
    tab = query_cost_table(n, 5 * n, n_s=1, p_g=0.5, k_max=1000, t=1)
    assert tab["QLP"].queries == pytest.approx(2000)
    assert tab["A2"].queries == pytest.approx(10**6 + 2)
    assert tab["A3"].queries == pytest.approx(10**7)
    # QLP wins while n_s k_max t / p_G < N + n_s / p_G
    ns = tab.crossover_ns
    at = query_cost_table(n, 5 * n, n_s=ns, p_g=0.5, k_max=1000, t=1)
    assert at["QLP"].queries == pytest.approx(at["A2"].queries)


def test_cost_table_zero_good_probability():
    tab = query_cost_table(100, 300, 10, 0.0, 10, 1.0)
    assert math.isinf(tab["A2"].queries) and math.isinf(tab["QLP"].queries)
    assert math.isinf(tab.crossover_ns)
    with pytest.raises(ValueError):
        query_cost_table(100, 300, 10, 1.5, 10, 1.0)


def test_bundled_network_good_probability_saturates():
    from importlib import resources

    from qlinkpred.graph import load_edge_list

    with resources.files("qlinkpred.data").joinpath("karate.edges").open(encoding="utf-8") as fh:
        g, _ = load_edge_list(fh)
    even, odd = good_curve(g, decompose(g), np.linspace(2, 10, 33))
    assert (even + odd).min() > 0.05
