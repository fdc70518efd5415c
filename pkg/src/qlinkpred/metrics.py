"""Useful/correct-sample probabilities and query-cost estimates.

Conventions:

* An ordered pair (i, j) is *good* (useful) when i != j and A_ij = 0;
  the mask is G = J - (A + I).
* A classical score table f is sampled with probability |f_ij| / ||f||_{1,1}
  (q = 1); QLP samples |cos(At)_ij|^2 / N and |sin(At)_ij|^2 / N (q = 2).
* Ratios whose denominator is below ``P_GOOD_FLOOR`` are undefined and
  returned as ``None``, never NaN.
* The classical precision is sum(A' * A^n) / sum(G * A^n), the q = 1
  counterpart of the QLP ratio p_C / p_G.

These are analysis tools on the full graph; nothing here is charged to a
query ledger.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, canonical_edges
from .qlp import QlpEvolution, SpectralDecomposition

P_GOOD_FLOOR = 1e-6
NORMALIZATION_TOL = 1e-9


class UnnormalizedError(ValueError):
    pass


class InvalidHoldoutError(ValueError):
    pass


class RegimeError(ValueError):
    pass


# ------------------------------------------------------------ masks & scores

def good_mask(g: Graph) -> np.ndarray:
    n = g.node_count
    return (np.ones((n, n), dtype=np.int64) - g.adjacency_matrix() - np.eye(n, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class SolutionMask:
    """Held-out edges A' as canonical (u < v) pairs over ``node_count`` nodes."""

    node_count: int
    edges: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges) -> "SolutionMask":
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(e) and np.any(e[:, 0] == e[:, 1]):
            raise InvalidHoldoutError("held-out pairs must join distinct nodes")
        e, _, _ = canonical_edges(e, n)
        return cls(n, e)

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.node_count, self.node_count), dtype=np.int64)
        m[self.edges[:, 0], self.edges[:, 1]] = 1
        m[self.edges[:, 1], self.edges[:, 0]] = 1
        return m

    def contains(self, i, j) -> np.ndarray:
        n = self.node_count
        keys = self.edges[:, 0] * n + self.edges[:, 1]
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        q = np.minimum(i, j) * n + np.maximum(i, j)
        return np.isin(q, keys)

    def __len__(self) -> int:
        return len(self.edges)


def validate_solution(g: Graph, solution: SolutionMask) -> None:
    if solution.node_count != g.node_count:
        raise InvalidHoldoutError("solution and graph have different node counts")
    if len(solution) and np.any(g.has_edges(solution.edges[:, 0], solution.edges[:, 1])):
        raise InvalidHoldoutError("held-out pairs overlap edges of the train graph")


@dataclass(frozen=True, eq=False)
class ScoreDistribution:
    """Normalized sampling probabilities |f_ij|^q / ||f||_q^q."""

    probabilities: np.ndarray
    q: int

    @classmethod
    def from_scores(cls, f, q: int = 1) -> "ScoreDistribution":
        w = np.abs(np.asarray(f, dtype=np.float64)) ** q
        return cls(w / w.sum(), q)

    def check(self) -> None:
        if abs(self.probabilities.sum() - 1.0) > NORMALIZATION_TOL:
            raise UnnormalizedError(f"probabilities sum to {self.probabilities.sum()!r}")


def p_bad(dist: ScoreDistribution, g: Graph) -> float:
    dist.check()
    bad = g.adjacency_matrix() + np.eye(g.node_count, dtype=np.int64)
    return float((bad * dist.probabilities).sum())


def p_good(dist: ScoreDistribution, g: Graph) -> float:
    dist.check()
    return float((good_mask(g) * dist.probabilities).sum())


# ------------------------------------------------------------------ QLP

@dataclass(frozen=True)
class QlpGood:
    even: float
    odd: float

    @property
    def total(self) -> float:
        return self.even + self.odd


def _pair_sums(vec: np.ndarray, lam: np.ndarray, pairs: np.ndarray, ts, chunk: int = 2048):
    """Sum over unordered ``pairs`` of cos(At)_ij^2 and sin(At)_ij^2 for each t."""
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    phase = np.outer(lam, ts)
    cos, sin = np.cos(phase), np.sin(phase)
    ce = np.zeros(len(ts))
    se = np.zeros(len(ts))
    for s in range(0, len(pairs), chunk):
        p = pairs[s:s + chunk]
        w = vec[p[:, 0]] * vec[p[:, 1]]
        ce += ((w @ cos) ** 2).sum(axis=0)
        se += ((w @ sin) ** 2).sum(axis=0)
    return ce, se


def good_curve(g: Graph, decomposition: SpectralDecomposition, ts) -> tuple[np.ndarray, np.ndarray]:
    """p_G^even(t) and p_G^odd(t) over a grid of walk times.

    Uses sum_ij cos(At)_ij^2 = sum_k cos^2(lambda_k t) and subtracts the
    diagonal and edge entries, so the cost is O(N (N + |E|)) per t.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    lam, vec = decomposition.eigenvalues, decomposition.vectors
    n = len(lam)
    phase = np.outer(lam, ts)
    cos, sin = np.cos(phase), np.sin(phase)
    sq = vec**2
    diag_c = ((sq @ cos) ** 2).sum(axis=0)
    diag_s = ((sq @ sin) ** 2).sum(axis=0)
    edge_c, edge_s = _pair_sums(vec, lam, g.edges(), ts)
    even = ((cos**2).sum(axis=0) - diag_c - 2 * edge_c) / n
    odd = ((sin**2).sum(axis=0) - diag_s - 2 * edge_s) / n
    return np.maximum(even, 0.0), np.maximum(odd, 0.0)


def correct_curve(decomposition: SpectralDecomposition, solution: SolutionMask, ts):
    """p_C^even(t) and p_C^odd(t) over a grid of walk times."""
    n = decomposition.node_count
    ce, se = _pair_sums(decomposition.vectors, decomposition.eigenvalues, solution.edges, ts)
    return 2 * ce / n, 2 * se / n


def p_good_qlp(g: Graph, evo: QlpEvolution) -> QlpGood:
    even, odd = good_curve(g, evo.decomposition, [evo.t])
    return QlpGood(float(even[0]), float(odd[0]))


def p_correct_qlp(g: Graph, evo: QlpEvolution, solution: SolutionMask) -> tuple[float, float]:
    validate_solution(g, solution)
    even, odd = correct_curve(evo.decomposition, solution, [evo.t])
    return float(even[0]), float(odd[0])


def p_correct_given_good(p_c: float, p_g: float, floor: float = P_GOOD_FLOOR) -> float | None:
    if p_g <= floor:
        return None
    return float(min(max(p_c / p_g, 0.0), 1.0))


# ------------------------------------------------------------ classical

def adjacency_power(g: Graph, n: int) -> np.ndarray:
    """Dense A^n in float64 (exact while entries stay below 2**53)."""
    a = g.adjacency_matrix(np.float64)
    out = a
    for _ in range(n - 1):
        out = out @ a
    return out


def p_cg_classical(g: Graph, n: int, solution: SolutionMask) -> float | None:
    if n not in (2, 3):
        raise ValueError("only A^2 and A^3 are supported")
    validate_solution(g, solution)
    m = adjacency_power(g, n)
    e = g.edges()
    bad = np.trace(m) + 2 * m[e[:, 0], e[:, 1]].sum()
    denom = m.sum() - bad
    if denom <= 0:
        return None
    numer = 2 * m[solution.edges[:, 0], solution.edges[:, 1]].sum() if len(solution) else 0.0
    return float(numer / denom)


def p_good_classical(g: Graph, n: int) -> float:
    """Acceptance probability of the A^n sampler: sum(G * A^n) / ||A^n||_{1,1}."""
    m = adjacency_power(g, n)
    total = m.sum()
    if total == 0:
        return 0.0
    e = g.edges()
    bad = np.trace(m) + 2 * m[e[:, 0], e[:, 1]].sum()
    return float((total - bad) / total)


# ------------------------------------------------------------------ costs

def kmax_scalefree(n: float, gamma: float) -> float:
    if gamma <= 2:
        raise RegimeError(f"gamma={gamma} is outside the scale-free regime gamma > 2")
    return n ** (1.0 / (gamma - 1.0))


def crossover_samples(n: float, gamma: float) -> float:
    """n_s below which n_s * k_max stays sub-linear in N for k_max ~ N^(1/(gamma-1))."""
    if gamma <= 2:
        raise RegimeError(f"gamma={gamma} is outside the scale-free regime gamma > 2")
    return n ** ((gamma - 2.0) / (gamma - 1.0))


@dataclass(frozen=True)
class CostEstimate:
    method: str
    queries: float
    params: dict = field(default_factory=dict)
    note: str = ""


@dataclass(frozen=True)
class CostTable:
    estimates: dict
    crossover_ns: float

    def __getitem__(self, method: str) -> CostEstimate:
        return self.estimates[method]


def query_cost_table(n: int, edges: int, n_s: float, p_g: float, k_max: float, t: float,
                     eps: float | None = None) -> CostTable:
    """Leading-order query counts for producing n_s useful samples.

    A2: N + n_s/p_G.  A3: 2|E| neighbour reads (O(|E|)).  QLP with the
    d-sparse simulator: (n_s/p_G) k_max t.  ``eps`` is carried but its
    polylog factor is dropped.  p_G = 0 gives ``inf``.  ``crossover_ns`` is
    the n_s above which QLP costs more than A2 for these parameters.
    """
    if min(n, edges, n_s, k_max, t) <= 0:
        raise ValueError("N, |E|, n_s, k_max and t must be positive")
    if not 0 <= p_g <= 1:
        raise ValueError("p_G must lie in [0, 1]")
    params = dict(N=n, E=edges, n_s=n_s, p_G=p_g, k_max=k_max, t=t, eps=eps)
    runs = n_s / p_g if p_g > 0 else math.inf
    estimates = {
        "A2": CostEstimate("A2", n + runs, params),
        "A3": CostEstimate("A3", 2.0 * edges, params,
                           "2|E| directed neighbour reads; the N degree reads are dropped"),
        "QLP": CostEstimate("QLP", runs * k_max * t, params,
                            "d-sparse simulation, d = k_max; polylog(1/eps) dropped"),
    }
    if p_g == 0 or k_max * t <= 1:
        crossover = math.inf
    else:
        crossover = n * p_g / (k_max * t - 1)
    return CostTable(estimates, crossover)
