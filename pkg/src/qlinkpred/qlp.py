"""Classical evaluation of the quantum link-prediction (QLP) output distribution.

Measuring the QLP circuit yields ``(even, i, j)`` with probability
``cos(At)_ij**2 / N`` and ``(odd, i, j)`` with probability
``sin(At)_ij**2 / N``. Those two tables fully describe the measurement
statistics, so they are computed directly instead of simulating gates.

Two backends give entries of cos(At) and sin(At):

* dense spectral (``numpy.linalg.eigh``), the default and the reference;
* Chebyshev expansion with Bessel coefficients on sparse A, column by
  column, for graphs too large to diagonalise.

The query ledger is never charged here: the quantum query cost is a
theoretical quantity, see :func:`qlinkpred.metrics.query_cost_table`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, jv

from .classical import SampleRecord, _collect_useful
from .graph import Graph
from .sampling import CumulativeWeightTable, RandomStream, build_cumulative, sample_index, sample_indices

DENSE_CAP = 8192

EVEN = "even"
ODD = "odd"


class DenseCapError(ValueError):
    pass


class TruncationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.eigenvalues)


def decompose(g: Graph, cap: int = DENSE_CAP) -> SpectralDecomposition:
    if g.node_count > cap:
        raise DenseCapError(
            f"N={g.node_count} exceeds the dense cap {cap}; use chebyshev_entries for large graphs"
        )
    lam, vec = np.linalg.eigh(g.adjacency_matrix(np.float64))
    lam.flags.writeable = False
    vec.flags.writeable = False
    return SpectralDecomposition(lam, vec)


@dataclass(eq=False)
class QlpEvolution:
    """cos(At) and sin(At) at a fixed walk time, from a spectral decomposition."""

    decomposition: SpectralDecomposition
    t: float
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def node_count(self) -> int:
        return self.decomposition.node_count

    def _apply(self, fn) -> np.ndarray:
        lam, v = self.decomposition.eigenvalues, self.decomposition.vectors
        return (v * fn(lam * self.t)) @ v.T

    def cos_matrix(self) -> np.ndarray:
        if "cos" not in self._cache:
            self._cache["cos"] = self._apply(np.cos)
        return self._cache["cos"]

    def sin_matrix(self) -> np.ndarray:
        if "sin" not in self._cache:
            self._cache["sin"] = self._apply(np.sin)
        return self._cache["sin"]

    def entry(self, i: int, j: int) -> tuple[float, float]:
        v = self.decomposition.vectors
        w = v[i] * v[j]
        phase = self.decomposition.eigenvalues * self.t
        return float(w @ np.cos(phase)), float(w @ np.sin(phase))

    def outcome_table(self) -> CumulativeWeightTable:
        """Cumulative table over the flattened 2N^2 outcomes, even block first."""
        if "table" not in self._cache:
            pe, po = qlp_distribution(self)
            self._cache["table"] = build_cumulative(np.concatenate([pe.ravel(), po.ravel()]))
        return self._cache["table"]


def evolve(decomposition: SpectralDecomposition, t: float) -> QlpEvolution:
    return QlpEvolution(decomposition, float(t))


def cos_sin_entry(evo, i: int, j: int) -> tuple[float, float]:
    """``(cos(At)_ij, sin(At)_ij)`` from either backend."""
    return evo.entry(i, j)


def qlp_distribution(evo: QlpEvolution, cap: int = DENSE_CAP) -> tuple[np.ndarray, np.ndarray]:
    n = evo.node_count
    if n > cap:
        raise DenseCapError(f"N={n} exceeds the dense cap {cap}")
    return evo.cos_matrix() ** 2 / n, evo.sin_matrix() ** 2 / n


def _decode(flat, n):
    parity = flat // (n * n)
    rest = flat % (n * n)
    return parity, rest // n, rest % n


def qlp_sample(evo: QlpEvolution, rng: RandomStream) -> tuple[str, int, int]:
    parity, i, j = _decode(sample_index(evo.outcome_table(), rng), evo.node_count)
    return (ODD if parity else EVEN), int(i), int(j)


def qlp_sample_batch(evo: QlpEvolution, rng: RandomStream, size: int):
    """Arrays ``(parity, i, j)`` with parity 0 = even, 1 = odd."""
    return _decode(sample_indices(evo.outcome_table(), rng, size), evo.node_count)


def qlp_sample_useful(g: Graph, evo: QlpEvolution, rng: RandomStream, n_s: int,
                      attempt_cap: int | None = None) -> list[SampleRecord]:
    """QLP sampling with rejection of diagonal and existing-edge outcomes.

    Records are tagged ``QLP-even`` (ancilla 0) or ``QLP-odd`` (ancilla 1).
    """
    tags = np.array(["QLP-even", "QLP-odd"])

    def draw(b):
        p, i, j = qlp_sample_batch(evo, rng, b)
        return i, j, tags[p]

    def useful(i, j):
        return (i != j) & ~g.has_edges(i, j)

    return _collect_useful(draw, useful, n_s, attempt_cap, "QLP")


# ----------------------------------------------------------------- Chebyshev

def _log_tail_bound(tau: float, order: int) -> float:
    """log of 2 * sum_{n>order} (tau/2)^n / n!, a bound on the truncation error."""
    n = order + 1
    if tau == 0:
        return -math.inf
    log_term = n * math.log(tau / 2) - gammaln(n + 1)
    ratio = (tau / 2) / (n + 1)
    if ratio >= 1:
        return math.inf
    return math.log(2) + log_term - math.log1p(-ratio)


def minimum_order(tau: float) -> int:
    return math.ceil(math.e * tau / 2)


def chebyshev_order(tau: float, tol: float = 1e-12) -> int:
    """Smallest order whose tail bound is below ``tol``."""
    m = minimum_order(tau)
    while _log_tail_bound(tau, m) > math.log(tol):
        m += 1
    return m


def chebyshev_entries(g: Graph, t: float, columns, order: int | None = None,
                      tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Columns of cos(At) and sin(At) via a Chebyshev expansion.

    A is rescaled by k_max so its spectrum lies in [-1, 1];
    cos(tau x) = J0(tau) + 2 sum_k (-1)^k J_2k(tau) T_2k(x) and
    sin(tau x) = 2 sum_k (-1)^k J_2k+1(tau) T_2k+1(x) with tau = t k_max.
    Returns two ``(N, len(columns))`` arrays.
    """
    n = g.node_count
    cols = np.atleast_1d(np.asarray(columns, dtype=np.int64))
    basis = np.zeros((n, len(cols)))
    basis[cols, np.arange(len(cols))] = 1.0
    kmax = g.max_degree()
    tau = float(t) * kmax
    if order is None:
        order = chebyshev_order(tau, tol)
    if order < minimum_order(tau) or _log_tail_bound(tau, order) > math.log(tol):
        raise TruncationError(
            f"order {order} too small for t*k_max={tau:g}; need at least {chebyshev_order(tau, tol)}"
        )
    if tau == 0:
        return basis, np.zeros_like(basis)
    x = g.sparse_adjacency() / kmax
    coef = jv(np.arange(order + 1), tau)
    cos = coef[0] * basis
    sin = np.zeros_like(basis)
    t_prev, t_cur = basis, x @ basis
    for k in range(1, order + 1):
        if k > 1:
            t_prev, t_cur = t_cur, 2 * (x @ t_cur) - t_prev
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            sin += 2 * sign * coef[k] * t_cur
        else:
            cos += 2 * sign * coef[k] * t_cur
    return cos, sin


@dataclass(eq=False)
class ChebyshevEvolution:
    """Entry access to cos(At)/sin(At) on the Chebyshev backend."""

    graph: Graph
    t: float
    order: int | None = None

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    def columns(self, js) -> tuple[np.ndarray, np.ndarray]:
        return chebyshev_entries(self.graph, self.t, js, self.order)

    def entry(self, i: int, j: int) -> tuple[float, float]:
        c, s = self.columns([j])
        return float(c[i, 0]), float(s[i, 0])
