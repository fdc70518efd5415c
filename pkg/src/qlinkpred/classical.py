"""Path-counting oracles and the randomized A^2 / A^3 link samplers.

All graph access goes through the metered query functions in
:mod:`qlinkpred.graph`. Costs per operation:

=================  ====================================================
``a2_counting``    N degree + 2|E| neighbour queries
``a3_counting``    N degree + 2|E| neighbour queries
``a2_prepare``     N degree queries
A^2 raw draw       2 neighbour queries (+1 pair query when i != j)
``a3_prepare``     N degree + 2|E| neighbour queries (degrees cached)
A^3 raw draw       nothing; the whole graph is already in memory
=================  ====================================================

``a3_prepare`` reuses the degree scan for k_u; re-querying k_u for every
directed pair would instead cost N + 2|E| degree + 2|E| neighbour queries.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import (
    Graph,
    QueryLedger,
    degree_queries,
    neighbour_queries,
    vertex_pair_queries,
)
from .sampling import (
    CumulativeWeightTable,
    EmptySupportError,
    RandomStream,
    build_cumulative,
    sample_index,
    sample_indices,
)

COUNTING_CAP = 2048


class CapacityError(ValueError):
    pass


class SupportExhaustedError(RuntimeError):
    """Raised when the attempt cap is hit before enough useful samples."""

    def __init__(self, method: str, attempts: int, accepted: int):
        self.method = method
        self.attempts = attempts
        self.accepted = accepted
        self.acceptance_rate = accepted / attempts if attempts else 0.0
        super().__init__(
            f"{method}: {accepted} useful samples after {attempts} raw draws "
            f"(acceptance rate {self.acceptance_rate:.3g}); the useful support is empty or tiny"
        )


@dataclass(frozen=True, slots=True)
class SampleRecord:
    method: str
    i: int
    j: int
    raw_attempts: int


@dataclass(frozen=True, eq=False)
class PowerDistribution:
    order: int
    matrix: np.ndarray

    @property
    def norm(self) -> int:
        """L_{1,1} norm; entries are non-negative."""
        return int(self.matrix.sum())

    def probabilities(self) -> np.ndarray:
        return self.matrix / self.matrix.sum()


def default_attempt_cap(n_s: int) -> int:
    return max(10**6, 10**4 * n_s)


def _read_graph(g: Graph, ledger: QueryLedger):
    """Read every neighbour list through the oracle: N degree + 2|E| neighbour queries."""
    n = g.node_count
    degs = degree_queries(g, ledger, np.arange(n))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(degs, out=indptr[1:])
    vs = np.repeat(np.arange(n), degs)
    ls = np.arange(len(vs)) - indptr[vs] + 1
    indices = neighbour_queries(g, ledger, vs, ls)
    return degs, indptr, indices


def _check_cap(g: Graph, cap: int) -> None:
    if g.node_count > cap:
        raise CapacityError(f"N={g.node_count} exceeds the dense counting cap {cap}")


def a2_counting(g: Graph, ledger: QueryLedger | None = None, cap: int = COUNTING_CAP) -> PowerDistribution:
    _check_cap(g, cap)
    ledger = QueryLedger() if ledger is None else ledger
    n = g.node_count
    _, indptr, indices = _read_graph(g, ledger)
    m = np.zeros((n, n), dtype=np.int64)
    for v in range(n):
        nb = indices[indptr[v]:indptr[v + 1]]
        # all (i, j) in Gamma(v) x Gamma(v); rows hold no repeats so += is exact
        m[np.ix_(nb, nb)] += 1
    return PowerDistribution(2, m)


def a3_counting(g: Graph, ledger: QueryLedger | None = None, cap: int = COUNTING_CAP) -> PowerDistribution:
    _check_cap(g, cap)
    ledger = QueryLedger() if ledger is None else ledger
    n = g.node_count
    _, indptr, indices = _read_graph(g, ledger)
    m = np.zeros((n, n), dtype=np.int64)
    for v in range(n):
        nv = indices[indptr[v]:indptr[v + 1]]
        for u in nv:
            nu = indices[indptr[u]:indptr[u + 1]]
            m[np.ix_(nv, nu)] += 1
    return PowerDistribution(3, m)


# --------------------------------------------------------------------- A^2

@dataclass(frozen=True, eq=False)
class A2Table:
    """Node table with weights k_v^2; degrees kept so draws need no degree query."""

    table: CumulativeWeightTable
    degrees: np.ndarray


def a2_prepare(g: Graph, ledger: QueryLedger) -> A2Table:
    degs = degree_queries(g, ledger, np.arange(g.node_count))
    if not degs.any():
        raise EmptySupportError("graph has no edges")
    return A2Table(build_cumulative(degs.astype(np.float64) ** 2), degs)


def a2_sample_raw(g: Graph, ledger: QueryLedger, prep: A2Table, rng: RandomStream) -> tuple[int, int]:
    v = sample_index(prep.table, rng)
    k = int(prep.degrees[v])
    ls = rng.integers(1, k + 1, size=2)
    i, j = neighbour_queries(g, ledger, [v, v], ls)
    return int(i), int(j)


def a2_sample_raw_batch(g: Graph, ledger: QueryLedger, prep: A2Table, rng: RandomStream, size: int):
    """``size`` independent raw draws as two arrays; 2*size neighbour queries."""
    vs = sample_indices(prep.table, rng, size)
    k = prep.degrees[vs]
    li = np.floor(rng.random(size) * k).astype(np.int64) + 1
    lj = np.floor(rng.random(size) * k).astype(np.int64) + 1
    i = neighbour_queries(g, ledger, vs, li)
    j = neighbour_queries(g, ledger, vs, lj)
    return i, j


def _collect_useful(draw, is_useful, n_s, attempt_cap, method="?"):
    """Draw until n_s candidates pass ``is_useful``.

    ``draw(b)`` returns ``(i, j, tags)`` where tags is one method string or
    an array with one per draw. Each round draws exactly as many raw
    candidates as useful samples are still missing, so no draw is made that
    a one-at-a-time loop would skip.
    """
    if n_s < 1:
        raise ValueError("n_s must be at least 1")
    cap = default_attempt_cap(n_s) if attempt_cap is None else attempt_cap
    out: list[SampleRecord] = []
    attempts = 0
    since_last = 0
    while len(out) < n_s:
        batch = min(n_s - len(out), cap - attempts)
        if batch <= 0:
            raise SupportExhaustedError(method, attempts, len(out))
        i, j, tags = draw(batch)
        ok = is_useful(i, j)
        attempts += batch
        hits = np.flatnonzero(ok)
        gaps = np.diff(hits, prepend=-1)
        gaps[:1] += since_last
        for h, gap in zip(hits.tolist(), gaps.tolist()):
            tag = tags if isinstance(tags, str) else str(tags[h])
            out.append(SampleRecord(tag, int(i[h]), int(j[h]), int(gap)))
        since_last = int(batch - 1 - hits[-1]) if len(hits) else since_last + batch
    return out


def a2_sample_useful(g: Graph, ledger: QueryLedger, prep: A2Table, rng: RandomStream,
                     n_s: int, attempt_cap: int | None = None) -> list[SampleRecord]:
    def useful(i, j):
        ok = i != j
        ok[ok] = vertex_pair_queries(g, ledger, i[ok], j[ok]) == 0
        return ok

    def draw(b):
        return (*a2_sample_raw_batch(g, ledger, prep, rng, b), "A2")

    return _collect_useful(draw, useful, n_s, attempt_cap, "A2")


# --------------------------------------------------------------------- A^3

@dataclass(frozen=True, eq=False)
class A3Table:
    """Directed adjacent pairs (u, v) weighted k_u*k_v, plus the graph as read."""

    table: CumulativeWeightTable
    pair_u: np.ndarray
    pair_v: np.ndarray
    degrees: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    keys: np.ndarray

    def neighbour(self, v, pos):
        return self.indices[self.indptr[v] + pos]

    def adjacent(self, i, j) -> np.ndarray:
        # binary search in the cached (row, col) keys; rows were read sorted
        n = len(self.degrees)
        q = np.asarray(i, dtype=np.int64) * n + np.asarray(j, dtype=np.int64)
        k = np.minimum(np.searchsorted(self.keys, q), len(self.keys) - 1)
        return self.keys[k] == q


def a3_prepare(g: Graph, ledger: QueryLedger) -> A3Table:
    degs, indptr, indices = _read_graph(g, ledger)
    if len(indices) == 0:
        raise EmptySupportError("graph has no edges")
    v = np.repeat(np.arange(g.node_count), degs)
    u = indices
    # k_u comes from the degree scan above, not a fresh query
    w = degs[u].astype(np.float64) * degs[v].astype(np.float64)
    keys = v * g.node_count + u
    return A3Table(build_cumulative(w), u, v, degs, indptr, indices, keys)


def a3_sample_raw(g: Graph, ledger: QueryLedger, prep: A3Table, rng: RandomStream) -> tuple[int, int]:
    e = sample_index(prep.table, rng)
    u, v = int(prep.pair_u[e]), int(prep.pair_v[e])
    i = prep.neighbour(u, int(rng.integers(0, prep.degrees[u])))
    j = prep.neighbour(v, int(rng.integers(0, prep.degrees[v])))
    return int(i), int(j)


def a3_sample_raw_batch(g: Graph, ledger: QueryLedger, prep: A3Table, rng: RandomStream, size: int):
    e = sample_indices(prep.table, rng, size)
    u, v = prep.pair_u[e], prep.pair_v[e]
    pi = np.floor(rng.random(size) * prep.degrees[u]).astype(np.int64)
    pj = np.floor(rng.random(size) * prep.degrees[v]).astype(np.int64)
    return prep.neighbour(u, pi), prep.neighbour(v, pj)


def a3_sample_useful(g: Graph, ledger: QueryLedger, prep: A3Table, rng: RandomStream,
                     n_s: int, attempt_cap: int | None = None) -> list[SampleRecord]:
    def useful(i, j):
        return (i != j) & ~prep.adjacent(i, j)

    def draw(b):
        return (*a3_sample_raw_batch(g, ledger, prep, rng, b), "A3")

    return _collect_useful(draw, useful, n_s, attempt_cap, "A3")
