"""Immutable simple graphs behind a metered general-graph-model oracle.

Samplers only see a graph through :func:`degree_query`,
:func:`neighbour_query` and :func:`vertex_pair_query` (plus their batched
forms and ``node_count``). Every call is charged to a :class:`QueryLedger`.
The unmetered accessors on :class:`Graph` (``neighbours``, ``has_edge``,
``adjacency_matrix`` ...) exist for test oracles and the spectral build.

Neighbour order: ``Gamma_l(v)`` is the l-th entry of the *sorted*
neighbour list of ``v``. This is a convention of this package; any fixed
order would do.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, TextIO

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

# Returned by neighbour queries with l > k_v.
ABSENT = -1


class GraphError(ValueError):
    pass


class InvalidNodeError(GraphError, IndexError):
    pass


class EmptyGraphError(GraphError):
    pass


class EdgeListParseError(GraphError):
    def __init__(self, lineno: int, line: str):
        super().__init__(f"line {lineno}: expected two whitespace-separated labels, got {line!r}")
        self.lineno = lineno


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def canonical_edges(edges, n: int | None = None) -> tuple[np.ndarray, int, int]:
    """Return ``(unique u<v edges sorted, n_duplicates, n_self_loops)``."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    loops = e[:, 0] == e[:, 1]
    n_loops = int(loops.sum())
    e = e[~loops]
    e = np.sort(e, axis=1)
    if len(e):
        e = np.unique(e, axis=0)
    n_dup = int((~loops).sum()) - len(e)
    if n is not None and len(e) and (e.min() < 0 or e.max() >= n):
        raise InvalidNodeError(f"edge endpoint outside 0..{n - 1}")
    return e, n_dup, n_loops


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph in CSR form with sorted neighbour rows.

    Build with :meth:`from_edges` or :func:`load_edge_list`; the raw
    constructor does not validate.
    """

    indptr: np.ndarray
    indices: np.ndarray
    labels: tuple[str, ...]
    _keys: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges, labels: Iterable[str] | None = None) -> "Graph":
        """Build from an edge array; self-loops and duplicates are dropped."""
        if n < 1:
            raise EmptyGraphError("graph needs at least one node")
        e, _, _ = canonical_edges(edges, n)
        both = np.concatenate([e, e[:, ::-1]]) if len(e) else np.empty((0, 2), np.int64)
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = both[:, 1].copy()
        keys = both[:, 0] * n + both[:, 1]
        labels = tuple(str(i) for i in range(n)) if labels is None else tuple(labels)
        if len(labels) != n:
            raise GraphError(f"{len(labels)} labels for {n} nodes")
        return cls(_frozen(indptr), _frozen(indices), labels, _frozen(keys))

    @property
    def node_count(self) -> int:
        return len(self.indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def max_degree(self) -> int:
        d = self.degrees()
        return int(d.max()) if len(d) else 0

    def neighbours(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        if self.degree(u) > self.degree(v):
            u, v = v, u
        row = self.neighbours(u)
        k = np.searchsorted(row, v)
        return bool(k < len(row) and row[k] == v)

    def has_edges(self, us, vs) -> np.ndarray:
        """Vectorised membership test over ordered pairs."""
        q = np.asarray(us, dtype=np.int64) * self.node_count + np.asarray(vs, dtype=np.int64)
        if len(self._keys) == 0:
            return np.zeros(q.shape, dtype=bool)
        k = np.minimum(np.searchsorted(self._keys, q), len(self._keys) - 1)
        return self._keys[k] == q

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def edges(self) -> np.ndarray:
        """Canonical ``(|E|, 2)`` array with u < v, lexicographically sorted."""
        src = np.repeat(np.arange(self.node_count), self.degrees())
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def adjacency_matrix(self, dtype=np.int64) -> np.ndarray:
        n = self.node_count
        a = np.zeros((n, n), dtype=dtype)
        src = np.repeat(np.arange(n), self.degrees())
        a[src, self.indices] = 1
        return a

    def sparse_adjacency(self, dtype=np.float64) -> sp.csr_matrix:
        n = self.node_count
        data = np.ones(len(self.indices), dtype=dtype)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(n, n))

    def with_edges_removed(self, removed) -> "Graph":
        """Same node set and labels, minus the given edges."""
        rem, _, _ = canonical_edges(removed, self.node_count)
        e = self.edges()
        n = self.node_count
        keep = ~np.isin(e[:, 0] * n + e[:, 1], rem[:, 0] * n + rem[:, 1])
        return Graph.from_edges(n, e[keep], self.labels)

    def check_invariants(self) -> None:
        n = self.node_count
        for v in range(n):
            row = self.neighbours(v)
            assert np.all(np.diff(row) > 0), f"row {v} not strictly sorted"
            assert v not in row, f"self-loop at {v}"
        assert np.array_equal(np.sort(self._keys), self._keys)
        rev = (self._keys % n) * n + self._keys // n
        assert np.array_equal(np.sort(rev), self._keys), "asymmetric adjacency"
        assert 2 * self.edge_count == int(self.degrees().sum())


@dataclass
class QueryLedger:
    """Exact counts of the three general-graph-model query kinds."""

    degree_queries: int = 0
    neighbour_queries: int = 0
    pair_queries: int = 0

    def merge(self, other: "QueryLedger") -> "QueryLedger":
        return QueryLedger(
            self.degree_queries + other.degree_queries,
            self.neighbour_queries + other.neighbour_queries,
            self.pair_queries + other.pair_queries,
        )

    __add__ = merge

    def copy(self) -> "QueryLedger":
        return QueryLedger(self.degree_queries, self.neighbour_queries, self.pair_queries)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.degree_queries, self.neighbour_queries, self.pair_queries)

    @property
    def total(self) -> int:
        return sum(self.as_tuple())


def _check_node(g: Graph, v) -> int:
    v = int(v)
    if not 0 <= v < g.node_count:
        raise InvalidNodeError(f"node {v} outside 0..{g.node_count - 1}")
    return v


def _check_nodes(g: Graph, vs) -> np.ndarray:
    vs = np.asarray(vs, dtype=np.int64)
    if vs.size and (vs.min() < 0 or vs.max() >= g.node_count):
        raise InvalidNodeError(f"node ids outside 0..{g.node_count - 1}")
    return vs


def degree_query(g: Graph, ledger: QueryLedger, v: int) -> int:
    v = _check_node(g, v)
    ledger.degree_queries += 1
    return g.degree(v)


def neighbour_query(g: Graph, ledger: QueryLedger, v: int, l: int) -> int:
    """l-th (1-based) neighbour of v, or ``ABSENT`` when l > k_v."""
    v = _check_node(g, v)
    ledger.neighbour_queries += 1
    if l < 1 or l > g.degree(v):
        return ABSENT
    return int(g.indices[g.indptr[v] + l - 1])


def vertex_pair_query(g: Graph, ledger: QueryLedger, u: int, v: int) -> int:
    u = _check_node(g, u)
    v = _check_node(g, v)
    ledger.pair_queries += 1
    if u == v:
        return 0
    return int(g.has_edge(u, v))


def degree_queries(g: Graph, ledger: QueryLedger, vs) -> np.ndarray:
    """Batched degree queries; charges one query per element."""
    vs = _check_nodes(g, vs)
    ledger.degree_queries += vs.size
    return g.indptr[vs + 1] - g.indptr[vs]


def neighbour_queries(g: Graph, ledger: QueryLedger, vs, ls) -> np.ndarray:
    """Batched neighbour queries; charges one query per element."""
    vs = _check_nodes(g, vs)
    ls = np.asarray(ls, dtype=np.int64)
    vs, ls = np.broadcast_arrays(vs, ls)
    ledger.neighbour_queries += vs.size
    deg = g.indptr[vs + 1] - g.indptr[vs]
    ok = (ls >= 1) & (ls <= deg)
    out = np.full(vs.shape, ABSENT, dtype=np.int64)
    out[ok] = g.indices[g.indptr[vs[ok]] + ls[ok] - 1]
    return out


def vertex_pair_queries(g: Graph, ledger: QueryLedger, us, vs) -> np.ndarray:
    """Batched pair queries; charges one query per element."""
    us = _check_nodes(g, us)
    vs = _check_nodes(g, vs)
    us, vs = np.broadcast_arrays(us, vs)
    ledger.pair_queries += us.size
    return g.has_edges(us, vs).astype(np.int64)


@dataclass(frozen=True)
class LoadStats:
    lines: int
    dropped_duplicates: int
    dropped_self_loops: int


def load_edge_list(stream: TextIO) -> tuple[Graph, LoadStats]:
    """Parse a whitespace-separated label-pair edge list.

    Labels are remapped to dense ids in order of first appearance.
    '#' lines and blank lines are skipped. Duplicate edges and self-loops
    are dropped and counted, not treated as errors.
    """
    ids: dict[str, int] = {}
    raw: list[tuple[int, int]] = []
    nlines = 0
    for lineno, line in enumerate(stream, 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 2:
            raise EdgeListParseError(lineno, line.rstrip("\n"))
        nlines += 1
        a, b = (ids.setdefault(p, len(ids)) for p in parts)
        raw.append((a, b))
    if not ids:
        raise EmptyGraphError("edge list contains no edges")
    labels = sorted(ids, key=ids.__getitem__)
    edges, n_dup, n_loops = canonical_edges(raw)
    g = Graph.from_edges(len(labels), edges, labels)
    if n_dup or n_loops:
        log.info("dropped %d duplicate edges and %d self-loops", n_dup, n_loops)
    return g, LoadStats(nlines, n_dup, n_loops)


def write_edge_list(g: Graph, stream: TextIO, header: Iterable[str] = ()) -> None:
    for h in header:
        stream.write(f"# {h}\n")
    labels = g.labels
    for u, v in g.edges():
        stream.write(f"{labels[u]} {labels[v]}\n")


@dataclass(frozen=True)
class DegreeStats:
    k_av: Fraction
    k_max: int
    moments: dict[int, Fraction]


def degree_statistics(g: Graph, orders: Iterable[int] = (1, 2, 3)) -> DegreeStats:
    """Mean degree, max degree and raw moments <k^n>, as exact rationals."""
    n = g.node_count
    if n < 1:
        raise EmptyGraphError("no nodes")
    degs = [int(k) for k in g.degrees()]
    moments = {q: Fraction(sum(k**q for k in degs), n) for q in orders}
    return DegreeStats(Fraction(2 * g.edge_count, n), max(degs), moments)
