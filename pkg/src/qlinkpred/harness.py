"""Synthetic networks, edge-holdout cross-validation and parameter sweeps.

Every random choice flows from a master seed through
:func:`~qlinkpred.sampling.derive_stream`, and every parallel map keeps
input order, so outputs do not depend on the worker count.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np
from scipy.spatial import cKDTree

from . import __version__
from .classical import (
    a2_counting,
    a2_prepare,
    a2_sample_raw_batch,
    a2_sample_useful,
    a3_counting,
    a3_prepare,
    a3_sample_raw_batch,
    a3_sample_useful,
)
from .graph import Graph, QueryLedger
from .metrics import (
    SolutionMask,
    correct_curve,
    good_curve,
    p_cg_classical,
    p_correct_given_good,
)
from .qlp import decompose, evolve, qlp_distribution, qlp_sample_batch
from .sampling import (
    RandomStream,
    chi_squared_pvalue,
    derive_stream,
    expected_null_tv,
    total_variation,
)

MIN_CURVE_T = 0.1


class ParameterError(ValueError):
    pass


class DensityError(ParameterError):
    pass


# ------------------------------------------------------------- generators

def gen_er(n: int, k_av: float, rng: RandomStream) -> Graph:
    """G(N, p) with p = k_av / (N - 1)."""
    if not (n >= 2 and 0 < k_av < n - 1):
        raise ParameterError(f"ER needs 0 < k_av < N-1, got N={n}, k_av={k_av}")
    p = k_av / (n - 1)
    rows = []
    for i in range(n - 1):
        hit = np.flatnonzero(rng.random(n - 1 - i) < p) + i + 1
        rows.append(np.column_stack([np.full(len(hit), i), hit]))
    return Graph.from_edges(n, np.concatenate(rows))


def gen_ba(n: int, k_av: float, rng: RandomStream) -> Graph:
    """Preferential attachment from a clique of m+1 nodes, m = round(k_av/2)."""
    m = int(math.floor(k_av / 2 + 0.5))
    if m < 1 or n <= m:
        raise ParameterError(f"BA needs m = round(k_av/2) >= 1 and N > m, got N={n}, m={m}")
    edges = [(u, v) for u in range(m + 1) for v in range(u + 1, m + 1)]
    ends = [x for e in edges for x in e]
    for v in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(ends[int(rng.random() * len(ends))])
        for u in sorted(targets):
            edges.append((u, v))
            ends.extend((u, v))
    return Graph.from_edges(n, edges if edges else np.empty((0, 2), np.int64))


def gen_rgg(n: int, k_av: float, rng: RandomStream) -> Graph:
    """Random geometric graph on the unit torus.

    Radius sqrt(k_av / (pi (N-1))) makes the expected degree exactly k_av.
    """
    if not (n >= 2 and 0 < k_av < n - 1):
        raise ParameterError(f"RGG needs 0 < k_av < N-1, got N={n}, k_av={k_av}")
    r = math.sqrt(k_av / (math.pi * (n - 1)))
    if r >= 0.5:
        raise DensityError(f"radius {r:.3f} >= 1/2; k_av={k_av} is too dense for N={n}")
    pts = rng.random((n, 2))
    pairs = cKDTree(pts, boxsize=1.0).query_pairs(r, output_type="ndarray")
    return Graph.from_edges(n, pairs)


GENERATORS: dict[str, Callable[[int, float, RandomStream], Graph]] = {
    "er": gen_er,
    "ba": gen_ba,
    "rgg": gen_rgg,
}


def generate(model: str, n: int, k_av: float, seed: int) -> Graph:
    try:
        gen = GENERATORS[model]
    except KeyError:
        raise ParameterError(f"unknown model {model!r}; choose from {sorted(GENERATORS)}") from None
    return gen(n, k_av, derive_stream(seed, _cell_index(model, n, k_av)))


def _cell_index(*key) -> int:
    return zlib.crc32(repr(key).encode())


# ------------------------------------------------------------ holdout

@dataclass(frozen=True, eq=False)
class HoldoutSplit:
    fold: int
    train: Graph
    solution: SolutionMask


def kfold_split(g: Graph, folds: int, rng: RandomStream) -> list[HoldoutSplit]:
    """Partition the edges into ``folds`` random blocks; block f is held out in fold f."""
    if folds < 2:
        raise ParameterError("need at least 2 folds so every fold keeps a train graph")
    if g.edge_count < folds:
        raise ParameterError(f"{g.edge_count} edges cannot fill {folds} folds")
    e = g.edges()
    perm = rng.generator.permutation(len(e))
    out = []
    for f, block in enumerate(np.array_split(perm, folds)):
        held = e[np.sort(block)]
        out.append(HoldoutSplit(f, g.with_edges_removed(held), SolutionMask.from_edges(g.node_count, held)))
    return out


# ------------------------------------------------------------ configs

def log_grid(lo: float, hi: float, points: int) -> list[float]:
    return [float(x) for x in np.geomspace(lo, hi, points)]


@dataclass
class ExperimentConfig:
    network: str
    graph_path: str | None = None
    model: str | None = None
    n: int | None = None
    k_av: float | None = None
    t_grid: list[float] = field(default_factory=lambda: log_grid(MIN_CURVE_T, 10.0, 60))
    folds: int = 10
    seed: int = 0

    def validate(self) -> None:
        if (self.graph_path is None) == (self.model is None):
            raise ParameterError("give exactly one of graph_path or model")
        if self.model is not None and (not self.n or not self.k_av or self.n <= 0 or self.k_av <= 0):
            raise ParameterError("generated networks need positive n and k_av")
        if not self.t_grid or min(self.t_grid) < MIN_CURVE_T:
            raise ParameterError(f"curve grids start at t >= {MIN_CURVE_T}; small t makes p_G unstable")
        if self.folds < 2:
            raise ParameterError("need at least 2 folds")

    def resolved(self) -> dict:
        return asdict(self)


def load_network(config: ExperimentConfig) -> Graph:
    if config.graph_path is not None:
        from .graph import load_edge_list

        with open(config.graph_path, encoding="utf-8") as fh:
            return load_edge_list(fh)[0]
    return generate(config.model, config.n, config.k_av, config.seed)


@dataclass(frozen=True)
class CurvePoint:
    network: str
    fold: int
    t: float
    pG_even: float
    pG_odd: float
    pCG_even: float | None
    pCG_odd: float | None
    pCG_A2: float | None
    pCG_A3: float | None


CURVE_FIELDS = ["network", "fold", "t", "pG_even", "pG_odd", "pCG_even", "pCG_odd", "pCG_A2", "pCG_A3"]


def _pmap(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def fold_curve(network: str, split: HoldoutSplit, t_grid: Sequence[float]) -> list[CurvePoint]:
    dec = decompose(split.train)
    ge, go = good_curve(split.train, dec, t_grid)
    ce, co = correct_curve(dec, split.solution, t_grid)
    a2 = p_cg_classical(split.train, 2, split.solution)
    a3 = p_cg_classical(split.train, 3, split.solution)
    return [
        CurvePoint(network, split.fold, float(t), float(ge[k]), float(go[k]),
                   p_correct_given_good(ce[k], ge[k]), p_correct_given_good(co[k], go[k]), a2, a3)
        for k, t in enumerate(t_grid)
    ]


def sweep_t(config: ExperimentConfig, graph: Graph | None = None, threads: int = 1) -> list[CurvePoint]:
    """Per-fold, per-t precision curves for one network."""
    config.validate()
    g = load_network(config) if graph is None else graph
    splits = kfold_split(g, config.folds, derive_stream(config.seed, 0))
    rows = _pmap(lambda s: fold_curve(config.network, s, config.t_grid), splits, threads)
    points = [p for r in rows for p in r]
    points.sort(key=lambda p: (p.fold, p.t))
    return points


@dataclass(frozen=True)
class CurveSummary:
    t: float
    mean: dict
    sd: dict


def aggregate_curves(points: Iterable[CurvePoint]) -> list[CurveSummary]:
    """Mean and sample sd over folds per t; undefined cells are skipped."""
    by_t: dict[float, list[CurvePoint]] = {}
    for p in points:
        by_t.setdefault(p.t, []).append(p)
    out = []
    for t in sorted(by_t):
        mean, sd = {}, {}
        for f in CURVE_FIELDS[3:]:
            vals = [getattr(p, f) for p in by_t[t] if getattr(p, f) is not None]
            mean[f] = float(np.mean(vals)) if vals else None
            sd[f] = float(np.std(vals, ddof=1)) if len(vals) > 1 else (0.0 if vals else None)
        out.append(CurveSummary(t, mean, sd))
    return out


# ------------------------------------------------------------ scaling sweeps

@dataclass(frozen=True)
class ScalingRow:
    model: str
    N: int
    k_av: float
    seed: int
    t: float
    pG: float


SCALING_FIELDS = ["model", "N", "k_av", "seed", "t", "pG"]


def _scaling_cell(model: str, n: int, k_av: float, seed: int, ts) -> list[ScalingRow]:
    g = generate(model, n, k_av, seed)
    even, odd = good_curve(g, decompose(g), ts)
    return [ScalingRow(model, n, k_av, seed, float(t), float(even[k] + odd[k])) for k, t in enumerate(ts)]


def _scaling(model, ns, k_avs, ts, seeds, threads) -> list[ScalingRow]:
    cells = [(model, n, k, s) for n in ns for k in k_avs for s in seeds]
    rows = _pmap(lambda c: _scaling_cell(*c, list(ts)), cells, threads)
    out = [r for rs in rows for r in rs]
    out.sort(key=lambda r: (r.model, r.N, r.k_av, r.seed, r.t))
    return out


def sweep_size(model: str, ns: Sequence[int], k_av: float, ts: Sequence[float],
               seeds: Sequence[int], threads: int = 1) -> list[ScalingRow]:
    return _scaling(model, ns, [k_av], ts, seeds, threads)


def sweep_density(model: str, n: int, k_avs: Sequence[float], ts: Sequence[float],
                  seeds: Sequence[int], threads: int = 1) -> list[ScalingRow]:
    return _scaling(model, [n], k_avs, ts, seeds, threads)


def seed_means(rows: Iterable[ScalingRow], t: float, key: str) -> dict:
    """Mean p_G at walk time ``t`` grouped by ``key`` ('N' or 'k_av')."""
    groups: dict = {}
    for r in rows:
        if math.isclose(r.t, t):
            groups.setdefault(getattr(r, key), []).append(r.pG)
    return {k: float(np.mean(v)) for k, v in sorted(groups.items())}


def relative_spread(rows: Iterable[ScalingRow], t: float) -> float:
    """(max - min) / mean of the seed-mean p_G(t) across N."""
    means = list(seed_means(rows, t, "N").values())
    if len(means) < 2:
        return 0.0
    return (max(means) - min(means)) / float(np.mean(means))


def density_trend_ok(values: Sequence[float], flat_tol: float = 0.15) -> bool:
    """Non-decreasing up to the maximum, then within ``flat_tol`` of it."""
    if len(values) < 2:
        return True
    peak = int(np.argmax(values))
    rising = all(values[k] <= values[k + 1] for k in range(peak))
    flat = all(v >= (1 - flat_tol) * values[peak] for v in values[peak:])
    return rising and flat


# ------------------------------------------------------------ checks

@dataclass(frozen=True)
class TvReport:
    method: str
    draws: int
    support: int
    tv: float
    null_tv: float
    chi2_pvalue: float


def exact_raw_distribution(method: str, g: Graph, t: float | None = None) -> np.ndarray:
    if method == "a2":
        return a2_counting(g).probabilities().ravel()
    if method == "a3":
        return a3_counting(g).probabilities().ravel()
    if method == "qlp":
        pe, po = qlp_distribution(evolve(decompose(g), t))
        return np.concatenate([pe.ravel(), po.ravel()])
    raise ParameterError(f"unknown sampler {method!r}")


def raw_sample_codes(method: str, g: Graph, draws: int, rng: RandomStream,
                     t: float | None = None, ledger: QueryLedger | None = None) -> np.ndarray:
    """Flat outcome codes i*N + j (plus N^2 for QLP odd) of ``draws`` raw samples."""
    ledger = QueryLedger() if ledger is None else ledger
    n = g.node_count
    if method == "a2":
        i, j = a2_sample_raw_batch(g, ledger, a2_prepare(g, ledger), rng, draws)
        return i * n + j
    if method == "a3":
        i, j = a3_sample_raw_batch(g, ledger, a3_prepare(g, ledger), rng, draws)
        return i * n + j
    if method == "qlp":
        p, i, j = qlp_sample_batch(evolve(decompose(g), t), rng, draws)
        return p * n * n + i * n + j
    raise ParameterError(f"unknown sampler {method!r}")


def distribution_check(method: str, g: Graph, draws: int, rng: RandomStream,
                       t: float | None = None, cap: int = 64) -> TvReport:
    """TV distance between ``draws`` raw samples and the exact distribution.

    ``null_tv`` is the mean TV an exact multinomial sample of the same size
    reaches; TV values near it are all a correct sampler can deliver.
    """
    if g.node_count > cap:
        raise ParameterError(f"N={g.node_count} exceeds the exact-oracle cap {cap}")
    exact = exact_raw_distribution(method, g, t)
    codes = raw_sample_codes(method, g, draws, rng, t)
    counts = np.bincount(codes, minlength=len(exact))
    return TvReport(
        method, draws, int((exact > 0).sum()),
        total_variation(counts / draws, exact),
        expected_null_tv(exact, draws, derive_stream(rng.master_seed, 2**31 - 1)),
        chi_squared_pvalue(counts, exact),
    )


def sampled_precision(method: str, split: HoldoutSplit, n_s: int, rng: RandomStream) -> float:
    """Fraction of ``n_s`` useful classical samples that hit the held-out edges."""
    ledger = QueryLedger()
    g = split.train
    if method == "a2":
        recs = a2_sample_useful(g, ledger, a2_prepare(g, ledger), rng, n_s)
    elif method == "a3":
        recs = a3_sample_useful(g, ledger, a3_prepare(g, ledger), rng, n_s)
    else:
        raise ParameterError(f"unknown classical sampler {method!r}")
    i = np.fromiter((r.i for r in recs), np.int64, len(recs))
    j = np.fromiter((r.j for r in recs), np.int64, len(recs))
    return float(split.solution.contains(i, j).mean())


def baseline_spot_check(split: HoldoutSplit, n_s: int, seed: int) -> dict:
    """Exact vs sampled classical precision on one fold."""
    out = {}
    for k, method in enumerate(("a2", "a3")):
        exact = p_cg_classical(split.train, int(method[1]), split.solution)
        est = sampled_precision(method, split, n_s, derive_stream(seed, 1000 + k))
        out[method] = (exact, est)
    return out


# ------------------------------------------------------------ csv output

def provenance(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(blob.encode()).hexdigest()[:16]
    return f"qlinkpred {__version__} config_hash={digest} config={blob}"


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(float(x))
    return str(x)


def write_rows(stream: TextIO, fields: Sequence[str], rows: Iterable, config: dict) -> None:
    stream.write(f"# {provenance(config)}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_cell(getattr(r, f)) for f in fields])


@dataclass(frozen=True)
class QueryRow:
    method: str
    n_s: int
    degree_queries: int
    neighbour_queries: int
    pair_queries: int
    raw_attempts: int


QUERY_FIELDS = ["method", "n_s", "degree_queries", "neighbour_queries", "pair_queries", "raw_attempts"]

