"""Prefix-sum tables with bisection sampling, and reproducible random streams."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class EmptySupportError(ValueError):
    pass


class InvalidWeightError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CumulativeWeightTable:
    cumulative: np.ndarray

    @property
    def total(self) -> float:
        return float(self.cumulative[-1])

    def __len__(self) -> int:
        return len(self.cumulative)

    def weights(self) -> np.ndarray:
        return np.diff(self.cumulative, prepend=0.0)


def build_cumulative(weights) -> CumulativeWeightTable:
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.size == 0:
        raise EmptySupportError("no weights")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise InvalidWeightError("weights must be finite and non-negative")
    c = np.cumsum(w)
    if c[-1] <= 0:
        raise EmptySupportError("all weights are zero")
    c.flags.writeable = False
    return CumulativeWeightTable(c)


class RandomStream:
    """A Philox generator keyed by ``(master_seed, stream_index)``.

    The key is mixed with ``numpy.random.SeedSequence(master_seed,
    spawn_key=(stream_index,))``, so a stream depends only on the pair and
    never on how many workers run or in which order.
    """

    def __init__(self, master_seed: int, stream_index: int = 0):
        self.master_seed = int(master_seed)
        self.stream_index = int(stream_index)
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        self.generator = np.random.Generator(np.random.Philox(ss))

    def random(self, size=None):
        return self.generator.random(size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size=size)

    def __repr__(self) -> str:
        return f"RandomStream(master_seed={self.master_seed}, stream_index={self.stream_index})"


def derive_stream(master_seed: int, task_index: int) -> RandomStream:
    return RandomStream(master_seed, task_index)


def _clamp(table: CumulativeWeightTable, idx):
    # x*total can round up to total; fall back to the last positive-weight index
    c = table.cumulative
    last = int(np.searchsorted(c, c[-1], side="left"))
    return np.minimum(idx, last)


def sample_index(table: CumulativeWeightTable, rng: RandomStream) -> int:
    """Smallest i with x < cumulative[i], for x uniform on [0, total)."""
    x = rng.random() * table.total
    i = int(np.searchsorted(table.cumulative, x, side="right"))
    return int(_clamp(table, i))


def sample_indices(table: CumulativeWeightTable, rng: RandomStream, size: int) -> np.ndarray:
    x = rng.random(size) * table.total
    return _clamp(table, np.searchsorted(table.cumulative, x, side="right"))


def total_variation(p, q) -> float:
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    return 0.5 * float(np.abs(p - q).sum())


def chi_squared_pvalue(counts, probs) -> float:
    """Pearson goodness-of-fit p-value; zero-probability cells must be empty."""
    from scipy.stats import chisquare

    counts = np.asarray(counts, dtype=np.float64).ravel()
    probs = np.asarray(probs, dtype=np.float64).ravel()
    support = probs > 0
    if counts[~support].sum() > 0:
        return 0.0
    n = counts.sum()
    if support.sum() < 2:
        return 1.0
    exp = probs[support] / probs[support].sum() * n
    return float(chisquare(counts[support], exp).pvalue)


def expected_null_tv(probs, n: int, rng: RandomStream, reps: int = 8) -> float:
    """Mean TV between an exact multinomial(n, probs) draw and probs itself.

    The floor any correct sampler sits at; useful to judge a TV threshold.
    """
    p = np.asarray(probs, dtype=np.float64).ravel()
    p = p / p.sum()
    vals = [total_variation(rng.generator.multinomial(n, p) / n, p) for _ in range(reps)]
    return float(math.fsum(vals) / reps)
