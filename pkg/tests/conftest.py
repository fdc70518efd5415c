import numpy as np
import pytest

from qlinkpred.graph import Graph
from qlinkpred.harness import gen_er
from qlinkpred.sampling import derive_stream


def path3():
    return Graph.from_edges(3, [(0, 1), (1, 2)])


def k2():
    return Graph.from_edges(2, [(0, 1)])


def complete(n):
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def cycle(n):
    return Graph.from_edges(n, [(v, (v + 1) % n) for v in range(n)])


def star(leaves):
    return Graph.from_edges(leaves + 1, [(0, v) for v in range(1, leaves + 1)])


def c5_tail():
    """C5 with a pendant node hanging off node 0."""
    return Graph.from_edges(6, [(v, (v + 1) % 5) for v in range(5)] + [(0, 5)])


def er(n, k_av, seed):
    return gen_er(n, k_av, derive_stream(seed, 12345))


def random_graphs(count, n_lo, n_hi, seed=0, density=(0.1, 0.5)):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_lo, n_hi + 1))
        p = rng.uniform(*density)
        iu = np.triu_indices(n, 1)
        keep = rng.random(len(iu[0])) < p
        out.append(Graph.from_edges(n, np.column_stack([iu[0][keep], iu[1][keep]])))
    return out


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance_report():
    def report(criterion, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
