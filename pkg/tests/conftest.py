import numpy as np
import pytest

from localcontrol.network import Coupling, SpinNetwork

ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240611))


def random_network(rng, n_min=2, n_max=5, model=None, fields=True):
    """Connected random network: a random spanning tree plus extra edges, random control set."""
    n = int(rng.integers(n_min, n_max + 1))
    edges = {}
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges[(u, v)] = float(rng.uniform(0.5, 1.5))
    for _ in range(int(rng.integers(0, n))):
        i, j = sorted(int(x) for x in rng.choice(n, size=2, replace=False))
        edges.setdefault((i, j), float(rng.uniform(0.5, 1.5)))
    size = int(rng.integers(1, n))
    control = tuple(int(c) for c in rng.choice(n, size=size, replace=False))
    model = model or (Coupling.XX if rng.random() < 0.5 else Coupling.HEISENBERG)
    h = tuple(float(x) for x in rng.uniform(-0.5, 0.5, size=n)) if fields else ()
    return SpinNetwork(n, tuple((i, j, c) for (i, j), c in edges.items()), control, model, h)
