import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ecsim.graph import Bipartition, Graph

settings.register_profile("ecsim", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ecsim")


@st.composite
def graphs(draw, max_n=12, max_m=30):
    n = draw(st.integers(0, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if not pairs:
        return Graph(n)
    idx = draw(st.lists(st.integers(0, len(pairs) - 1), max_size=max_m, unique=True))
    return Graph(n, [pairs[i] for i in idx])


@st.composite
def bipartite_graphs(draw, max_side=8, max_m=30):
    nu = draw(st.integers(1, max_side))
    nv = draw(st.integers(1, max_side))
    pairs = [(u, nu + v) for u in range(nu) for v in range(nv)]
    idx = draw(st.lists(st.integers(0, len(pairs) - 1), max_size=max_m, unique=True))
    g = Graph(nu + nv, [pairs[i] for i in idx])
    return g, Bipartition([0] * nu + [1] * nv)


def complete(n):
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def path(k):
    return Graph(k + 1, [(i, i + 1) for i in range(k)])


def star(k):
    return Graph(k + 1, [(0, i) for i in range(1, k + 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    def record(num, ok, detail):
        line = f"criterion {num}: {'PASS' if ok else 'FAIL'} - {detail}"
        _ACCEPTANCE[num] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for num in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[num])
