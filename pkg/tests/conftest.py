import numpy as np
import pytest

from ftvgs.signal import build_incidence

# (criterion number, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE_RESULTS: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def path2():
    return build_incidence(2, [(0, 1)])


@pytest.fixture
def path3():
    return build_incidence(3, [(0, 1), (1, 2)])


def random_graph(rng, n, extra=0.3):
    """Random tree plus extra edges, so it is always connected."""
    edges = {(int(rng.integers(0, v)), v) for v in range(1, n)}
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < extra:
                edges.add((u, v))
    edges = sorted(edges)
    # random orientation
    edges = [(v, u) if rng.random() < 0.5 else (u, v) for u, v in edges]
    return build_incidence(n, edges)
