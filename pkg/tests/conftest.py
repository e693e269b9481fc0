import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from netpolar.graph import Graph

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    max_examples=40,
)
settings.load_profile("default")

VERDICT_LINES: list[str] = []


def record_verdict(line: str) -> None:
    """Queue a one-line verdict for the end-of-run summary."""
    VERDICT_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if VERDICT_LINES:
        terminalreporter.section("acceptance verdicts")
        for line in VERDICT_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def bridge_graph() -> Graph:
    """Two triangles joined by a single edge: 6 nodes, 7 edges."""
    edges = np.array(
        [[0, 1], [0, 2], [1, 2], [2, 3], [3, 4], [3, 5], [4, 5]],
        dtype=np.int64,
    )
    return Graph.from_edges(6, edges)


@pytest.fixture
def bridge_labels() -> np.ndarray:
    return np.array([0, 0, 0, 1, 1, 1], dtype=np.int8)


@pytest.fixture
def k4_pair() -> Graph:
    """Two 4-cliques joined by two bridges (nodes 0-3 and 4-7)."""
    blocks = [[u, v] for b in (0, 4) for u in range(b, b + 4) for v in range(u + 1, b + 4)]
    edges = np.array(blocks + [[0, 4], [3, 7]], dtype=np.int64)
    return Graph.from_edges(8, edges)


@pytest.fixture
def k4_graph() -> Graph:
    """Complete graph on 4 nodes."""
    edges = np.array(
        [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]], dtype=np.int64
    )
    return Graph.from_edges(4, edges)


@pytest.fixture
def path4() -> Graph:
    edges = np.array([[0, 1], [1, 2], [2, 3]], dtype=np.int64)
    return Graph.from_edges(4, edges)
