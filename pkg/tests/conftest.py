"""
Shared fixtures: grid builders, the default benchmark, a small manifest and
the mock provider server.
"""
import os
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from maze.dataset import GroupSpec, assemble_benchmark  # noqa: E402
from maze.grid import CellKind, MazeGrid, Position, parse_text_grid  # noqa: E402


def grid_from(text: str) -> MazeGrid:
    """Parse an indented multi-line literal."""
    lines = [line.strip() for line in text.strip().splitlines()]
    return parse_text_grid("\n".join(lines))


def random_grid(rng: np.random.Generator, rows: int, cols: int, wall_p: float, trap_p: float = 0.0) -> MazeGrid:
    """Random Open/Wall/Trap matrix with distinct Open start and goal."""
    draws = rng.random((rows, cols))
    cells = [[CellKind.OPEN] * cols for _ in range(rows)]
    for r in range(rows):
        for c in range(cols):
            if draws[r, c] < wall_p:
                cells[r][c] = CellKind.WALL
            elif draws[r, c] < wall_p + trap_p:
                cells[r][c] = CellKind.TRAP
    flat = rng.choice(rows * cols, size=2, replace=False)
    start, goal = Position(*divmod(int(flat[0]), cols)), Position(*divmod(int(flat[1]), cols))
    cells[start.row][start.col] = CellKind.OPEN
    cells[goal.row][goal.col] = CellKind.OPEN
    return MazeGrid(cells=tuple(tuple(row) for row in cells), start=start, goal=goal)


SMALL_GROUPS = (
    GroupSpec("A", 2, sizes=(5, 7), densities=(0.0,), straight_corridor=True),
    GroupSpec("B", 4, sizes=(5, 7), densities=(0.25,), unreachable=2),
    GroupSpec("D", 2, sizes=(7,), densities=(0.25,), trap_counts=(3,), paired_on="traps"),
)


@pytest.fixture(scope="session")
def default_manifest():
    return assemble_benchmark()


@pytest.fixture(scope="session")
def small_manifest():
    return assemble_benchmark(SMALL_GROUPS, master_seed=7)


@pytest.fixture(scope="session")
def mock_server():
    from mock_provider_server import MockProviderServer

    server = MockProviderServer(port=0)
    server.start_in_thread()
    yield server
    server.stop()


@pytest.fixture
def mock_provider(mock_server, monkeypatch):
    """Fresh scripts per test and a dummy key for every remote adapter."""
    mock_server.registry.reset()
    monkeypatch.setenv("MOCK_API_KEY", "test-key")
    yield mock_server
    mock_server.registry.reset()


def pytest_collection_modifyitems(config, items):
    if os.getenv("MAZEBENCH_SKIP_SLOW"):
        skip = pytest.mark.skip(reason="MAZEBENCH_SKIP_SLOW is set")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip)
