"""
Seeded procedural maze generation.

Walls are placed one candidate at a time in shuffled order; when the spec asks
for a reachable maze, any wall (or trap) that disconnects start from goal is
reverted and skipped. Endpoints, walls, traps and sealing each draw from their
own random stream, so two specs that differ only in trap_count share the same
wall layout.
"""
import logging
import math
from collections import deque
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import CannotSeal, GenerationFailed, InvalidSpec, PlacementImpossible
from .grid import CellKind, MazeGrid, Position
from .palettes import PALETTE_NAMES
from .pathfinder import Annotation, analyze, is_reachable
from .rng import substream

logger = logging.getLogger(__name__)

MIN_SIDE = 5
MAX_SIDE = 20
MAX_WALL_DENSITY = 0.55


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


@dataclass(frozen=True)
class MazeSpec:
    rows: int
    cols: int
    wall_density: float = 0.0
    trap_count: int = 0
    border_walls: bool = False
    reachable_target: bool = True
    palette: str = "forest"
    seed: int = 0
    straight_corridor: bool = False
    reserve_ring: bool = False

    def __post_init__(self):
        for name in ("rows", "cols"):
            value = getattr(self, name)
            if not MIN_SIDE <= value <= MAX_SIDE:
                raise InvalidSpec(f"{name}={value} outside [{MIN_SIDE}, {MAX_SIDE}]")
        if not 0.0 <= self.wall_density <= MAX_WALL_DENSITY:
            raise InvalidSpec(f"wall_density={self.wall_density} outside [0, {MAX_WALL_DENSITY}]")
        if self.trap_count < 0:
            raise InvalidSpec(f"trap_count={self.trap_count} must be >= 0")
        if self.palette not in PALETTE_NAMES:
            raise InvalidSpec(f"unknown palette {self.palette!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidSpec(f"seed {self.seed} is not a 64-bit unsigned integer")

    @property
    def framed(self) -> bool:
        """Outer ring is walled while the maze is being built."""
        return self.border_walls or self.reserve_ring

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MazeSpec":
        return cls(
            rows=int(data["rows"]),
            cols=int(data["cols"]),
            wall_density=float(data["wall_density"]),
            trap_count=int(data["trap_count"]),
            border_walls=bool(data["border_walls"]),
            reachable_target=bool(data["reachable_target"]),
            palette=str(data["palette"]),
            seed=int(data["seed"]),
            straight_corridor=bool(data.get("straight_corridor", False)),
            reserve_ring=bool(data.get("reserve_ring", False)),
        )


@dataclass(frozen=True)
class MazeInstance:
    id: str
    spec: MazeSpec
    grid: MazeGrid
    annotation: Annotation
    achieved_wall_count: int
    sealing_wall_count: int = 0


def min_endpoint_distance(rows: int, cols: int) -> int:
    return (rows + cols) // 3


def _endpoint_pairs(spec: MazeSpec, vertical_edges: bool) -> List[Tuple[Position, Position]]:
    inset = 1 if spec.framed else 0
    bound = min_endpoint_distance(spec.rows, spec.cols)
    pairs = []
    if vertical_edges:
        c0, c1 = inset, spec.cols - 1 - inset
        lanes = range(inset, spec.rows - inset)
        for r0 in lanes:
            for r1 in lanes:
                if spec.straight_corridor and r0 != r1:
                    continue
                a, b = Position(r0, c0), Position(r1, c1)
                if abs(r0 - r1) + (c1 - c0) >= bound:
                    pairs.append((a, b))
    else:
        r0, r1 = inset, spec.rows - 1 - inset
        lanes = range(inset, spec.cols - inset)
        for c0 in lanes:
            for c1 in lanes:
                if spec.straight_corridor and c0 != c1:
                    continue
                a, b = Position(r0, c0), Position(r1, c1)
                if abs(c0 - c1) + (r1 - r0) >= bound:
                    pairs.append((a, b))
    return pairs


def place_endpoints(spec: MazeSpec, rng: np.random.Generator) -> Tuple[Position, Position]:
    """
    Pick start and goal on opposite edges at Manhattan distance >= floor((rows + cols) / 3).

    With a (reserved) border ring, endpoints sit on the first ring inside it.

    Raises:
        PlacementImpossible: If no pair satisfies the distance bound
    """
    vertical_edges = bool(rng.integers(2))
    for axis in (vertical_edges, not vertical_edges):
        pairs = _endpoint_pairs(spec, axis)
        if pairs:
            a, b = pairs[int(rng.integers(len(pairs)))]
            return (a, b) if rng.integers(2) else (b, a)
    raise PlacementImpossible(f"no endpoint pair for {spec.rows}x{spec.cols} grid")


def _reachable(cells: List[List[CellKind]], start: Position, goal: Position) -> bool:
    rows, cols = len(cells), len(cells[0])
    seen = {start}
    queue = deque([start])
    while queue:
        r, c = queue.popleft()
        if (r, c) == goal:
            return True
        for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= nr < rows and 0 <= nc < cols and (nr, nc) not in seen and cells[nr][nc] is CellKind.OPEN:
                seen.add((nr, nc))
                queue.append((nr, nc))
    return False


def _corridor(start: Position, goal: Position) -> set:
    if start.row == goal.row:
        lo, hi = sorted((start.col, goal.col))
        return {Position(start.row, c) for c in range(lo, hi + 1)}
    lo, hi = sorted((start.row, goal.row))
    return {Position(r, start.col) for r in range(lo, hi + 1)}


def candidate_cells(spec: MazeSpec, start: Position, goal: Position) -> List[Position]:
    """Cells eligible for walls and traps, in row-major order."""
    excluded = {start, goal}
    if spec.straight_corridor:
        excluded |= _corridor(start, goal)
    out = []
    for r in range(spec.rows):
        for c in range(spec.cols):
            p = Position(r, c)
            on_ring = r in (0, spec.rows - 1) or c in (0, spec.cols - 1)
            if p in excluded or (spec.framed and on_ring):
                continue
            out.append(p)
    return out


def _place(cells, order, kind: CellKind, target: int, keep_reachable: bool, start, goal) -> int:
    placed = 0
    for p in order:
        if placed >= target:
            break
        cells[p.row][p.col] = kind
        if keep_reachable and not _reachable(cells, start, goal):
            cells[p.row][p.col] = CellKind.OPEN
            continue
        placed += 1
    return placed


def generate(spec: MazeSpec, maze_id: Optional[str] = None) -> MazeInstance:
    """
    Build a maze deterministically from its spec.

    Raises:
        GenerationFailed: If traps cannot all be placed, or the reachability
            target cannot be met
    """
    start, goal = place_endpoints(spec, substream(spec.seed, "endpoints"))

    cells = [[CellKind.OPEN] * spec.cols for _ in range(spec.rows)]
    if spec.framed:
        for r in range(spec.rows):
            for c in range(spec.cols):
                if r in (0, spec.rows - 1) or c in (0, spec.cols - 1):
                    cells[r][c] = CellKind.WALL

    candidates = candidate_cells(spec, start, goal)
    target_walls = round_half_up(spec.wall_density * len(candidates))
    wall_order = [candidates[i] for i in substream(spec.seed, "walls").permutation(len(candidates))]
    walls = _place(cells, wall_order, CellKind.WALL, target_walls, spec.reachable_target, start, goal)

    trap_pool = [p for p in candidates if cells[p.row][p.col] is CellKind.OPEN]
    trap_order = [trap_pool[i] for i in substream(spec.seed, "traps").permutation(len(trap_pool))]
    traps = _place(cells, trap_order, CellKind.TRAP, spec.trap_count, spec.reachable_target, start, goal)
    if traps < spec.trap_count:
        raise GenerationFailed(
            f"placed {traps}/{spec.trap_count} traps before exhausting candidates (seed {spec.seed})"
        )

    if spec.framed and not spec.border_walls:
        for r in range(spec.rows):
            for c in range(spec.cols):
                if r in (0, spec.rows - 1) or c in (0, spec.cols - 1):
                    cells[r][c] = CellKind.OPEN

    grid = MazeGrid(
        cells=tuple(tuple(row) for row in cells),
        start=start,
        goal=goal,
        border_walls=spec.border_walls,
    )

    sealing = 0
    if not spec.reachable_target:
        sealed = derive_unreachable(grid, substream(spec.seed, "seal"))
        sealing = sealed.count(CellKind.WALL) - grid.count(CellKind.WALL)
        grid = sealed

    annotation = analyze(grid)
    if annotation.reachable != spec.reachable_target:
        raise GenerationFailed(f"reachability target {spec.reachable_target} not met (seed {spec.seed})")

    logger.debug(
        f"Generated {spec.rows}x{spec.cols} maze seed={spec.seed}: "
        f"{walls}/{target_walls} walls, {traps} traps, {sealing} sealing walls"
    )
    return MazeInstance(
        id=maze_id or f"seed_{spec.seed:016x}",
        spec=spec,
        grid=grid,
        annotation=annotation,
        achieved_wall_count=walls,
        sealing_wall_count=sealing,
    )


def _distances_from(grid: MazeGrid, origin: Position) -> dict:
    dist = {origin: 0}
    queue = deque([origin])
    while queue:
        cur = queue.popleft()
        for _, nxt in grid.open_neighbors(cur):
            if nxt not in dist:
                dist[nxt] = dist[cur] + 1
                queue.append(nxt)
    return dist


def derive_unreachable(grid: MazeGrid, rng: np.random.Generator) -> MazeGrid:
    """
    Wall off the goal so that no path remains.

    Walls one whole BFS layer around the goal (every Open cell at distance k
    from it), preferring layers with no cell next to start, then smaller
    layers; ties are broken by rng. Only Open -> Wall conversions are made.

    Raises:
        CannotSeal: If start is adjacent to goal or sealing fails
    """
    if not is_reachable(grid):
        return grid

    dist = _distances_from(grid, grid.goal)
    start_dist = dist[grid.start]
    if start_dist <= 1:
        raise CannotSeal(f"start {tuple(grid.start)} is adjacent to goal {tuple(grid.goal)}")

    start_neighbors = {
        Position(grid.start.row + dr, grid.start.col + dc)
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1))
    }
    scored = []
    for k in range(1, start_dist):
        layer = sorted(p for p, d in dist.items() if d == k)
        touches_start = any(p in start_neighbors for p in layer)
        scored.append(((touches_start, len(layer)), layer))
    best = min(score for score, _ in scored)
    ties = [layer for score, layer in scored if score == best]
    layer = ties[int(rng.integers(len(ties)))]

    sealed = grid.with_cells({p: CellKind.WALL for p in layer})
    if is_reachable(sealed):
        raise CannotSeal("sealing layer left the goal reachable")
    return sealed
