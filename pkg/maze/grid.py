"""
Canonical maze grid, movement rules, path simulation and the S/G/./#/T text encoding.

Coordinates are row-major with the origin at the top-left corner; U decreases
the row. Start and goal are stored as positions overlaying Open cells, so the
cell matrix itself only ever holds Open, Wall or Trap.
"""
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

from .errors import MalformedGrid, OutOfBounds


class CellKind(Enum):
    OPEN = "."
    WALL = "#"
    TRAP = "T"

    @property
    def passable(self) -> bool:
        return self is CellKind.OPEN


class Position(NamedTuple):
    row: int
    col: int


class Move(Enum):
    U = "U"
    D = "D"
    L = "L"
    R = "R"

    @property
    def delta(self) -> Tuple[int, int]:
        return _DELTAS[self]

    @property
    def opposite(self) -> "Move":
        return _OPPOSITES[self]


_DELTAS = {Move.U: (-1, 0), Move.D: (1, 0), Move.L: (0, -1), Move.R: (0, 1)}
_OPPOSITES = {Move.U: Move.D, Move.D: Move.U, Move.L: Move.R, Move.R: Move.L}

# Fixed expansion order for every search and enumeration in the toolkit.
MOVE_ORDER: Tuple[Move, ...] = (Move.U, Move.D, Move.L, Move.R)

MovePath = Tuple[Move, ...]


def path_to_strings(path: Iterable[Move]) -> List[str]:
    return [move.value for move in path]


def path_from_strings(tokens: Iterable[str]) -> MovePath:
    return tuple(Move(token) for token in tokens)


@dataclass(frozen=True)
class MazeGrid:
    """
    Immutable maze: cell matrix plus start/goal overlay.

    Construction validates the invariants; all derived grids are built with
    `with_cells()` so they go through the same checks.
    """

    cells: Tuple[Tuple[CellKind, ...], ...]
    start: Position
    goal: Position
    border_walls: bool = False

    def __post_init__(self):
        if not self.cells or not self.cells[0]:
            raise MalformedGrid("grid must have at least one row and one column")
        width = len(self.cells[0])
        if any(len(row) != width for row in self.cells):
            raise MalformedGrid("ragged cell matrix")
        object.__setattr__(self, "start", Position(*self.start))
        object.__setattr__(self, "goal", Position(*self.goal))
        for name, pos in (("start", self.start), ("goal", self.goal)):
            if not self.in_bounds(pos):
                raise MalformedGrid(f"{name} {tuple(pos)} outside {self.rows}x{self.cols} grid")
            if self.cell(pos) is not CellKind.OPEN:
                raise MalformedGrid(f"{name} {tuple(pos)} must sit on an Open cell")
        if self.start == self.goal:
            raise MalformedGrid("start and goal coincide")
        if self.border_walls:
            for pos in self.ring_positions():
                if self.cell(pos) is not CellKind.WALL:
                    raise MalformedGrid(f"border ring cell {tuple(pos)} is not a wall")

    @property
    def rows(self) -> int:
        return len(self.cells)

    @property
    def cols(self) -> int:
        return len(self.cells[0])

    def in_bounds(self, pos: Position) -> bool:
        return 0 <= pos[0] < self.rows and 0 <= pos[1] < self.cols

    def cell(self, pos: Position) -> CellKind:
        return self.cells[pos[0]][pos[1]]

    def is_open(self, pos: Position) -> bool:
        return self.in_bounds(pos) and self.cells[pos[0]][pos[1]] is CellKind.OPEN

    def positions(self) -> Iterator[Position]:
        for r in range(self.rows):
            for c in range(self.cols):
                yield Position(r, c)

    def ring_positions(self) -> List[Position]:
        """Outer ring cells in row-major order."""
        return [
            p for p in self.positions()
            if p.row in (0, self.rows - 1) or p.col in (0, self.cols - 1)
        ]

    def count(self, kind: CellKind) -> int:
        return sum(row.count(kind) for row in self.cells)

    def open_neighbors(self, pos: Position) -> Iterator[Tuple[Move, Position]]:
        """Passable neighbours in U, D, L, R order."""
        for move in MOVE_ORDER:
            dr, dc = move.delta
            nxt = Position(pos[0] + dr, pos[1] + dc)
            if self.is_open(nxt):
                yield move, nxt

    def with_cells(self, updates: Dict[Position, CellKind], **changes) -> "MazeGrid":
        """Copy of this grid with some cells replaced (and optional field changes)."""
        rows = [list(row) for row in self.cells]
        for (r, c), kind in updates.items():
            rows[r][c] = kind
        return replace(self, cells=tuple(tuple(row) for row in rows), **changes)

    @classmethod
    def empty(cls, rows: int, cols: int, start: Position, goal: Position) -> "MazeGrid":
        cells = tuple(tuple(CellKind.OPEN for _ in range(cols)) for _ in range(rows))
        return cls(cells=cells, start=start, goal=goal)


class FailureCause(Enum):
    OUT_OF_BOUNDS = "OutOfBounds"
    HIT_WALL = "HitWall"
    HIT_TRAP = "HitTrap"
    ENDED_OFF_GOAL = "EndedOffGoal"


class SimulationFailure(NamedTuple):
    index: int
    cause: FailureCause


@dataclass(frozen=True)
class SimulationResult:
    reaches_goal: bool
    steps_taken: int
    failure: Optional[SimulationFailure] = None


def apply_move(pos: Position, move: Move, grid: MazeGrid) -> Position:
    """
    Step one cell in direction `move`.

    Raises:
        OutOfBounds: If the result leaves the grid
    """
    dr, dc = move.delta
    nxt = Position(pos[0] + dr, pos[1] + dc)
    if not grid.in_bounds(nxt):
        raise OutOfBounds(f"move {move.value} from {tuple(pos)} leaves the {grid.rows}x{grid.cols} grid")
    return nxt


def simulate_path(grid: MazeGrid, path: Sequence[Move]) -> SimulationResult:
    """
    Walk `path` from the start cell.

    Failures carry the index of the offending move; EndedOffGoal reports
    index == len(path) because no single move is at fault.
    """
    pos = grid.start
    for index, move in enumerate(path):
        try:
            pos = apply_move(pos, move, grid)
        except OutOfBounds:
            return SimulationResult(False, index, SimulationFailure(index, FailureCause.OUT_OF_BOUNDS))
        kind = grid.cell(pos)
        if kind is CellKind.WALL:
            return SimulationResult(False, index, SimulationFailure(index, FailureCause.HIT_WALL))
        if kind is CellKind.TRAP:
            return SimulationResult(False, index, SimulationFailure(index, FailureCause.HIT_TRAP))
    if pos != grid.goal:
        return SimulationResult(False, len(path), SimulationFailure(len(path), FailureCause.ENDED_OFF_GOAL))
    return SimulationResult(True, len(path))


def export_text_grid(grid: MazeGrid) -> str:
    """One line per row using S, G, ., #, T; no trailing newline."""
    lines = []
    for r, row in enumerate(grid.cells):
        chars = [kind.value for kind in row]
        if grid.start.row == r:
            chars[grid.start.col] = "S"
        if grid.goal.row == r:
            chars[grid.goal.col] = "G"
        lines.append("".join(chars))
    return "\n".join(lines)


_SYMBOLS = {".": CellKind.OPEN, "#": CellKind.WALL, "T": CellKind.TRAP, "S": CellKind.OPEN, "G": CellKind.OPEN}


def parse_text_grid(text: str) -> MazeGrid:
    """
    Inverse of export_text_grid.

    border_walls is inferred: true when the grid is at least 3x3 and the whole
    outer ring is Wall.

    Raises:
        MalformedGrid: Ragged rows, unknown symbol, missing or duplicate S/G
    """
    lines = text.split("\n")
    if not lines or not lines[0]:
        raise MalformedGrid("empty text grid")
    width = len(lines[0])
    starts, goals = [], []
    cells = []
    for r, line in enumerate(lines):
        if len(line) != width:
            raise MalformedGrid(f"row {r} has {len(line)} symbols, expected {width}")
        row = []
        for c, ch in enumerate(line):
            if ch not in _SYMBOLS:
                raise MalformedGrid(f"unknown symbol {ch!r} at ({r}, {c})")
            if ch == "S":
                starts.append(Position(r, c))
            elif ch == "G":
                goals.append(Position(r, c))
            row.append(_SYMBOLS[ch])
        cells.append(tuple(row))
    if len(starts) != 1:
        raise MalformedGrid(f"expected exactly one S, found {len(starts)}")
    if len(goals) != 1:
        raise MalformedGrid(f"expected exactly one G, found {len(goals)}")

    grid = MazeGrid(cells=tuple(cells), start=starts[0], goal=goals[0])
    if grid.rows >= 3 and grid.cols >= 3 and all(
        grid.cell(p) is CellKind.WALL for p in grid.ring_positions()
    ):
        grid = replace(grid, border_walls=True)
    return grid
