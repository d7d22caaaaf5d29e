"""
Ground-truth oracle: reachability, exact shortest length, and the first 50
optimal move sequences in U, D, L, R order.
"""
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import TooLarge
from .grid import MOVE_ORDER, MazeGrid, Move, MovePath, Position, path_from_strings, path_to_strings

MAX_ACCEPTED_PATHS = 50
DEFAULT_ORACLE_MAX_CELLS = 49


@dataclass(frozen=True)
class Annotation:
    reachable: bool
    shortest_len: Optional[int] = None
    accepted_paths: Tuple[MovePath, ...] = field(default_factory=tuple)
    optimal_count_truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "reachable": self.reachable,
            "shortest_len": self.shortest_len,
            "accepted_paths": [path_to_strings(p) for p in self.accepted_paths],
            "optimal_count_truncated": self.optimal_count_truncated,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Annotation":
        return cls(
            reachable=bool(data["reachable"]),
            shortest_len=data.get("shortest_len"),
            accepted_paths=tuple(path_from_strings(p) for p in data.get("accepted_paths", [])),
            optimal_count_truncated=bool(data.get("optimal_count_truncated", False)),
        )


UNREACHABLE = Annotation(reachable=False)


def bfs_layers(grid: MazeGrid) -> Tuple[Dict[Position, int], Dict[Position, List[Position]]]:
    """
    Breadth-first search from start over Open cells.

    Returns:
        (distance labels, parents) where parents[p] lists every neighbour at
        distance d(p) - 1, in discovery order
    """
    dist = {grid.start: 0}
    parents: Dict[Position, List[Position]] = {grid.start: []}
    queue = deque([grid.start])
    while queue:
        cur = queue.popleft()
        for _, nxt in grid.open_neighbors(cur):
            if nxt not in dist:
                dist[nxt] = dist[cur] + 1
                parents[nxt] = [cur]
                queue.append(nxt)
            elif dist[nxt] == dist[cur] + 1:
                parents[nxt].append(cur)
    return dist, parents


def is_reachable(grid: MazeGrid) -> bool:
    """BFS reachability of goal from start (early exit)."""
    seen = {grid.start}
    queue = deque([grid.start])
    while queue:
        cur = queue.popleft()
        if cur == grid.goal:
            return True
        for _, nxt in grid.open_neighbors(cur):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False


def _on_optimal_dag(grid: MazeGrid, parents: Dict[Position, List[Position]]) -> set:
    useful = {grid.goal}
    stack = [grid.goal]
    while stack:
        cur = stack.pop()
        for p in parents[cur]:
            if p not in useful:
                useful.add(p)
                stack.append(p)
    return useful


def analyze(grid: MazeGrid) -> Annotation:
    """
    Annotate a grid with its ground truth.

    The cap truncates enumeration only; shortest_len is always the exact BFS
    distance of the goal.
    """
    dist, parents = bfs_layers(grid)
    if grid.goal not in dist:
        return UNREACHABLE

    useful = _on_optimal_dag(grid, parents)
    found: List[MovePath] = []
    trail: List[Move] = []

    def walk(cur: Position) -> bool:
        if cur == grid.goal:
            found.append(tuple(trail))
            return len(found) > MAX_ACCEPTED_PATHS
        for move, nxt in grid.open_neighbors(cur):
            if nxt in useful and dist[nxt] == dist[cur] + 1:
                trail.append(move)
                done = walk(nxt)
                trail.pop()
                if done:
                    return True
        return False

    walk(grid.start)
    return Annotation(
        reachable=True,
        shortest_len=dist[grid.goal],
        accepted_paths=tuple(found[:MAX_ACCEPTED_PATHS]),
        optimal_count_truncated=len(found) > MAX_ACCEPTED_PATHS,
    )


def count_optimal_paths(grid: MazeGrid) -> int:
    """Exact number of shortest start-to-goal paths (0 when unreachable)."""
    dist, parents = bfs_layers(grid)
    if grid.goal not in dist:
        return 0
    counts: Dict[Position, int] = {}
    for pos in sorted(dist, key=dist.get):
        counts[pos] = 1 if pos == grid.start else sum(counts[p] for p in parents[pos])
    return counts[grid.goal]


def brute_force_oracle(grid: MazeGrid, max_cells: int = DEFAULT_ORACLE_MAX_CELLS) -> Annotation:
    """
    Exhaustive reference for analyze() on small grids.

    Reachability comes from a depth-first flood fill; the shortest length and
    paths come from iterative deepening over simple walks, pruned only by the
    admissible Manhattan and parity bounds.

    Raises:
        TooLarge: If rows * cols exceeds max_cells
    """
    if grid.rows * grid.cols > max_cells:
        raise TooLarge(f"{grid.rows}x{grid.cols} grid exceeds {max_cells} cells")

    seen = {grid.start}
    stack = [grid.start]
    while stack:
        cur = stack.pop()
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nxt = Position(cur[0] + dr, cur[1] + dc)
            if grid.is_open(nxt) and nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    if grid.goal not in seen:
        return UNREACHABLE

    goal = grid.goal

    def manhattan(p: Position) -> int:
        return abs(p[0] - goal[0]) + abs(p[1] - goal[1])

    base = manhattan(grid.start)
    for limit in range(base, len(seen), 2):
        found: List[MovePath] = []
        trail: List[Move] = []
        visited = {grid.start}

        def dfs(cur: Position, depth: int) -> bool:
            remaining = limit - depth
            if remaining == 0:
                if cur == goal:
                    found.append(tuple(trail))
                return len(found) > MAX_ACCEPTED_PATHS
            if manhattan(cur) > remaining:
                return False
            for move in MOVE_ORDER:
                dr, dc = move.delta
                nxt = Position(cur[0] + dr, cur[1] + dc)
                if not grid.is_open(nxt) or nxt in visited:
                    continue
                visited.add(nxt)
                trail.append(move)
                stop = dfs(nxt, depth + 1)
                trail.pop()
                visited.discard(nxt)
                if stop:
                    return True
            return False

        dfs(grid.start, 0)
        if found:
            return Annotation(
                reachable=True,
                shortest_len=limit,
                accepted_paths=tuple(found[:MAX_ACCEPTED_PATHS]),
                optimal_count_truncated=len(found) > MAX_ACCEPTED_PATHS,
            )
    # Flood fill said reachable, so a simple path of length < |component| exists.
    raise AssertionError("brute-force search missed a reachable goal")
