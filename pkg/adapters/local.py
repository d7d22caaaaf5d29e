"""
Local reference solvers. They implement the adapter interface so whole runs
can be exercised offline.

- oracle: answers from the manifest annotation (first accepted path)
- naive: always claims reachable and emits the unchecked L-shaped path
- random-walk: wanders from the start, seeded by the maze id
"""
import json
import random
import zlib
from typing import Any, Dict, Optional

from .base import AdapterReply, BaseAdapter, ProviderRequest
from maze.errors import ConfigError
from maze.grid import Move, path_to_strings
from maze.records import TokenUsage

LOCAL_SOLVERS = ("oracle", "naive", "random-walk")


def _answer(grid, reachable: bool, path) -> str:
    return json.dumps({
        "grid_size": [grid.rows, grid.cols],
        "start_found": True,
        "goal_found": True,
        "reachable": reachable,
        "path_length": len(path) if reachable else None,
        "path": path_to_strings(path),
    })


def oracle_answer(entry) -> str:
    annotation = entry.annotation
    path = annotation.accepted_paths[0] if annotation.reachable else ()
    return _answer(entry.grid, annotation.reachable, path)


def naive_answer(entry) -> str:
    grid = entry.grid
    dr, dc = grid.goal.row - grid.start.row, grid.goal.col - grid.start.col
    path = (Move.D if dr > 0 else Move.U,) * abs(dr) + (Move.R if dc > 0 else Move.L,) * abs(dc)
    return _answer(grid, True, path)


def random_walk_answer(entry) -> str:
    grid = entry.grid
    rng = random.Random(zlib.crc32(entry.maze_id.encode("utf-8")))
    pos, path = grid.start, []
    for _ in range(4 * grid.rows * grid.cols):
        if pos == grid.goal:
            break
        options = list(grid.open_neighbors(pos))
        if not options:
            break
        move, pos = rng.choice(options)
        path.append(move)
    return _answer(grid, True, tuple(path))


_SOLVERS = {"oracle": oracle_answer, "naive": naive_answer, "random-walk": random_walk_answer}


class LocalAdapter(BaseAdapter):
    """Reference solver selected by model_id."""

    supported_reasoning = frozenset({"none", "default"})

    def __init__(self, config, transport=None):
        super().__init__(config, transport)
        if config.model_id not in _SOLVERS:
            raise ConfigError(f"Unknown local solver {config.model_id!r}. Supported: {', '.join(LOCAL_SOLVERS)}")
        self.solver = _SOLVERS[config.model_id]

    def endpoint(self) -> str:
        return f"local://{self.config.model_id}"

    def build_payload(self, prompt: str, image_b64: Optional[str]) -> Dict[str, Any]:
        return {"model": self.config.model_id, "prompt": prompt, "image_b64": image_b64}

    def parse_reply(self, body: Dict[str, Any]) -> AdapterReply:
        return AdapterReply(text=body["text"], usage=TokenUsage())

    def complete(self, request: ProviderRequest) -> AdapterReply:
        if request.entry is None:
            raise ConfigError("local solvers need the manifest entry on the request")
        return self.parse_reply({"text": self.solver(request.entry)})
