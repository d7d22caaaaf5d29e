"""
Solver response parsing and exact-match grading.

A maze counts as solved only when reachability, shortest length and the path
itself are all correct; for an unreachable maze, only a "reachable": false
claim with no path counts. There is no partial credit.
"""
import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from .errors import ParseFailure
from .grid import MazeGrid, Move, MovePath, path_to_strings, simulate_path
from .pathfinder import Annotation

_WORD_MOVES = {"UP": "U", "DOWN": "D", "LEFT": "L", "RIGHT": "R"}
_REACHABLE_RE = re.compile(r'"reachable"\s*:\s*(true|false)', re.IGNORECASE)


class GradeMode(str, Enum):
    ANNOTATION_MATCH = "annotation-match"
    SIMULATE = "simulate"


@dataclass(frozen=True)
class SolverResponse:
    raw_text: str
    reachable: bool
    start_found: bool = False
    goal_found: bool = False
    grid_size: Optional[Tuple[int, int]] = None
    path_length: Optional[int] = None
    path: Optional[MovePath] = None

    @property
    def length_mismatch(self) -> bool:
        """path_length given but disagreeing with the path (recorded, never repaired)."""
        return self.path is not None and self.path_length is not None and self.path_length != len(self.path)

    @property
    def length_omitted(self) -> bool:
        return self.path is not None and self.path_length is None

    def to_dict(self) -> dict:
        return {
            "grid_size": list(self.grid_size) if self.grid_size else None,
            "start_found": self.start_found,
            "goal_found": self.goal_found,
            "reachable": self.reachable,
            "path_length": self.path_length,
            "path": path_to_strings(self.path) if self.path is not None else None,
            "raw_text": self.raw_text,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SolverResponse":
        path = data.get("path")
        return cls(
            raw_text=data.get("raw_text", ""),
            reachable=bool(data["reachable"]),
            start_found=bool(data.get("start_found", False)),
            goal_found=bool(data.get("goal_found", False)),
            grid_size=tuple(data["grid_size"]) if data.get("grid_size") else None,
            path_length=data.get("path_length"),
            path=tuple(Move(m) for m in path) if path is not None else None,
        )


@dataclass(frozen=True)
class Verdict:
    solved: bool
    reach_correct: bool
    mode: GradeMode = GradeMode.ANNOTATION_MATCH
    length_correct: Optional[bool] = None
    path_valid: Optional[bool] = None
    truncated_output: bool = False
    length_omitted: bool = False

    def to_dict(self) -> dict:
        return {
            "solved": self.solved,
            "reach_correct": self.reach_correct,
            "length_correct": self.length_correct,
            "path_valid": self.path_valid,
            "mode": self.mode.value,
            "truncated_output": self.truncated_output,
            "length_omitted": self.length_omitted,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Verdict":
        return cls(
            solved=bool(data["solved"]),
            reach_correct=bool(data["reach_correct"]),
            mode=GradeMode(data.get("mode", GradeMode.ANNOTATION_MATCH.value)),
            length_correct=data.get("length_correct"),
            path_valid=data.get("path_valid"),
            truncated_output=bool(data.get("truncated_output", False)),
            length_omitted=bool(data.get("length_omitted", False)),
        )


def _first_json_object(raw: str) -> dict:
    decoder = json.JSONDecoder()
    for match in re.finditer(r"\{", raw):
        try:
            obj, _ = decoder.raw_decode(raw, match.start())
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            return obj
    raise ParseFailure("no JSON object found in response")


def _normalize_moves(value) -> MovePath:
    if isinstance(value, str):
        tokens: List[str] = re.findall(r"[A-Za-z]+", value)
        if len(tokens) == 1 and tokens[0].upper() not in _WORD_MOVES:
            tokens = list(tokens[0])
    elif isinstance(value, list):
        tokens = value
    else:
        raise ParseFailure(f"path must be a list or string, got {type(value).__name__}")

    moves = []
    for token in tokens:
        if not isinstance(token, str):
            raise ParseFailure(f"path token {token!r} is not a string")
        key = token.strip().upper()
        key = _WORD_MOVES.get(key, key)
        if key not in ("U", "D", "L", "R"):
            raise ParseFailure(f"path token {token!r} is not one of U, D, L, R")
        moves.append(Move(key))
    return tuple(moves)


def _as_bool(obj: dict, key: str, required: bool = False) -> bool:
    value = obj.get(key)
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ("true", "false"):
        return value.strip().lower() == "true"
    if required:
        raise ParseFailure(f"missing or non-boolean {key!r}")
    return False


def parse_response(raw: str) -> SolverResponse:
    """
    Extract the first JSON object from a reply, ignoring prose and code fences.

    Raises:
        ParseFailure: No JSON object, missing reachable flag, or path tokens
            outside U/D/L/R
    """
    obj = _first_json_object(raw or "")
    reachable = _as_bool(obj, "reachable", required=True)

    grid_size = None
    size = obj.get("grid_size")
    if isinstance(size, (list, tuple)) and len(size) == 2 and all(isinstance(v, int) for v in size):
        grid_size = (size[0], size[1])
    elif isinstance(size, str):
        dims = re.findall(r"\d+", size)
        if len(dims) == 2:
            grid_size = (int(dims[0]), int(dims[1]))

    path_length = obj.get("path_length")
    if isinstance(path_length, bool) or not isinstance(path_length, (int, type(None))):
        if isinstance(path_length, str) and path_length.strip().isdigit():
            path_length = int(path_length.strip())
        elif isinstance(path_length, float) and path_length.is_integer():
            path_length = int(path_length)
        else:
            path_length = None

    raw_path = obj.get("path")
    path = _normalize_moves(raw_path) if raw_path is not None else None

    return SolverResponse(
        raw_text=raw,
        reachable=reachable,
        start_found=_as_bool(obj, "start_found"),
        goal_found=_as_bool(obj, "goal_found"),
        grid_size=grid_size,
        path_length=path_length,
        path=path,
    )


def salvage_reachability(raw: str) -> Optional[bool]:
    """Best-effort reachable flag from a truncated or malformed reply."""
    match = _REACHABLE_RE.search(raw or "")
    return match.group(1).lower() == "true" if match else None


def grade(
    resp: SolverResponse,
    annotation: Annotation,
    mode: GradeMode = GradeMode.ANNOTATION_MATCH,
    grid: Optional[MazeGrid] = None,
    truncated: bool = False,
) -> Verdict:
    """
    Apply the three-condition scoring rule.

    Args:
        resp: Parsed solver answer
        annotation: Validated ground truth
        mode: annotation-match (path must equal an accepted path) or
            simulate (path must walk to the goal in shortest_len moves)
        grid: Required in simulate mode
        truncated: Reply hit the output limit; never solved

    Returns:
        Verdict
    """
    mode = GradeMode(mode)
    if not annotation.reachable:
        reach_correct = resp.reachable is False
        solved = reach_correct and not resp.path and not truncated
        return Verdict(solved=solved, reach_correct=reach_correct, mode=mode, truncated_output=truncated)

    reach_correct = resp.reachable is True
    effective_len = resp.path_length
    if effective_len is None and resp.path is not None:
        effective_len = len(resp.path)
    length_correct = effective_len == annotation.shortest_len

    if resp.path is None:
        path_valid = False
    elif mode is GradeMode.ANNOTATION_MATCH:
        path_valid = resp.path in set(annotation.accepted_paths)
    else:
        if grid is None:
            raise ValueError("simulate mode needs the maze grid")
        result = simulate_path(grid, resp.path)
        path_valid = result.reaches_goal and result.steps_taken == annotation.shortest_len

    return Verdict(
        solved=reach_correct and length_correct and path_valid and not truncated,
        reach_correct=reach_correct,
        mode=mode,
        length_correct=length_correct,
        path_valid=path_valid,
        truncated_output=truncated,
        length_omitted=resp.length_omitted,
    )


def failed_verdict(annotation: Annotation, salvaged_reachable: Optional[bool], mode: GradeMode, truncated: bool) -> Verdict:
    """Verdict for a trial whose reply never parsed; reachability is kept when salvageable."""
    reach_correct = salvaged_reachable is not None and salvaged_reachable == annotation.reachable
    return Verdict(
        solved=False,
        reach_correct=reach_correct,
        mode=GradeMode(mode),
        length_correct=None if not annotation.reachable else False,
        path_valid=None if not annotation.reachable else False,
        truncated_output=truncated,
    )
