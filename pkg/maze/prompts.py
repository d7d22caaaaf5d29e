"""
Fixed evaluation prompts.

The prompt text is versioned: PROMPT_VERSION is stored in every run report so
results obtained with different wording are never mixed silently.
"""
from enum import Enum
from pathlib import Path
from typing import Optional

PROMPT_VERSION = "2026-03.1"

ANSWER_SCHEMA = (
    '{"grid_size": [rows, cols], "start_found": true|false, "goal_found": true|false, '
    '"reachable": true|false, "path_length": <integer or null>, "path": ["U"|"D"|"L"|"R", ...]}'
)

NO_TOOLS_CLAUSE = (
    "Do not use any external tools, code, search, calculators, or graph-search programs."
)

VISUAL_INTUITION_CLAUSE = (
    "Do NOT convert the maze into a text grid, matrix, or row/column representation. "
    "Do NOT perform step-by-step BFS, DFS, or any graph-search algorithm in text. "
    "Instead, solve this the way a human would: look at the image, visually trace the walkable path."
)

_IMAGE_INTRO = (
    "The image shows a pixel-art maze drawn on a square grid. The player sprite marks the start cell "
    "and the treasure chest marks the goal cell. Floor tiles are walkable; wall tiles and spiked trap "
    "tiles are impassable."
)

_TEXT_INTRO = (
    "The maze below is a grid written one row per line: S is the start, G is the goal, '.' is open "
    "floor, '#' is a wall and 'T' is a trap. Walls and traps are impassable."
)

_TASK = (
    "Moves go one cell up (U), down (D), left (L) or right (R); diagonal moves are not allowed. "
    "Determine the grid size, whether the start and goal are present, whether the goal can be reached "
    "from the start, the length of a shortest path, and one shortest path as a list of moves. "
    "If the goal is unreachable, set \"reachable\" to false, \"path_length\" to null and \"path\" to []."
)

_OUTPUT = "Respond with a single JSON object and nothing else, using exactly this schema:\n" + ANSWER_SCHEMA


class InputMode(str, Enum):
    IMAGE = "image"
    TEXT_GRID = "text-grid"


class PromptVariant(str, Enum):
    STANDARD = "standard"
    VISUAL_INTUITION = "visual-intuition"


def build_prompt(
    input_mode: InputMode,
    variant: PromptVariant = PromptVariant.STANDARD,
    text_grid: Optional[str] = None,
    template: Optional[str] = None,
) -> str:
    """
    Compose the prompt text.

    Args:
        input_mode: image or text-grid
        variant: standard or visual-intuition
        text_grid: Exported S/G/./#/T grid (text-grid mode only)
        template: Optional custom intro replacing the default one

    Returns:
        Prompt text (the image itself travels separately)
    """
    input_mode, variant = InputMode(input_mode), PromptVariant(variant)
    intro = template or (_TEXT_INTRO if input_mode is InputMode.TEXT_GRID else _IMAGE_INTRO)
    parts = [intro, _TASK, NO_TOOLS_CLAUSE]
    if variant is PromptVariant.VISUAL_INTUITION:
        parts.append(VISUAL_INTUITION_CLAUSE)
    parts.append(_OUTPUT)
    if input_mode is InputMode.TEXT_GRID:
        if text_grid is None:
            raise ValueError("text-grid mode needs the exported grid")
        parts.append("Maze:\n" + text_grid)
    return "\n\n".join(parts)


def load_template(path: Optional[str]) -> Optional[str]:
    if not path:
        return None
    return Path(path).read_text(encoding="utf-8").strip()
