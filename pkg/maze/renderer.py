"""
Deterministic 1024x1024 pixel-art PNG rendering.

Tiles are textured with NumPy (dithered floors, brick walls, hazard plates),
sprites are drawn with Pillow, and the centre of every tile is painted with
its palette key colour so `read_back()` can recover the grid from the image.
Per-tile jitter comes from a stream keyed by (seed, row, col): editing one
cell only changes that tile.
"""
import io
import logging
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np
from PIL import Image, ImageDraw

from .grid import CellKind, MazeGrid, Position, parse_text_grid
from .palettes import PALETTES, Palette, get_palette
from .rng import substream

logger = logging.getLogger(__name__)

CANVAS_PX = 1024
PNG_COMPRESS_LEVEL = 6


class Layout(NamedTuple):
    tile_px: int
    offset_x: int
    offset_y: int


def compute_layout(rows: int, cols: int) -> Layout:
    tile = CANVAS_PX // max(rows, cols)
    return Layout(tile, (CANVAS_PX - cols * tile) // 2, (CANVAS_PX - rows * tile) // 2)


def _core_box(tile: int):
    """Centre square (offset, size) painted with the cell's key colour."""
    size = max(4, tile // 5)
    offset = (tile - size) // 2
    return offset, size


def _dither(rng: np.random.Generator, tile: int, rate: float) -> np.ndarray:
    block = max(1, tile // 12)
    cells = -(-tile // block)
    coarse = rng.random((cells, cells)) < rate
    return np.kron(coarse, np.ones((block, block), dtype=bool))[:tile, :tile]


def _floor_tile(palette: Palette, rng: np.random.Generator, tile: int) -> np.ndarray:
    base, speck, shade = palette.floor
    arr = np.empty((tile, tile, 3), dtype=np.uint8)
    arr[:] = base
    arr[_dither(rng, tile, 0.10)] = speck
    arr[_dither(rng, tile, 0.06)] = shade
    return arr


def _wall_tile(palette: Palette, rng: np.random.Generator, tile: int) -> np.ndarray:
    base, mortar, highlight = palette.wall
    arr = np.empty((tile, tile, 3), dtype=np.uint8)
    arr[:] = base
    line = max(1, tile // 24)
    course = max(2, tile // 4)
    shift = int(rng.integers(course))
    for i, top in enumerate(range(0, tile, course)):
        arr[top:top + line, :] = mortar
        joint = (shift + (i % 2) * (tile // 2)) % tile
        for x in (joint, (joint + tile // 2) % tile):
            arr[top:top + course, x:x + line] = mortar
    arr[_dither(rng, tile, 0.04)] = highlight
    arr[:line, :] = highlight
    arr[-line:, :] = mortar
    arr[:, -line:] = mortar
    return arr


def _trap_tile(palette: Palette, rng: np.random.Generator, tile: int) -> np.ndarray:
    base, _, outline = palette.trap
    arr = np.empty((tile, tile, 3), dtype=np.uint8)
    arr[:] = base
    arr[_dither(rng, tile, 0.05)] = outline
    return arr


def _draw_spikes(draw: ImageDraw.ImageDraw, x0: int, y0: int, tile: int, palette: Palette):
    _, spike, outline = palette.trap
    half = tile // 2
    for qx in (0, half):
        for qy in (0, half):
            left, top = x0 + qx, y0 + qy
            points = [
                (left + half * 0.15, top + half * 0.9),
                (left + half * 0.5, top + half * 0.1),
                (left + half * 0.85, top + half * 0.9),
            ]
            draw.polygon(points, fill=spike, outline=outline)
    draw.rectangle([x0, y0, x0 + tile - 1, y0 + tile - 1], outline=outline, width=max(1, tile // 24))


def _draw_player(draw: ImageDraw.ImageDraw, x0: int, y0: int, tile: int, palette: Palette):
    body, trim = palette.player
    draw.ellipse([x0 + tile * 0.25, y0 + tile * 0.32, x0 + tile * 0.75, y0 + tile * 0.88], fill=body)
    draw.ellipse([x0 + tile * 0.36, y0 + tile * 0.08, x0 + tile * 0.64, y0 + tile * 0.36], fill=trim)


def _draw_treasure(draw: ImageDraw.ImageDraw, x0: int, y0: int, tile: int, palette: Palette):
    chest, lid = palette.treasure
    draw.rectangle([x0 + tile * 0.18, y0 + tile * 0.30, x0 + tile * 0.82, y0 + tile * 0.82], fill=chest, outline=lid)
    draw.rectangle([x0 + tile * 0.18, y0 + tile * 0.22, x0 + tile * 0.82, y0 + tile * 0.34], fill=lid)


def _cell_class(grid: MazeGrid, pos: Position) -> str:
    if pos == grid.start:
        return "start"
    if pos == grid.goal:
        return "goal"
    return {CellKind.OPEN: "open", CellKind.WALL: "wall", CellKind.TRAP: "trap"}[grid.cell(pos)]


def render_image(grid: MazeGrid, palette: Union[Palette, str], seed: int) -> Image.Image:
    """Render a maze to an in-memory RGB image."""
    if isinstance(palette, str):
        palette = get_palette(palette)
    tile, ox, oy = compute_layout(grid.rows, grid.cols)
    canvas = np.empty((CANVAS_PX, CANVAS_PX, 3), dtype=np.uint8)
    canvas[:] = palette.backdrop

    builders = {CellKind.OPEN: _floor_tile, CellKind.WALL: _wall_tile, CellKind.TRAP: _trap_tile}
    for pos in grid.positions():
        rng = substream(seed ^ palette.sprite_seed, "tile", pos.row, pos.col)
        y0, x0 = oy + pos.row * tile, ox + pos.col * tile
        canvas[y0:y0 + tile, x0:x0 + tile] = builders[grid.cell(pos)](palette, rng, tile)

    image = Image.fromarray(canvas)
    draw = ImageDraw.Draw(image)
    core_offset, core_size = _core_box(tile)
    for pos in grid.positions():
        y0, x0 = oy + pos.row * tile, ox + pos.col * tile
        cls = _cell_class(grid, pos)
        if cls == "trap":
            _draw_spikes(draw, x0, y0, tile, palette)
        elif cls == "start":
            _draw_player(draw, x0, y0, tile, palette)
        elif cls == "goal":
            _draw_treasure(draw, x0, y0, tile, palette)
        left, top = x0 + core_offset, y0 + core_offset
        draw.rectangle([left, top, left + core_size - 1, top + core_size - 1], fill=palette.keys[cls])
    return image


def render_png(grid: MazeGrid, palette: Union[Palette, str], seed: int) -> bytes:
    """
    Render a maze to PNG bytes (8-bit RGB, 1024x1024, fixed encoder settings).

    Args:
        grid: Maze to draw (never modified)
        palette: Palette or palette name
        seed: Texture jitter seed

    Returns:
        PNG file content
    """
    buf = io.BytesIO()
    render_image(grid, palette, seed).save(buf, format="PNG", compress_level=PNG_COMPRESS_LEVEL, optimize=False)
    return buf.getvalue()


def write_png(grid: MazeGrid, palette: Union[Palette, str], seed: int, path: Path) -> bytes:
    data = render_png(grid, palette, seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return data


_SYMBOL = {"open": ".", "wall": "#", "trap": "T", "start": "S", "goal": "G"}


def _decode(pixels: np.ndarray, rows: int, cols: int, palette: Palette):
    tile, ox, oy = compute_layout(rows, cols)
    core_offset, core_size = _core_box(tile)
    inner = max(2, core_size // 2)
    margin = core_offset + (core_size - inner) // 2
    names = list(palette.keys)
    keys = np.array([palette.keys[n] for n in names], dtype=np.float64)
    lines, error = [], 0.0
    for r in range(rows):
        line = []
        for c in range(cols):
            y, x = oy + r * tile + margin, ox + c * tile + margin
            sample = pixels[y:y + inner, x:x + inner].reshape(-1, 3).mean(axis=0)
            dist = ((keys - sample) ** 2).sum(axis=1)
            best = int(dist.argmin())
            error += float(dist[best])
            line.append(_SYMBOL[names[best]])
        lines.append("".join(line))
    return "\n".join(lines), error


def structure_mask(png: bytes, rows: int, cols: int, palette: Optional[Union[Palette, str]] = None) -> str:
    """
    Decode an image back to its S/G/./#/T text grid.

    When palette is None the best-fitting palette is used.
    """
    pixels = np.asarray(Image.open(io.BytesIO(png)).convert("RGB"))
    if palette is not None:
        if isinstance(palette, str):
            palette = get_palette(palette)
        return _decode(pixels, rows, cols, palette)[0]
    decoded = [_decode(pixels, rows, cols, p) for p in PALETTES.values()]
    return min(decoded, key=lambda item: item[1])[0]


def read_back(png: bytes, rows: int, cols: int, palette: Optional[Union[Palette, str]] = None) -> MazeGrid:
    """Recover the maze grid from a rendered image."""
    return parse_text_grid(structure_mask(png, rows, cols, palette))


def _margins_match(pixels: np.ndarray, layout: Layout, rows: int, cols: int) -> bool:
    tile, ox, oy = layout
    right, bottom = ox + cols * tile, oy + rows * tile
    backdrop = pixels[0, 0]
    margin = np.ones(pixels.shape[:2], dtype=bool)
    margin[oy:bottom, ox:right] = False
    if margin.any() and not (pixels[margin] == backdrop).all():
        return False
    # The first and last tile columns/rows must hold no backdrop pixel at all.
    if ox or oy:
        edges = [
            pixels[oy:bottom, ox], pixels[oy:bottom, right - 1],
            pixels[oy, ox:right], pixels[bottom - 1, ox:right],
        ]
        if any((edge == backdrop).all(axis=-1).any() for edge in edges):
            return False
    return True


def infer_dimensions(png: bytes) -> tuple:
    """
    Recover (rows, cols) of a rendered maze.

    Candidate sizes must reproduce the image's backdrop margins exactly;
    layouts that coincide (e.g. 10x10 and 20x20) are separated by how well
    the tile centres match a palette's key colours.
    """
    pixels = np.asarray(Image.open(io.BytesIO(png)).convert("RGB"))
    best = None
    for rows in range(5, 21):
        for cols in range(5, 21):
            layout = compute_layout(rows, cols)
            if not _margins_match(pixels, layout, rows, cols):
                continue
            for palette in PALETTES.values():
                text, error = _decode(pixels, rows, cols, palette)
                if best is not None and error >= best[0]:
                    continue
                try:
                    parse_text_grid(text)
                except ValueError:
                    continue
                best = (error, rows, cols)
    if best is None:
        raise ValueError("image does not decode as a maze of any supported size")
    return best[1], best[2]
