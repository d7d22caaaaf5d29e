import io

import numpy as np
import pytest
from PIL import Image

from maze.generator import MazeSpec, generate
from maze.grid import CellKind, Position, export_text_grid
from maze.palettes import PALETTE_NAMES, PALETTES, get_palette
from maze.renderer import CANVAS_PX, compute_layout, infer_dimensions, read_back, render_png, structure_mask


def maze(rows=9, cols=9, seed=1, palette="forest", **kw):
    return generate(MazeSpec(rows=rows, cols=cols, wall_density=0.3, trap_count=2, palette=palette, seed=seed, **kw)).grid


def decode(png: bytes) -> Image.Image:
    return Image.open(io.BytesIO(png))


def test_png_is_1024_square_rgb():
    image = decode(render_png(maze(), "forest", 1))
    assert image.format == "PNG"
    assert image.size == (CANVAS_PX, CANVAS_PX)
    assert image.mode == "RGB"


def test_rerender_is_byte_identical():
    grid = maze(seed=4)
    assert render_png(grid, "dungeon", 4) == render_png(grid, "dungeon", 4)


def test_layout_centres_the_grid():
    tile, ox, oy = compute_layout(7, 13)
    assert tile == CANVAS_PX // 13
    assert ox == (CANVAS_PX - 13 * tile) // 2
    assert oy == (CANVAS_PX - 7 * tile) // 2


def test_key_colours_are_distinct_within_each_palette():
    for palette in PALETTES.values():
        assert len(set(palette.keys.values())) == 5


def test_unknown_palette_raises():
    with pytest.raises(ValueError):
        get_palette("neon")


def test_single_cell_edit_changes_only_that_tile():
    grid = maze(seed=8)
    target = next(p for p in grid.positions() if grid.cell(p) is CellKind.OPEN and p not in (grid.start, grid.goal))
    edited = grid.with_cells({target: CellKind.WALL})
    a = np.asarray(decode(render_png(grid, "meadow", 8)))
    b = np.asarray(decode(render_png(edited, "meadow", 8)))
    tile, ox, oy = compute_layout(grid.rows, grid.cols)
    changed = np.argwhere((a != b).any(axis=-1))
    assert len(changed) > 0
    y0, x0 = oy + target.row * tile, ox + target.col * tile
    assert changed[:, 0].min() >= y0 and changed[:, 0].max() < y0 + tile
    assert changed[:, 1].min() >= x0 and changed[:, 1].max() < x0 + tile


def test_palettes_change_pixels_not_structure():
    grid = maze(seed=12)
    masks = {structure_mask(render_png(grid, name, 12), grid.rows, grid.cols) for name in PALETTE_NAMES}
    assert masks == {export_text_grid(grid)}


@pytest.mark.parametrize("rows, cols", [(5, 5), (7, 13), (10, 10), (20, 20), (13, 7)])
def test_infer_dimensions(rows, cols):
    spec_rows, spec_cols = rows, cols
    grid = generate(MazeSpec(rows=spec_rows, cols=spec_cols, wall_density=0.25, seed=rows * 100 + cols)).grid
    assert infer_dimensions(render_png(grid, "desert", 3)) == (rows, cols)


@pytest.mark.slow
def test_readback_recovers_random_mazes():
    rng = np.random.default_rng(100)
    for i in range(100):
        rows, cols = int(rng.integers(5, 21)), int(rng.integers(5, 21))
        palette = PALETTE_NAMES[i % len(PALETTE_NAMES)]
        grid = maze(rows, cols, seed=int(rng.integers(0, 2 ** 32)), palette=palette,
                    border_walls=bool(rng.integers(2)) and min(rows, cols) >= 7)
        png = render_png(grid, palette, i)
        back = read_back(png, rows, cols)
        assert export_text_grid(back) == export_text_grid(grid)
        assert (back.start, back.goal) == (grid.start, grid.goal)
        assert back.cell(Position(0, 0)) is grid.cell(Position(0, 0))
