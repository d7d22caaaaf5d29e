import numpy as np
import pytest

from maze.errors import CannotSeal, GenerationFailed, InvalidSpec, PlacementImpossible
from maze.generator import (
    MAX_WALL_DENSITY, MazeSpec, candidate_cells, derive_unreachable, generate, min_endpoint_distance, place_endpoints,
    round_half_up,
)
from maze.grid import CellKind, Position, export_text_grid
from maze.palettes import PALETTE_NAMES
from maze.pathfinder import is_reachable
from maze.rng import substream


def manhattan(a: Position, b: Position) -> int:
    return abs(a.row - b.row) + abs(a.col - b.col)


def on_opposite_edges(grid, inset: int) -> bool:
    lo_r, hi_r, lo_c, hi_c = inset, grid.rows - 1 - inset, inset, grid.cols - 1 - inset
    s, g = grid.start, grid.goal
    vertical = {s.col, g.col} == {lo_c, hi_c}
    horizontal = {s.row, g.row} == {lo_r, hi_r}
    return vertical or horizontal


@pytest.mark.parametrize("kwargs", [
    dict(rows=4, cols=9),
    dict(rows=9, cols=21),
    dict(rows=9, cols=9, wall_density=0.6),
    dict(rows=9, cols=9, trap_count=-1),
    dict(rows=9, cols=9, palette="neon"),
    dict(rows=9, cols=9, seed=-1),
])
def test_invalid_specs_are_rejected(kwargs):
    with pytest.raises(InvalidSpec):
        MazeSpec(**kwargs)


def test_round_half_up():
    assert round_half_up(2.5) == 3
    assert round_half_up(2.49) == 2
    assert round_half_up(0.0) == 0


def test_same_spec_generates_identical_maze():
    spec = MazeSpec(rows=11, cols=11, wall_density=0.3, trap_count=3, seed=42)
    a, b = generate(spec), generate(spec)
    assert export_text_grid(a.grid) == export_text_grid(b.grid)
    assert a.annotation == b.annotation
    assert a.id == b.id == "seed_000000000000002a"


def test_different_seeds_differ():
    grids = {export_text_grid(generate(MazeSpec(rows=9, cols=9, wall_density=0.3, seed=s)).grid) for s in range(5)}
    assert len(grids) > 1


def test_endpoints_respect_distance_and_edges():
    for seed in range(50):
        spec = MazeSpec(rows=7, cols=13, seed=seed)
        start, goal = place_endpoints(spec, substream(seed, "endpoints"))
        assert manhattan(start, goal) >= min_endpoint_distance(7, 13)
        inst = generate(spec)
        assert on_opposite_edges(inst.grid, inset=0)


def test_border_walls_ring_and_inset_endpoints():
    inst = generate(MazeSpec(rows=9, cols=9, wall_density=0.3, trap_count=2, border_walls=True, seed=3))
    grid = inst.grid
    assert grid.border_walls
    assert all(grid.cell(p) is CellKind.WALL for p in grid.ring_positions())
    assert on_opposite_edges(grid, inset=1)


def test_straight_corridor_keeps_line_open():
    inst = generate(MazeSpec(rows=9, cols=9, wall_density=0.05, straight_corridor=True, seed=11))
    grid = inst.grid
    assert grid.start.row == grid.goal.row or grid.start.col == grid.goal.col
    assert inst.annotation.shortest_len == manhattan(grid.start, grid.goal)
    assert len(inst.annotation.accepted_paths) == 1


def test_trap_count_and_wall_bound():
    spec = MazeSpec(rows=13, cols=13, wall_density=0.35, trap_count=5, seed=9)
    inst = generate(spec)
    grid = inst.grid
    assert grid.count(CellKind.TRAP) == 5
    bound = round_half_up(spec.wall_density * len(candidate_cells(spec, grid.start, grid.goal)))
    assert inst.achieved_wall_count == grid.count(CellKind.WALL) <= bound
    assert inst.annotation.reachable


def test_unreachable_target_is_sealed():
    spec = MazeSpec(rows=9, cols=9, wall_density=0.15, trap_count=1, reachable_target=False, seed=17)
    inst = generate(spec)
    assert not inst.annotation.reachable
    assert inst.sealing_wall_count >= 0
    walls = inst.grid.count(CellKind.WALL)
    assert walls == inst.achieved_wall_count + inst.sealing_wall_count


def test_derive_unreachable_only_adds_walls():
    inst = generate(MazeSpec(rows=11, cols=11, wall_density=0.2, seed=23))
    sealed = derive_unreachable(inst.grid, substream(23, "seal"))
    assert not is_reachable(sealed)
    for pos in inst.grid.positions():
        before, after = inst.grid.cell(pos), sealed.cell(pos)
        assert before == after or (before is CellKind.OPEN and after is CellKind.WALL)
    assert (sealed.start, sealed.goal) == (inst.grid.start, inst.grid.goal)


def test_trap_variation_keeps_wall_layout():
    base = MazeSpec(rows=9, cols=9, wall_density=0.25, seed=77)
    plain = generate(base)
    trapped = generate(MazeSpec(rows=9, cols=9, wall_density=0.25, trap_count=4, seed=77))
    for pos in plain.grid.positions():
        a, b = plain.grid.cell(pos), trapped.grid.cell(pos)
        if b is CellKind.TRAP:
            assert a is CellKind.OPEN
        else:
            assert a == b
    assert trapped.grid.count(CellKind.TRAP) == 4


def test_reserved_ring_differs_from_bordered_only_on_ring():
    common = dict(rows=9, cols=9, wall_density=0.25, trap_count=2, seed=5)
    control = generate(MazeSpec(reserve_ring=True, **common)).grid
    bordered = generate(MazeSpec(border_walls=True, **common)).grid
    ring = set(bordered.ring_positions())
    for pos in control.positions():
        if pos in ring:
            assert control.cell(pos) is CellKind.OPEN
            assert bordered.cell(pos) is CellKind.WALL
        else:
            assert control.cell(pos) == bordered.cell(pos)
    assert not control.border_walls


def test_placement_impossible_without_pairs(monkeypatch):
    import maze.generator as generator

    monkeypatch.setattr(generator, "min_endpoint_distance", lambda rows, cols: 10 ** 6)
    with pytest.raises(PlacementImpossible):
        place_endpoints(MazeSpec(rows=5, cols=5), substream(0, "endpoints"))


@pytest.mark.slow
def test_generator_validity_across_parameter_envelope():
    rng = np.random.default_rng(500)
    built = 0
    for _ in range(500):
        rows, cols = int(rng.integers(5, 21)), int(rng.integers(5, 21))
        spec = MazeSpec(
            rows=rows, cols=cols,
            wall_density=float(rng.choice([0.0, 0.05, 0.15, 0.25, 0.35, 0.45, MAX_WALL_DENSITY])),
            trap_count=int(rng.integers(0, min(rows, cols) // 2 + 1)),
            border_walls=bool(rng.integers(2)),
            reachable_target=bool(rng.random() < 0.75),
            palette=str(rng.choice(PALETTE_NAMES)),
            seed=int(rng.integers(0, 2 ** 63)),
        )
        try:
            inst = generate(spec)
        except GenerationFailed as e:
            # trap exhaustion is the only accepted way to give up
            assert not isinstance(e, CannotSeal)
            assert spec.trap_count > 0 and "traps before exhausting candidates" in str(e)
            continue
        built += 1
        grid = inst.grid
        assert inst.annotation.reachable == spec.reachable_target
        assert grid.count(CellKind.TRAP) == spec.trap_count
        bound = round_half_up(spec.wall_density * len(candidate_cells(spec, grid.start, grid.goal)))
        assert inst.achieved_wall_count <= bound
        assert export_text_grid(generate(spec).grid) == export_text_grid(grid)
    assert built >= 350
