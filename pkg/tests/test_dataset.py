import json
from dataclasses import replace
from collections import Counter

import pytest

from maze.dataset import (
    CORE_GROUPS, DEFAULT_GROUPS, GroupSpec, Manifest, ManifestEntry, assemble_benchmark, load_manifest, manifest_from_dict,
    rerender_images, summarize, verify_manifest, write_manifest,
)
from maze.errors import ManifestCorrupt
from maze.generator import candidate_cells, round_half_up
from maze.grid import CellKind, export_text_grid, parse_text_grid

from conftest import SMALL_GROUPS


def by_pair(manifest, group_id):
    pairs = {}
    for entry in manifest.entries:
        if entry.group_id == group_id:
            pairs.setdefault(entry.pair_id, []).append(entry)
    return pairs


@pytest.mark.slow
def test_group_counts(default_manifest):
    counts = Counter(e.group_id for e in default_manifest.entries)
    assert [counts[g] for g in "ABCDEFGHX"] == [8, 15, 15, 12, 14, 10, 16, 10, 10]
    assert len(default_manifest.entries) == 110
    assert [e.maze_id for e in default_manifest.entries[:2]] == ["gen_maze_001", "gen_maze_002"]


@pytest.mark.slow
def test_path_length_ranges(default_manifest):
    for entry in default_manifest.entries:
        if entry.annotation.reachable:
            assert 4 <= entry.annotation.shortest_len <= 42
            if entry.group_id == "X":
                assert 28 <= entry.annotation.shortest_len <= 42


@pytest.mark.slow
def test_core_set_has_28_unreachable(default_manifest):
    core = [e for e in default_manifest.entries if e.group_id in CORE_GROUPS]
    assert len(core) == 100
    assert sum(not e.annotation.reachable for e in core) == 28
    assert summarize(default_manifest)["core_unreachable"] == 28


@pytest.mark.slow
def test_ultra_hard_unreachable_slots(default_manifest):
    ids = sorted(e.maze_id for e in default_manifest.entries if e.group_id == "X" and not e.annotation.reachable)
    assert ids == ["gen_maze_104", "gen_maze_107", "gen_maze_110"]


@pytest.mark.slow
def test_ultra_hard_shape(default_manifest):
    for entry in default_manifest.entries:
        if entry.group_id == "X":
            assert (entry.spec.rows, entry.spec.cols) == (20, 20)
            assert 8 <= entry.spec.trap_count <= 25


@pytest.mark.slow
def test_trap_pairs_differ_only_by_traps(default_manifest):
    pairs = by_pair(default_manifest, "D")
    assert len(pairs) == 6
    for plain, trapped in pairs.values():
        a, b = plain.grid, trapped.grid
        assert (a.start, a.goal) == (b.start, b.goal)
        assert a.count(CellKind.TRAP) == 0 and b.count(CellKind.TRAP) > 0
        for pos in a.positions():
            if b.cell(pos) is CellKind.TRAP:
                assert a.cell(pos) is CellKind.OPEN
            else:
                assert a.cell(pos) == b.cell(pos)


@pytest.mark.slow
def test_border_pairs_differ_only_by_ring(default_manifest):
    pairs = by_pair(default_manifest, "F")
    assert len(pairs) == 5
    for control, bordered in pairs.values():
        a, b = control.grid, bordered.grid
        assert not a.border_walls and b.border_walls
        ring = set(b.ring_positions())
        for pos in a.positions():
            if pos not in ring:
                assert a.cell(pos) == b.cell(pos)
        assert a.count(CellKind.TRAP) == b.count(CellKind.TRAP)


@pytest.mark.slow
def test_palette_stress_shares_structure(default_manifest):
    structures = by_pair(default_manifest, "H")
    assert len(structures) == 3
    for members in structures.values():
        assert len({e.text_grid for e in members}) == 1
        assert len({e.spec.palette for e in members}) > 1


@pytest.mark.slow
def test_text_grids_round_trip(default_manifest):
    for entry in default_manifest.entries:
        assert export_text_grid(parse_text_grid(entry.text_grid)) == entry.text_grid


@pytest.mark.slow
def test_default_manifest_verifies(default_manifest):
    assert verify_manifest(default_manifest) == []


def test_assembly_is_deterministic():
    assert assemble_benchmark(SMALL_GROUPS, master_seed=3).digest() == assemble_benchmark(SMALL_GROUPS, master_seed=3).digest()
    assert assemble_benchmark(SMALL_GROUPS, master_seed=3).digest() != assemble_benchmark(SMALL_GROUPS, master_seed=4).digest()


def test_manifest_round_trip(tmp_path, small_manifest):
    path = tmp_path / "manifest.json"
    write_manifest(small_manifest, path)
    loaded = load_manifest(path)
    assert loaded == small_manifest
    assert loaded.digest() == small_manifest.digest()


def test_corrupt_annotation_is_detected(small_manifest):
    data = small_manifest.to_dict()
    entry = next(e for e in data["entries"] if e["annotation"]["reachable"])
    entry["annotation"]["shortest_len"] += 2
    with pytest.raises(ManifestCorrupt):
        manifest_from_dict(data)


def test_duplicate_ids_are_rejected(small_manifest):
    data = small_manifest.to_dict()
    data["entries"][1]["maze_id"] = data["entries"][0]["maze_id"]
    with pytest.raises(ManifestCorrupt):
        manifest_from_dict(data)


def test_unknown_version_is_rejected(small_manifest):
    data = small_manifest.to_dict()
    data["version"] = 99
    with pytest.raises(ManifestCorrupt):
        manifest_from_dict(data)


def test_invalid_json_is_rejected(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ManifestCorrupt):
        load_manifest(path)


def test_rendering_records_image_hashes(tmp_path, small_manifest):
    rendered = rerender_images(small_manifest, tmp_path, workers=2)
    for entry in rendered.entries:
        assert (tmp_path / entry.image_path).exists()
        assert len(entry.image_sha256) == 64
    again = rerender_images(small_manifest, tmp_path, workers=1)
    assert [e.image_sha256 for e in again.entries] == [e.image_sha256 for e in rendered.entries]


def test_select_groups(small_manifest):
    only_b = small_manifest.select_groups(["b"])
    assert {e.group_id for e in only_b.entries} == {"B"}
    assert len(only_b.entries) == 4


def test_group_spec_validation():
    with pytest.raises(ValueError):
        GroupSpec("Z", 3, sizes=(5,), densities=(0.1,), paired_on="traps")
    with pytest.raises(ValueError):
        GroupSpec("Z", 2, sizes=(5,), densities=(0.1,), unreachable=3)


ULTRA_HARD = next(g for g in DEFAULT_GROUPS if g.group_id == "X")


@pytest.mark.parametrize("density", sorted(set(ULTRA_HARD.densities)))
def test_ultra_hard_density_floor_is_attainable(density):
    group = replace(ULTRA_HARD, count=1, densities=(density,), trap_counts=(0,), unreachable=0, length_range=(1, 400))
    (entry,) = assemble_benchmark([group], master_seed=1, max_attempts=3).entries
    grid = entry.grid
    floor = round_half_up(ULTRA_HARD.min_achieved_density * len(candidate_cells(entry.spec, grid.start, grid.goal)))
    assert grid.count(CellKind.WALL) >= floor
