"""
Benchmark assembly: nine groups (A-H core set plus ultra-hard X), matched
pairs, palette stress, rejection sampling, and the persisted JSON manifest.
"""
import hashlib
import json
import logging
import os
import re
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import AssemblyFailed, GenerationFailed, MalformedGrid, ManifestCorrupt, PlacementImpossible
from .generator import MazeInstance, MazeSpec, candidate_cells, generate, round_half_up
from .grid import MazeGrid, export_text_grid, parse_text_grid, simulate_path
from .palettes import PALETTE_NAMES
from .pathfinder import Annotation, analyze, brute_force_oracle
from .renderer import write_png
from .rng import UINT64_MASK, derive_seed

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1
DEFAULT_MASTER_SEED = 110
DEFAULT_MAX_ATTEMPTS = 10_000
CORE_GROUPS = ("A", "B", "C", "D", "E", "F", "G", "H")
MAZE_ID_PATTERN = re.compile(r"^gen_maze_\d{3,}$")


@dataclass(frozen=True)
class GroupSpec:
    """
    Parameters for one benchmark group.

    Per-entry values are read cyclically from the tuples (by pair index for
    paired groups, by structure index for palette-stress groups).
    """

    group_id: str
    count: int
    sizes: Tuple[int, ...]
    densities: Tuple[float, ...]
    trap_counts: Tuple[int, ...] = (0,)
    border_walls: bool = False
    unreachable: int = 0
    paired_on: Optional[str] = None
    structures: Optional[int] = None
    straight_corridor: bool = False
    palettes: Tuple[str, ...] = PALETTE_NAMES
    length_range: Tuple[int, int] = (4, 42)
    min_achieved_density: float = 0.0
    description: str = ""

    def __post_init__(self):
        if self.count < 0:
            raise ValueError(f"group {self.group_id}: count must be >= 0")
        if self.paired_on not in (None, "traps", "border"):
            raise ValueError(f"group {self.group_id}: paired_on must be traps or border")
        if self.paired_on and self.count % 2:
            raise ValueError(f"group {self.group_id}: paired groups need an even count")
        if not 0 <= self.unreachable <= self.count:
            raise ValueError(f"group {self.group_id}: unreachable quota outside [0, count]")
        if self.paired_on and self.unreachable:
            raise ValueError(f"group {self.group_id}: matched pairs must be reachable")

    def unreachable_slots(self) -> set:
        """Entry indices that must be unreachable, spread evenly from the end."""
        q = self.unreachable
        return {self.count - 1 - (k * self.count) // q for k in range(q)}


DEFAULT_GROUPS: Tuple[GroupSpec, ...] = (
    GroupSpec("A", 8, sizes=(5, 7, 9, 11), densities=(0.0, 0.0, 0.0, 0.0, 0.05, 0.05, 0.05, 0.05),
              straight_corridor=True, description="Diagnostic"),
    GroupSpec("B", 15, sizes=(5, 5, 5, 7, 7, 7, 9, 9, 9, 11, 11, 11, 13, 13, 13), densities=(0.25,),
              unreachable=4, description="Grid Scale"),
    GroupSpec("C", 15, sizes=(9,), densities=(0.0, 0.05, 0.15, 0.25, 0.35, 0.45),
              unreachable=4, description="Wall Density"),
    GroupSpec("D", 12, sizes=(7, 9, 11), densities=(0.25,), trap_counts=(3, 4, 5),
              paired_on="traps", description="Trap Ablation"),
    GroupSpec("E", 14, sizes=(5, 7, 9, 11, 13), densities=(0.15, 0.25, 0.35), trap_counts=(0, 1, 2),
              unreachable=14, description="Unreachable"),
    GroupSpec("F", 10, sizes=(7, 9, 11, 9, 7), densities=(0.25,),
              paired_on="border", description="Border Walls"),
    GroupSpec("G", 16, sizes=(9, 11, 13), densities=(0.35, 0.40, 0.45), trap_counts=(2, 3, 4, 5, 6),
              border_walls=True, unreachable=6, description="Combined Hard"),
    GroupSpec("H", 10, sizes=(9,), densities=(0.25,), trap_counts=(2,), structures=3,
              description="Palette Stress"),
    GroupSpec("X", 10, sizes=(20,), densities=(0.35, 0.40, 0.45, 0.50, 0.38, 0.42, 0.48, 0.36, 0.44, 0.52),
              trap_counts=(8, 10, 12, 15, 18, 20, 25, 9, 14, 22), unreachable=3,
              length_range=(28, 42), min_achieved_density=0.35, description="Ultra-Hard"),
)


@dataclass(frozen=True)
class ManifestEntry:
    maze_id: str
    group_id: str
    spec: MazeSpec
    image_path: str
    text_grid: str
    annotation: Annotation
    pair_id: Optional[str] = None
    image_sha256: Optional[str] = None

    @property
    def grid(self) -> MazeGrid:
        return parse_text_grid(self.text_grid)

    def to_dict(self) -> dict:
        return {
            "maze_id": self.maze_id,
            "group_id": self.group_id,
            "spec": self.spec.to_dict(),
            "image_path": self.image_path,
            "image_sha256": self.image_sha256,
            "text_grid": self.text_grid,
            "annotation": self.annotation.to_dict(),
            "pair_id": self.pair_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ManifestEntry":
        return cls(
            maze_id=data["maze_id"],
            group_id=data["group_id"],
            spec=MazeSpec.from_dict(data["spec"]),
            image_path=data["image_path"],
            text_grid=data["text_grid"],
            annotation=Annotation.from_dict(data["annotation"]),
            pair_id=data.get("pair_id"),
            image_sha256=data.get("image_sha256"),
        )


@dataclass(frozen=True)
class Manifest:
    master_seed: int
    entries: Tuple[ManifestEntry, ...] = field(default_factory=tuple)
    version: int = MANIFEST_VERSION

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "master_seed": self.master_seed,
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    def by_id(self) -> Dict[str, ManifestEntry]:
        return {e.maze_id: e for e in self.entries}

    def select_groups(self, groups: Sequence[str]) -> "Manifest":
        wanted = {g.upper() for g in groups}
        return replace(self, entries=tuple(e for e in self.entries if e.group_id in wanted))


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def _pick(values: Sequence, index: int):
    return values[index % len(values)]


def _meets_constraints(group: GroupSpec, instance: MazeInstance) -> bool:
    spec = instance.spec
    if instance.annotation.reachable:
        lo, hi = group.length_range
        if not lo <= instance.annotation.shortest_len <= hi:
            return False
    if group.min_achieved_density:
        candidates = len(candidate_cells(spec, instance.grid.start, instance.grid.goal))
        # same rounding the generator uses for its wall target
        if instance.achieved_wall_count < round_half_up(group.min_achieved_density * candidates):
            return False
    return True


def _sample(group: GroupSpec, specs_for_seed, seed: int, max_attempts: int, label: str) -> List[MazeInstance]:
    """Regenerate with incremented sub-seeds until every spec meets the group constraints."""
    for attempt in range(max_attempts):
        trial_seed = (seed + attempt) & UINT64_MASK
        try:
            instances = [generate(spec) for spec in specs_for_seed(trial_seed)]
        except (GenerationFailed, PlacementImpossible) as e:
            logger.debug(f"{label}: attempt {attempt} rejected ({e})")
            continue
        if all(_meets_constraints(group, inst) for inst in instances):
            if attempt:
                logger.debug(f"{label}: accepted after {attempt + 1} attempts")
            return instances
    raise AssemblyFailed(f"{label}: constraints not met within {max_attempts} attempts")


def _group_instances(group: GroupSpec, master_seed: int, max_attempts: int) -> List[Tuple[MazeInstance, Optional[str]]]:
    out: List[Tuple[MazeInstance, Optional[str]]] = []
    gid = group.group_id
    unreachable = group.unreachable_slots()

    if group.paired_on:
        for p in range(group.count // 2):
            size, density, traps = _pick(group.sizes, p), _pick(group.densities, p), _pick(group.trap_counts, p)
            palette = _pick(group.palettes, p)

            def specs(seed, size=size, density=density, traps=traps, palette=palette):
                base = MazeSpec(rows=size, cols=size, wall_density=density, palette=palette, seed=seed)
                if group.paired_on == "traps":
                    base = replace(base, border_walls=group.border_walls)
                    return [base, replace(base, trap_count=traps)]
                return [replace(base, trap_count=traps, reserve_ring=True), replace(base, trap_count=traps, border_walls=True)]

            pair = _sample(group, specs, derive_seed(master_seed, gid, p), max_attempts, f"{gid} pair {p + 1}")
            out.extend((inst, f"{gid}{p + 1}") for inst in pair)
        return out

    if group.structures:
        per_structure = -(-group.count // group.structures)
        for s in range(group.structures):
            size, density, traps = _pick(group.sizes, s), _pick(group.densities, s), _pick(group.trap_counts, s)
            members = [i for i in range(group.count) if i // per_structure == s]
            if not members:
                continue

            def specs(seed, size=size, density=density, traps=traps, members=members):
                return [
                    MazeSpec(rows=size, cols=size, wall_density=density, trap_count=traps,
                             border_walls=group.border_walls, reachable_target=i not in unreachable,
                             palette=_pick(group.palettes, i), seed=seed)
                    for i in members
                ]

            shared = _sample(group, specs, derive_seed(master_seed, gid, s), max_attempts, f"{gid} structure {s + 1}")
            out.extend((inst, f"{gid}{s + 1}") for inst in shared)
        return out

    for i in range(group.count):
        def specs(seed, i=i):
            return [MazeSpec(
                rows=_pick(group.sizes, i), cols=_pick(group.sizes, i),
                wall_density=_pick(group.densities, i), trap_count=_pick(group.trap_counts, i),
                border_walls=group.border_walls, reachable_target=i not in unreachable,
                palette=_pick(group.palettes, i), seed=seed,
                straight_corridor=group.straight_corridor,
            )]

        (inst,) = _sample(group, specs, derive_seed(master_seed, gid, i), max_attempts, f"{gid} entry {i + 1}")
        out.append((inst, None))
    return out


def assemble_benchmark(
    config: Sequence[GroupSpec] = DEFAULT_GROUPS,
    master_seed: int = DEFAULT_MASTER_SEED,
    out_dir: Optional[Path] = None,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    render_workers: int = 4,
) -> Manifest:
    """
    Generate every group deterministically from master_seed.

    Args:
        config: Group definitions, in manifest order
        master_seed: Seed every entry seed is derived from
        out_dir: When set, images are written to out_dir/images/<maze_id>.png
            and their SHA-256 recorded in the manifest
        max_attempts: Rejection-sampling budget per entry (or per pair)
        render_workers: Threads used for PNG rendering

    Raises:
        AssemblyFailed: If a group cannot meet its constraints
    """
    entries: List[ManifestEntry] = []
    number = 0
    for group in config:
        logger.info(f"Assembling group {group.group_id} ({group.description or 'custom'}): {group.count} mazes")
        for inst, pair_id in _group_instances(group, master_seed, max_attempts):
            number += 1
            maze_id = f"gen_maze_{number:03d}"
            entries.append(ManifestEntry(
                maze_id=maze_id,
                group_id=group.group_id,
                spec=inst.spec,
                image_path=f"images/{maze_id}.png",
                text_grid=export_text_grid(inst.grid),
                annotation=inst.annotation,
                pair_id=pair_id,
            ))

    manifest = Manifest(master_seed=master_seed, entries=tuple(entries))
    if out_dir is not None:
        manifest = rerender_images(manifest, out_dir, workers=render_workers)
        logger.info(f"🖼️  Rendered {len(entries)} images under {Path(out_dir) / 'images'}")
    logger.info(f"✅ Benchmark assembled: {len(entries)} mazes")
    return manifest


def rerender_images(manifest: Manifest, out_dir: Path, workers: int = 4) -> Manifest:
    """Render (or re-render) every entry image and refresh the recorded hashes."""
    out_dir = Path(out_dir)

    def render(entry: ManifestEntry) -> ManifestEntry:
        data = write_png(entry.grid, entry.spec.palette, entry.spec.seed, out_dir / entry.image_path)
        return replace(entry, image_sha256=hashlib.sha256(data).hexdigest())

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return replace(manifest, entries=tuple(pool.map(render, manifest.entries)))


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def atomic_write_text(path: Path, text: str) -> None:
    """Write via a temporary file and os.replace so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_name(path.name + ".tmp")
    try:
        tmp_path.write_text(text, encoding="utf-8")
        os.replace(tmp_path, path)
    except Exception:
        try:
            if tmp_path.exists():
                tmp_path.unlink()
        except OSError:
            pass
        raise


def write_manifest(manifest: Manifest, path: Path) -> None:
    atomic_write_text(Path(path), manifest.to_json() + "\n")
    logger.info(f"Saved manifest ({len(manifest.entries)} entries) to {path}")


def _revalidate(entry: ManifestEntry) -> None:
    try:
        grid = entry.grid
    except MalformedGrid as e:
        raise ManifestCorrupt(f"{entry.maze_id}: bad text grid: {e}") from e
    if (grid.rows, grid.cols) != (entry.spec.rows, entry.spec.cols):
        raise ManifestCorrupt(f"{entry.maze_id}: grid is {grid.rows}x{grid.cols}, spec says {entry.spec.rows}x{entry.spec.cols}")
    if analyze(grid) != entry.annotation:
        raise ManifestCorrupt(f"{entry.maze_id}: stored annotation does not match its grid")


def manifest_from_dict(data: dict) -> Manifest:
    """
    Build and revalidate a manifest from its JSON document.

    Raises:
        ManifestCorrupt: Schema mismatch, duplicate ids, or failed revalidation
    """
    if not isinstance(data, dict) or data.get("version") != MANIFEST_VERSION:
        raise ManifestCorrupt(f"unsupported manifest version: {data.get('version') if isinstance(data, dict) else None}")
    try:
        entries = tuple(ManifestEntry.from_dict(e) for e in data["entries"])
        manifest = Manifest(master_seed=int(data["master_seed"]), entries=entries)
    except (KeyError, TypeError, ValueError) as e:
        raise ManifestCorrupt(f"manifest schema mismatch: {e}") from e

    seen = set()
    for entry in manifest.entries:
        if not MAZE_ID_PATTERN.match(entry.maze_id):
            raise ManifestCorrupt(f"bad maze id {entry.maze_id!r}")
        if entry.maze_id in seen:
            raise ManifestCorrupt(f"duplicate maze id {entry.maze_id}")
        seen.add(entry.maze_id)
        _revalidate(entry)
    return manifest


def load_manifest(path: Path) -> Manifest:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ManifestCorrupt(f"{path}: invalid JSON: {e}") from e
    manifest = manifest_from_dict(data)
    logger.info(f"Loaded manifest with {len(manifest.entries)} entries from {path}")
    return manifest


# ---------------------------------------------------------------------------
# Checks and statistics
# ---------------------------------------------------------------------------

def verify_manifest(manifest: Manifest, oracle_max_cells: int = 49) -> List[str]:
    """
    Independent checks beyond annotation revalidation.

    Reachable entries: every accepted path must simulate to the goal.
    Unreachable entries: confirmed by the brute-force oracle on small grids.

    Returns:
        Human-readable problems (empty when the manifest is sound)
    """
    problems = []
    for entry in manifest.entries:
        grid = entry.grid
        if entry.annotation.reachable:
            for path in entry.annotation.accepted_paths:
                result = simulate_path(grid, path)
                if not result.reaches_goal or result.steps_taken != entry.annotation.shortest_len:
                    problems.append(f"{entry.maze_id}: accepted path fails simulation")
                    break
        elif grid.rows * grid.cols <= oracle_max_cells and brute_force_oracle(grid, oracle_max_cells).reachable:
            problems.append(f"{entry.maze_id}: brute force finds a path in an unreachable maze")
    return problems


def summarize(manifest: Manifest) -> dict:
    """Per-group counts and path-length statistics."""
    lengths = [e.annotation.shortest_len for e in manifest.entries if e.annotation.reachable]
    groups: Dict[str, dict] = {}
    for e in manifest.entries:
        g = groups.setdefault(e.group_id, {"count": 0, "unreachable": 0})
        g["count"] += 1
        g["unreachable"] += 0 if e.annotation.reachable else 1
    core = [e for e in manifest.entries if e.group_id in CORE_GROUPS]
    return {
        "total": len(manifest.entries),
        "groups": groups,
        "core_unreachable": sum(1 for e in core if not e.annotation.reachable),
        "path_length": {
            "min": min(lengths) if lengths else None,
            "max": max(lengths) if lengths else None,
            "mean": round(statistics.mean(lengths), 2) if lengths else None,
            "median": statistics.median(lengths) if lengths else None,
        },
    }
