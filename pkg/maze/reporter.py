"""
Metrics and tables computed from run reports.

Raw values are kept in MetricsRow; rounding happens only when a table is
rendered (tokens per solve and percentages to integers, latency to one
decimal, half-up).
"""
import csv
import io
import json
import statistics
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Dict, List, Optional, Sequence, Tuple

from .dataset import CORE_GROUPS, Manifest
from .errors import InconsistentReport
from .records import RunReport, TrialRecord

MISSING = "—"
TRUNCATED_MARK = "△"
TABLE_KINDS = ("leaderboard", "per_group", "efficiency", "ultra_hard", "ablation")
FORMATS = ("markdown", "csv", "json")


@dataclass(frozen=True)
class MetricsRow:
    provider: str
    solved: int
    total: int
    reach_accuracy: float
    false_positive_rate: Optional[float]
    avg_latency_s: float
    total_tokens: int
    tokens_per_solve: Optional[float]
    per_group_solves: Dict[str, int] = field(default_factory=dict)
    input_mode: str = "image"
    prompt_variant: str = "standard"
    median_latency_s: float = 0.0
    input_tokens: int = 0
    thinking_tokens: int = 0
    output_tokens: int = 0
    simulate_solved: int = 0
    usage_missing_trials: int = 0

    @property
    def row_key(self) -> Tuple[str, str, str]:
        return (self.provider, self.input_mode, self.prompt_variant)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class UltraHardRow:
    maze_id: str
    provider: str
    gt_reachable: bool
    gt_length: Optional[int]
    pred_reachable: Optional[bool]
    pred_length: Optional[int]
    solved: bool
    truncated_correct_reach: bool
    latency_s: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check_trials(report: RunReport, manifest: Manifest) -> None:
    known = manifest.by_id()
    seen = set()
    for trial in report.trials:
        if trial.maze_id not in known:
            raise InconsistentReport(f"trial references unknown maze {trial.maze_id}")
        if known[trial.maze_id].group_id != trial.group_id:
            raise InconsistentReport(f"{trial.maze_id}: group {trial.group_id} disagrees with the manifest")
        key = (trial.maze_id,) + trial.sort_key[1:]
        if key in seen:
            raise InconsistentReport(f"duplicate trial for {key}")
        seen.add(key)


def _claimed_reachable(trial: TrialRecord) -> Optional[bool]:
    if trial.response is not None:
        return trial.response.reachable
    return trial.salvaged_reachable


def _row(key: Tuple[str, str, str], trials: List[TrialRecord], manifest: Manifest, groups: Sequence[str]) -> MetricsRow:
    by_id = manifest.by_id()
    solved = sum(1 for t in trials if t.verdict.solved)
    reach = sum(1 for t in trials if t.verdict.reach_correct)
    unreachable = [t for t in trials if not by_id[t.maze_id].annotation.reachable]
    false_positives = sum(1 for t in unreachable if _claimed_reachable(t))
    latencies = [t.latency_s for t in trials]
    thinking = sum(t.tokens.thinking for t in trials)
    output = sum(t.tokens.output for t in trials)
    total_tokens = thinking + output

    per_group = {g: 0 for g in groups}
    for t in trials:
        if t.verdict.solved and t.group_id in per_group:
            per_group[t.group_id] += 1

    return MetricsRow(
        provider=key[0],
        input_mode=key[1],
        prompt_variant=key[2],
        solved=solved,
        total=len(trials),
        reach_accuracy=100.0 * reach / len(trials),
        false_positive_rate=100.0 * false_positives / len(unreachable) if unreachable else None,
        avg_latency_s=statistics.mean(latencies),
        median_latency_s=statistics.median(latencies),
        total_tokens=total_tokens,
        tokens_per_solve=total_tokens / solved if solved else None,
        per_group_solves=per_group,
        input_tokens=sum(t.tokens.input for t in trials),
        thinking_tokens=thinking,
        output_tokens=output,
        simulate_solved=sum(1 for t in trials if t.simulate_verdict.solved),
        usage_missing_trials=sum(1 for t in trials if t.tokens.missing),
    )


def compute_metrics(report: RunReport, manifest: Manifest, core_only: bool = True) -> List[MetricsRow]:
    """
    Aggregate trials into one row per (provider, input mode, prompt variant).

    Args:
        report: Run report
        manifest: Manifest the run was evaluated on
        core_only: Restrict to groups A-H (the ultra-hard group is reported separately)

    Raises:
        InconsistentReport: A trial references a maze the manifest does not have
    """
    _check_trials(report, manifest)
    if core_only:
        groups = list(CORE_GROUPS)
    else:
        groups = sorted({e.group_id for e in manifest.entries})

    buckets: Dict[Tuple[str, str, str], List[TrialRecord]] = defaultdict(list)
    for trial in report.trials:
        if trial.group_id in groups:
            buckets[(trial.provider, trial.input_mode, trial.prompt_variant)].append(trial)
    return [_row(key, buckets[key], manifest, groups) for key in sorted(buckets)]


def compute_ultra_hard(report: RunReport, manifest: Manifest, group_id: str = "X") -> List[UltraHardRow]:
    """Per-maze rows for the ultra-hard group."""
    _check_trials(report, manifest)
    by_id = manifest.by_id()
    rows = []
    for t in report.trials:
        if t.group_id != group_id:
            continue
        annotation = by_id[t.maze_id].annotation
        resp = t.response
        pred_length = None
        if resp is not None and resp.reachable:
            pred_length = resp.path_length if resp.path_length is not None else (len(resp.path) if resp.path else None)
        rows.append(UltraHardRow(
            maze_id=t.maze_id,
            provider=t.provider,
            gt_reachable=annotation.reachable,
            gt_length=annotation.shortest_len,
            pred_reachable=_claimed_reachable(t),
            pred_length=pred_length,
            solved=t.verdict.solved,
            truncated_correct_reach=t.verdict.truncated_output and t.verdict.reach_correct,
            latency_s=t.latency_s,
        ))
    rows.sort(key=lambda r: (r.provider, r.maze_id))
    return rows


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def round_half_up(value: float, digits: int = 0) -> Decimal:
    quantum = Decimal(1).scaleb(-digits)
    return Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP)


def _int(value: Optional[float]) -> str:
    return MISSING if value is None else str(int(round_half_up(value)))


def _latency(value: float) -> str:
    return str(round_half_up(value, 1))


def _tokens(value: int) -> str:
    return str(value)


def _label(row: MetricsRow) -> str:
    extras = [x for x in (row.input_mode if row.input_mode != "image" else "",
                          row.prompt_variant if row.prompt_variant != "standard" else "") if x]
    return f"{row.provider} [{', '.join(extras)}]" if extras else row.provider


def _mark(value: Optional[bool]) -> str:
    if value is None:
        return MISSING
    return "✓" if value else "✗"


def _table(kind: str, rows: Sequence) -> Tuple[List[str], List[List[str]]]:
    if kind == "leaderboard":
        ordered = sorted(rows, key=lambda r: (-r.solved, r.row_key))
        header = ["Model", "Solved", "Reach%", "FP%", "Lat.(s)"]
        body = [[_label(r), f"{r.solved}/{r.total}", _int(r.reach_accuracy), _int(r.false_positive_rate),
                 _latency(r.avg_latency_s)] for r in ordered]
        return header, body

    if kind == "per_group":
        groups = sorted({g for r in rows for g in r.per_group_solves})
        ordered = sorted(rows, key=lambda r: (-r.solved, r.row_key))
        header = ["Model"] + groups + ["Total"]
        body = [[_label(r)] + [str(r.per_group_solves.get(g, 0)) for g in groups]
                + [str(sum(r.per_group_solves.values()))] for r in ordered]
        return header, body

    if kind == "efficiency":
        ordered = sorted(rows, key=lambda r: (-r.solved, r.row_key))
        header = ["Model", "Solved", "Tot.Tok.", "Tok/Solve"]
        body = [[_label(r), str(r.solved), _tokens(r.total_tokens), _int(r.tokens_per_solve)] for r in ordered]
        return header, body

    if kind == "ablation":
        ordered = sorted(rows, key=lambda r: r.row_key)
        header = ["Model", "Input", "Prompt", "Solved", "Tok/Solve", "Lat.(s)"]
        body = [[r.provider, r.input_mode, r.prompt_variant, f"{r.solved}/{r.total}", _int(r.tokens_per_solve),
                 _latency(r.avg_latency_s)] for r in ordered]
        return header, body

    if kind == "ultra_hard":
        header = ["Model", "Maze", "GT", "Pred.", "Path", "Solved", "Lat.(s)"]
        body = []
        for r in rows:
            if r.gt_reachable:
                path = f"{r.gt_length} -> {MISSING if r.pred_length is None else r.pred_length}"
            else:
                path = MISSING
            if r.solved:
                status = "✓"
            elif r.truncated_correct_reach:
                status = TRUNCATED_MARK
            else:
                status = ""
            body.append([r.provider, r.maze_id, _mark(r.gt_reachable), _mark(r.pred_reachable), path, status,
                         _latency(r.latency_s)])
        for provider in sorted({r.provider for r in rows}):
            mine = [r for r in rows if r.provider == provider]
            body.append([provider, "Total solved", "", "", "", f"{sum(r.solved for r in mine)}/{len(mine)}",
                         _latency(statistics.mean(r.latency_s for r in mine))])
        return header, body

    raise ValueError(f"Unsupported table kind: {kind}. Supported kinds: {', '.join(TABLE_KINDS)}")


def emit_tables(rows: Sequence, format: str = "markdown", kind: str = "leaderboard") -> str:
    """
    Render rows as a markdown, CSV or JSON table.

    Args:
        rows: MetricsRow list (UltraHardRow list for kind="ultra_hard")
        format: markdown | csv | json
        kind: leaderboard | per_group | efficiency | ultra_hard | ablation

    Returns:
        Table text; JSON carries raw, unrounded values
    """
    if not rows:
        raise ValueError("no rows to emit")
    if format not in FORMATS:
        raise ValueError(f"Unsupported format: {format}. Supported formats: {', '.join(FORMATS)}")

    header, body = _table(kind, rows)

    if format == "json":
        return json.dumps({"kind": kind, "rows": [r.to_dict() for r in rows]}, indent=2, ensure_ascii=False)

    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buf.getvalue()

    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(cells) + " |" for cells in body]
    return "\n".join(lines) + "\n"


def build_summary(report: RunReport, manifest: Manifest) -> dict:
    """Every table's raw rows in one JSON-ready document."""
    core = compute_metrics(report, manifest, core_only=True)
    everything = compute_metrics(report, manifest, core_only=False)
    return {
        "metadata": report.to_dict()["metadata"],
        "core": [r.to_dict() for r in core],
        "all_groups": [r.to_dict() for r in everything],
        "ultra_hard": [r.to_dict() for r in compute_ultra_hard(report, manifest)],
    }


def render_report(report: RunReport, manifest: Manifest, kind: str, format: str) -> str:
    """Compute the rows a table kind needs and render them."""
    if kind == "summary":
        return json.dumps(build_summary(report, manifest), indent=2, ensure_ascii=False)
    if kind == "ultra_hard":
        rows = compute_ultra_hard(report, manifest)
        if not rows:
            raise InconsistentReport("report has no ultra-hard trials")
        return emit_tables(rows, format, kind)
    return emit_tables(compute_metrics(report, manifest, core_only=True), format, kind)
