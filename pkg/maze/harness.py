"""
Evaluation harness: build prompts, send them through adapters, retry
unparseable replies, grade, and collect a canonical run report.
"""
import base64
import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Union

from prometheus_client import Counter, Histogram

from adapters import BaseAdapter, ProviderConfig, ProviderRequest, get_adapter
from adapters.transport import HttpTransport

from .dataset import Manifest, ManifestEntry, atomic_write_text
from .errors import ConfigError, ParseFailure, TransportError
from .grader import GradeMode, SolverResponse, failed_verdict, grade, parse_response, salvage_reachability
from .prompts import PROMPT_VERSION, InputMode, PromptVariant, build_prompt
from .records import RunReport, TokenUsage, TrialRecord, digest_of
from .renderer import render_png

logger = logging.getLogger(__name__)

MAX_PARSE_ATTEMPTS = 3

TRIALS = Counter("mazebench_trials_total", "Completed trials", ["provider", "outcome"])
TRIAL_LATENCY = Histogram(
    "mazebench_trial_latency_seconds", "Wall-clock latency per trial (all attempts)", ["provider"],
    buckets=(0.1, 0.5, 1, 2, 5, 10, 20, 40, 80, 160, 320),
)
TOKENS = Counter("mazebench_tokens_total", "Tokens reported by providers", ["provider", "kind"])
ATTEMPTS = Counter("mazebench_attempts_total", "Requests issued, including parse retries", ["provider"])


@dataclass(frozen=True)
class RunOptions:
    """
    Knobs for one evaluation run.

    clock_factory is called once per trial and must return a monotonic clock;
    injecting a fake one (together with timestamp) makes persisted reports
    byte-identical across runs and concurrency levels.
    """
    concurrency: int = 4
    input_mode: InputMode = InputMode.IMAGE
    prompt_variant: PromptVariant = PromptVariant.STANDARD
    groups: Optional[Sequence[str]] = None
    image_root: Optional[Path] = None
    prompt_template: Optional[str] = None
    manifest_path: Optional[str] = None
    timestamp: Optional[str] = None
    clock_factory: Callable[[], Callable[[], float]] = lambda: time.perf_counter


def load_image_b64(entry: ManifestEntry, image_root: Optional[Path] = None) -> str:
    """Read the entry's PNG from disk, rendering it in memory when absent."""
    data = None
    if image_root is not None:
        path = Path(image_root) / entry.image_path
        if path.exists():
            data = path.read_bytes()
        else:
            logger.debug(f"{path} missing, rendering {entry.maze_id} in memory")
    if data is None:
        data = render_png(entry.grid, entry.spec.palette, entry.spec.seed)
    return base64.b64encode(data).decode("ascii")


def build_request(
    entry: ManifestEntry,
    provider: Union[ProviderConfig, BaseAdapter],
    input_mode: InputMode = InputMode.IMAGE,
    prompt_variant: PromptVariant = PromptVariant.STANDARD,
    image_root: Optional[Path] = None,
    template: Optional[str] = None,
) -> ProviderRequest:
    """
    Build the provider request for one maze.

    Args:
        entry: Manifest entry (image mode needs its image or grid; text mode its text_grid)
        provider: Provider configuration or an already built adapter
        input_mode: image or text-grid
        prompt_variant: standard or visual-intuition
        image_root: Directory the manifest's image paths are relative to
        template: Optional prompt intro override

    Raises:
        UnsupportedCombination: Reasoning setting not available for the adapter kind
    """
    adapter = provider if isinstance(provider, BaseAdapter) else get_adapter(provider)
    input_mode, prompt_variant = InputMode(input_mode), PromptVariant(prompt_variant)

    if input_mode is InputMode.TEXT_GRID:
        prompt = build_prompt(input_mode, prompt_variant, text_grid=entry.text_grid, template=template)
        image_b64 = None
    else:
        prompt = build_prompt(input_mode, prompt_variant, template=template)
        image_b64 = load_image_b64(entry, image_root)

    return ProviderRequest(
        provider=adapter.config,
        url=adapter.endpoint(),
        payload=adapter.build_payload(prompt, image_b64),
        headers={"Content-Type": "application/json"},
        prompt=prompt,
        input_mode=input_mode.value,
        prompt_variant=prompt_variant.value,
        entry=entry,
    )


def solve_one(
    adapter: BaseAdapter,
    entry: ManifestEntry,
    input_mode: InputMode = InputMode.IMAGE,
    prompt_variant: PromptVariant = PromptVariant.STANDARD,
    image_root: Optional[Path] = None,
    template: Optional[str] = None,
    clock: Callable[[], float] = time.perf_counter,
) -> TrialRecord:
    """
    Evaluate one maze with one provider.

    Unparseable replies are re-issued up to twice. Latency covers all
    attempts and token usage is summed across them. A transport failure ends
    the trial as a failure but keeps what earlier attempts reported.
    """
    request = build_request(entry, adapter, input_mode, prompt_variant, image_root, template)
    label = adapter.config.label
    usage = TokenUsage()
    response: Optional[SolverResponse] = None
    failure: Optional[str] = None
    last_text, truncated, attempts = "", False, 0

    started = clock()
    while attempts < MAX_PARSE_ATTEMPTS:
        attempts += 1
        ATTEMPTS.labels(provider=label).inc()
        try:
            reply = adapter.complete(request)
        except TransportError as e:
            failure = f"transport failure: {e}"
            logger.error(f"❌ {label} {entry.maze_id}: {e}")
            break
        usage = usage + reply.usage
        last_text, truncated = reply.text, reply.truncated
        try:
            response = parse_response(reply.text)
            failure = None
            break
        except ParseFailure as e:
            failure = f"parse failure: {e}"
            logger.warning(f"⚠️  {label} {entry.maze_id}: {failure} (attempt {attempts}/{MAX_PARSE_ATTEMPTS})")
    latency = clock() - started

    annotation, grid = entry.annotation, entry.grid
    salvaged = None
    if response is not None:
        verdict = grade(response, annotation, GradeMode.ANNOTATION_MATCH, truncated=truncated)
        simulated = grade(response, annotation, GradeMode.SIMULATE, grid=grid, truncated=truncated)
    else:
        salvaged = salvage_reachability(last_text)
        verdict = failed_verdict(annotation, salvaged, GradeMode.ANNOTATION_MATCH, truncated)
        simulated = failed_verdict(annotation, salvaged, GradeMode.SIMULATE, truncated)

    if usage.missing:
        logger.debug(f"{label} {entry.maze_id}: usage fields missing: {', '.join(usage.missing)}")

    return TrialRecord(
        maze_id=entry.maze_id,
        group_id=entry.group_id,
        provider=label,
        input_mode=request.input_mode,
        prompt_variant=request.prompt_variant,
        attempts=attempts,
        latency_s=latency,
        tokens=usage,
        verdict=verdict,
        simulate_verdict=simulated,
        response=response,
        failure=failure,
        salvaged_reachable=salvaged,
    )


def prepare_adapters(providers: Sequence[ProviderConfig], transport: Optional[HttpTransport] = None) -> List[BaseAdapter]:
    """
    Build and preflight every adapter before any trial runs.

    Raises:
        ConfigError: Duplicate labels or unknown kinds
        UnsupportedCombination: Reasoning setting unavailable
        AuthError: A remote provider's key variable is unset
    """
    if not providers:
        raise ConfigError("No providers configured")
    labels = [p.label for p in providers]
    duplicates = sorted({l for l in labels if labels.count(l) > 1})
    if duplicates:
        raise ConfigError(f"Duplicate provider labels: {', '.join(duplicates)}")

    transport = transport or HttpTransport()
    adapters = []
    for config in providers:
        adapter = get_adapter(config, transport)
        if config.adapter_kind != "local":
            adapter.api_key()
        adapters.append(adapter)
    return adapters


def run_eval(
    manifest: Manifest,
    providers: Sequence[ProviderConfig],
    options: RunOptions = RunOptions(),
    transport: Optional[HttpTransport] = None,
) -> RunReport:
    """
    Evaluate every (maze, provider) pair once under bounded parallelism.

    Individual trial failures are recorded in the report; only configuration
    problems abort the run.

    Args:
        manifest: Validated manifest
        providers: Provider configurations (labels must be unique)
        options: Run options
        transport: Shared transport (a default one is created when omitted)

    Returns:
        RunReport with trials in canonical order
    """
    adapters = prepare_adapters(providers, transport)
    selected = manifest.select_groups(options.groups) if options.groups else manifest
    if not selected.entries:
        raise ConfigError(f"No manifest entries match groups {list(options.groups or [])}")

    total = len(selected.entries) * len(adapters)
    logger.info(f"🚀 Evaluating {len(selected.entries)} mazes x {len(adapters)} providers "
                f"({InputMode(options.input_mode).value}, "
                f"concurrency {options.concurrency})")

    def run_trial(entry: ManifestEntry, adapter: BaseAdapter) -> TrialRecord:
        record = solve_one(adapter, entry, options.input_mode, options.prompt_variant,
                           options.image_root, options.prompt_template, options.clock_factory())
        label = adapter.config.label
        outcome = "solved" if record.verdict.solved else ("failed" if record.failure else "wrong")
        TRIALS.labels(provider=label, outcome=outcome).inc()
        TRIAL_LATENCY.labels(provider=label).observe(record.latency_s)
        for kind in ("input", "thinking", "output"):
            TOKENS.labels(provider=label, kind=kind).inc(getattr(record.tokens, kind))
        return record

    trials: List[TrialRecord] = []
    with ThreadPoolExecutor(max_workers=max(1, options.concurrency)) as pool:
        futures = [pool.submit(run_trial, entry, adapter) for entry in selected.entries for adapter in adapters]
        for done, future in enumerate(as_completed(futures), start=1):
            trials.append(future.result())
            if done % 25 == 0 or done == total:
                logger.info(f"🔄 {done}/{total} trials complete")

    trials.sort(key=lambda t: t.sort_key)
    for adapter in adapters:
        label = adapter.config.label
        solved = sum(1 for t in trials if t.provider == label and t.verdict.solved)
        logger.info(f"✅ {label}: {solved}/{len(selected.entries)} solved")

    return RunReport(
        timestamp=options.timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
        config_digest=digest_of({
            "providers": [p.to_dict() for p in providers],
            "prompt_template": options.prompt_template,
        }),
        manifest_digest=manifest.digest(),
        prompt_version=PROMPT_VERSION,
        manifest_path=options.manifest_path,
        trials=tuple(trials),
    )


def save_report(report: RunReport, path: Path) -> None:
    atomic_write_text(Path(path), report.to_json() + "\n")
    logger.info(f"✅ Run report written to {path} ({len(report.trials)} trials)")


def load_report(path: Path) -> RunReport:
    return RunReport.from_json(Path(path).read_text(encoding="utf-8"))
