import itertools

import pytest

from adapters import AdapterReply, BaseAdapter, ProviderConfig, get_adapter
from adapters.transport import HttpTransport
from maze.errors import AuthError, ConfigError, TransportError, UnsupportedCombination
from maze.grid import export_text_grid
from maze.harness import RunOptions, build_request, prepare_adapters, run_eval, solve_one
from maze.prompts import NO_TOOLS_CLAUSE, VISUAL_INTUITION_CLAUSE, InputMode, PromptVariant
from maze.records import RunReport, TokenUsage

REMOTE_KINDS = ("responses-api", "messages-api", "gemini-rest", "dashscope")


def local(model: str) -> ProviderConfig:
    return ProviderConfig(adapter_kind="local", model_id=model)


def fast_transport() -> HttpTransport:
    return HttpTransport(sleep=lambda s: None)


def mock_config(server, kind: str, model: str = "mock-model", **extra) -> ProviderConfig:
    if kind == "messages-api":
        extra.setdefault("reasoning", "none")
    return ProviderConfig(adapter_kind=kind, model_id=model, api_base=server.api_base(kind),
                          key_env_var="MOCK_API_KEY", requests_per_minute=60000, timeout_s=30, **extra)


def counting_clock_factory():
    """Each trial gets its own clock ticking one second per call."""
    def factory():
        ticks = itertools.count()
        return lambda: float(next(ticks))
    return factory


class ScriptedAdapter(BaseAdapter):
    """Replies from a fixed list, one per call."""

    def __init__(self, replies):
        super().__init__(ProviderConfig(adapter_kind="local", model_id="scripted"))
        self.replies = list(replies)
        self.calls = 0

    def endpoint(self):
        return "local://scripted"

    def build_payload(self, prompt, image_b64):
        return {"prompt": prompt}

    def parse_reply(self, body):
        return AdapterReply(text=body["text"], usage=TokenUsage(10, 0, 5))

    def complete(self, request):
        text = self.replies[min(self.calls, len(self.replies) - 1)]
        self.calls += 1
        return self.parse_reply({"text": text})


def oracle_text(entry) -> str:
    from adapters.local import oracle_answer
    return oracle_answer(entry)


@pytest.mark.parametrize("kind", ["responses-api", "dashscope"])
def test_image_request_carries_data_url(small_manifest, kind):
    entry = small_manifest.entries[0]
    request = build_request(entry, ProviderConfig(adapter_kind=kind, model_id="m"))
    assert "data:image/png;base64," in str(request.payload)
    assert "tools" not in request.payload
    assert NO_TOOLS_CLAUSE in request.prompt


@pytest.mark.parametrize("kind", REMOTE_KINDS)
def test_text_request_embeds_exact_grid(small_manifest, kind):
    entry = small_manifest.entries[1]
    request = build_request(entry, ProviderConfig(adapter_kind=kind, model_id="m"), InputMode.TEXT_GRID)
    assert export_text_grid(entry.grid) in request.prompt
    assert "data:image" not in str(request.payload)
    assert "inline_data" not in str(request.payload)
    assert request.input_mode == "text-grid"


def test_visual_intuition_clause(small_manifest):
    entry = small_manifest.entries[0]
    config = ProviderConfig(adapter_kind="messages-api", model_id="m")
    plain = build_request(entry, config)
    visual = build_request(entry, config, prompt_variant=PromptVariant.VISUAL_INTUITION)
    assert VISUAL_INTUITION_CLAUSE not in plain.prompt
    assert VISUAL_INTUITION_CLAUSE in visual.prompt


@pytest.mark.parametrize("kind, reasoning", [("gemini-rest", "medium"), ("dashscope", "low"), ("messages-api", "default")])
def test_unsupported_reasoning(kind, reasoning):
    with pytest.raises(UnsupportedCombination):
        get_adapter(ProviderConfig(adapter_kind=kind, model_id="m", reasoning=reasoning))


def test_temperature_follows_reasoning():
    assert ProviderConfig(adapter_kind="responses-api", model_id="m", reasoning="none").temperature == 0.0
    assert ProviderConfig(adapter_kind="messages-api", model_id="m", reasoning="low").temperature == 1.0
    assert ProviderConfig(adapter_kind="responses-api", model_id="m", reasoning="medium").temperature is None


def test_labels_and_duplicates():
    assert ProviderConfig(adapter_kind="responses-api", model_id="m", reasoning="low").label == "m (low)"
    with pytest.raises(ConfigError):
        prepare_adapters([local("oracle"), local("oracle")])
    with pytest.raises(ConfigError):
        prepare_adapters([])


def test_unknown_kind_lists_supported():
    with pytest.raises(ConfigError, match="local"):
        ProviderConfig(adapter_kind="telnet", model_id="m")


def test_parse_retries_until_valid(small_manifest):
    entry = small_manifest.entries[0]
    adapter = ScriptedAdapter(["not json", "still {not json", oracle_text(entry)])
    record = solve_one(adapter, entry, InputMode.TEXT_GRID)
    assert record.attempts == 3
    assert record.verdict.solved
    assert record.failure is None
    assert record.tokens == TokenUsage(30, 0, 15)


def test_parse_retries_exhausted(small_manifest):
    entry = small_manifest.entries[0]
    adapter = ScriptedAdapter(["no answer"])
    record = solve_one(adapter, entry, InputMode.TEXT_GRID)
    assert adapter.calls == 3
    assert record.attempts == 3
    assert not record.verdict.solved
    assert record.failure.startswith("parse failure")


@pytest.mark.parametrize("mode", [InputMode.IMAGE, InputMode.TEXT_GRID])
def test_oracle_solves_everything(small_manifest, mode):
    report = run_eval(small_manifest, [local("oracle")], RunOptions(input_mode=mode, concurrency=2))
    assert len(report.trials) == len(small_manifest.entries)
    assert all(t.verdict.solved for t in report.trials)
    assert all(t.simulate_verdict.solved for t in report.trials)


def test_naive_never_solves_unreachable(small_manifest):
    report = run_eval(small_manifest, [local("naive")], RunOptions(input_mode=InputMode.TEXT_GRID))
    by_id = small_manifest.by_id()
    unreachable = [t for t in report.trials if not by_id[t.maze_id].annotation.reachable]
    assert unreachable
    assert not any(t.verdict.solved for t in unreachable)


def test_groups_filter(small_manifest):
    report = run_eval(small_manifest, [local("oracle")], RunOptions(input_mode=InputMode.TEXT_GRID, groups=["D"]))
    assert {t.group_id for t in report.trials} == {"D"}
    with pytest.raises(ConfigError):
        run_eval(small_manifest, [local("oracle")], RunOptions(groups=["Q"]))


def test_report_is_independent_of_concurrency(small_manifest):
    providers = [local("oracle"), local("naive"), local("random-walk")]
    texts = []
    for concurrency in (1, 8):
        options = RunOptions(concurrency=concurrency, input_mode=InputMode.TEXT_GRID,
                             timestamp="2026-01-01T00:00:00+00:00", clock_factory=counting_clock_factory())
        texts.append(run_eval(small_manifest, providers, options).to_json())
    assert texts[0] == texts[1]
    report = RunReport.from_json(texts[0])
    assert [t.sort_key for t in report.trials] == sorted(t.sort_key for t in report.trials)
    assert all(t.latency_s == 1.0 for t in report.trials)


@pytest.mark.parametrize("kind", REMOTE_KINDS)
def test_mock_round_trip_image(mock_provider, small_manifest, kind):
    config = mock_config(mock_provider, kind)
    report = run_eval(small_manifest, [config], RunOptions(concurrency=4), transport=fast_transport())
    assert all(t.verdict.solved for t in report.trials), [t.failure for t in report.trials]
    assert all(t.tokens.input > 1000 for t in report.trials)
    assert all("tools" not in r["payload"] for r in mock_provider.registry.requests)


@pytest.mark.parametrize("kind", REMOTE_KINDS)
def test_mock_round_trip_text(mock_provider, small_manifest, kind):
    config = mock_config(mock_provider, kind)
    options = RunOptions(input_mode=InputMode.TEXT_GRID)
    report = run_eval(small_manifest, [config], options, transport=fast_transport())
    assert all(t.verdict.solved for t in report.trials)


def test_transport_retries_are_invisible_to_trials(mock_provider, small_manifest):
    mock_provider.registry.configure("flaky", http_error_first=2)
    config = mock_config(mock_provider, "dashscope", "flaky")
    report = run_eval(small_manifest, [config], RunOptions(input_mode=InputMode.TEXT_GRID), transport=fast_transport())
    assert all(t.verdict.solved and t.attempts == 1 for t in report.trials)


def test_persistent_http_errors_are_recorded(mock_provider, small_manifest):
    mock_provider.registry.configure("down", http_error_first=100)
    config = mock_config(mock_provider, "gemini-rest", "down", max_transport_retries=1)
    report = run_eval(small_manifest, [config], RunOptions(input_mode=InputMode.TEXT_GRID), transport=fast_transport())
    assert len(report.trials) == len(small_manifest.entries)
    assert all(t.failure.startswith("transport failure") for t in report.trials)
    assert not any(t.verdict.solved for t in report.trials)


def test_parse_failures_then_success(mock_provider, small_manifest):
    mock_provider.registry.configure("shy", fail_parse_first=2)
    config = mock_config(mock_provider, "responses-api", "shy")
    report = run_eval(small_manifest, [config], RunOptions(input_mode=InputMode.TEXT_GRID), transport=fast_transport())
    assert all(t.attempts == 3 and t.verdict.solved for t in report.trials)


def test_truncated_replies_keep_reachability(mock_provider, small_manifest):
    mock_provider.registry.configure("long", truncate=True)
    config = mock_config(mock_provider, "messages-api", "long", reasoning="low")
    by_id = small_manifest.by_id()
    report = run_eval(small_manifest, [config], RunOptions(input_mode=InputMode.TEXT_GRID), transport=fast_transport())
    for trial in report.trials:
        assert not trial.verdict.solved
        assert trial.verdict.truncated_output
        assert trial.verdict.reach_correct
        assert trial.response is None
        assert trial.salvaged_reachable == by_id[trial.maze_id].annotation.reachable


def test_missing_key_aborts_before_any_request(mock_provider, small_manifest, monkeypatch):
    monkeypatch.delenv("MOCK_API_KEY")
    with pytest.raises(AuthError):
        run_eval(small_manifest, [mock_config(mock_provider, "responses-api")], transport=fast_transport())
    assert mock_provider.registry.requests == []


class DownTransport:
    def post_json(self, url, payload, headers, config):
        raise TransportError("connection refused")


def test_safe_complete_swallows_transport_errors(small_manifest, monkeypatch):
    monkeypatch.setenv("DASHSCOPE_API_KEY", "k")
    adapter = get_adapter(ProviderConfig(adapter_kind="dashscope", model_id="m"), DownTransport())
    request = build_request(small_manifest.entries[0], adapter, InputMode.TEXT_GRID)
    assert adapter.safe_complete(request) is None
    with pytest.raises(TransportError):
        adapter.complete(request)


def test_missing_usage_is_flagged_not_estimated():
    adapter = get_adapter(ProviderConfig(adapter_kind="gemini-rest", model_id="m"))
    reply = adapter.parse_reply({"candidates": [{"content": {"parts": [{"text": "{}"}]}, "finishReason": "STOP"}]})
    assert reply.usage.total == 0
    assert set(reply.usage.missing) == {"promptTokenCount", "thoughtsTokenCount", "candidatesTokenCount"}


def test_responses_usage_splits_reasoning():
    adapter = get_adapter(ProviderConfig(adapter_kind="responses-api", model_id="m", reasoning="medium"))
    reply = adapter.parse_reply({
        "status": "incomplete", "incomplete_details": {"reason": "max_output_tokens"},
        "output_text": '{"reachable": tr',
        "usage": {"input_tokens": 900, "output_tokens": 500, "output_tokens_details": {"reasoning_tokens": 400}},
    })
    assert reply.usage == TokenUsage(900, 400, 100)
    assert reply.truncated


class FailingAfterReplyAdapter(ScriptedAdapter):
    """One unparseable reply with usage, then a transport failure."""

    def complete(self, request):
        self.calls += 1
        if self.calls == 1:
            return AdapterReply(text="not json", usage=TokenUsage(1000, 500, 200))
        raise TransportError("HTTP 503 after retries")


def test_transport_failure_keeps_earlier_attempts(small_manifest):
    entry = small_manifest.entries[0]
    ticks = itertools.count()
    record = solve_one(FailingAfterReplyAdapter([]), entry, InputMode.TEXT_GRID, clock=lambda: float(next(ticks)))
    assert record.attempts == 2
    assert record.tokens == TokenUsage(1000, 500, 200)
    assert record.tokens.total == 1700
    assert record.latency_s == 1.0
    assert record.failure == "transport failure: HTTP 503 after retries"
    assert not record.verdict.solved


def test_mock_report_is_independent_of_concurrency(mock_provider, small_manifest):
    providers = [mock_config(mock_provider, "responses-api", "steady-a"),
                 mock_config(mock_provider, "gemini-rest", "steady-b")]
    texts = []
    for concurrency in (1, 8):
        mock_provider.registry.reset()
        for model in ("steady-a", "steady-b"):
            mock_provider.registry.configure(model, fail_parse_first=1)
        options = RunOptions(concurrency=concurrency, timestamp="2026-01-01T00:00:00+00:00",
                             clock_factory=counting_clock_factory())
        texts.append(run_eval(small_manifest, providers, options, transport=fast_transport()).to_json())
    assert texts[0] == texts[1]
    trials = RunReport.from_json(texts[0]).trials
    assert all(t.attempts == 2 and t.verdict.solved for t in trials)
