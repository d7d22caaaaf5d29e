"""
Evaluation records: token usage, per-maze trials and persisted run reports.
"""
import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .grader import SolverResponse, Verdict


@dataclass(frozen=True)
class TokenUsage:
    input: int = 0
    thinking: int = 0
    output: int = 0
    # Usage fields the provider did not report (recorded as zero, never estimated).
    missing: Tuple[str, ...] = ()

    @property
    def total(self) -> int:
        return self.input + self.thinking + self.output

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        missing = tuple(sorted(set(self.missing) | set(other.missing)))
        return TokenUsage(self.input + other.input, self.thinking + other.thinking, self.output + other.output, missing)

    def to_dict(self) -> dict:
        return {"input": self.input, "thinking": self.thinking, "output": self.output,
                "total": self.total, "missing": list(self.missing)}

    @classmethod
    def from_dict(cls, data: dict) -> "TokenUsage":
        return cls(int(data.get("input", 0)), int(data.get("thinking", 0)), int(data.get("output", 0)),
                   tuple(data.get("missing", ())))


@dataclass(frozen=True)
class TrialRecord:
    maze_id: str
    group_id: str
    provider: str
    input_mode: str
    prompt_variant: str
    attempts: int
    latency_s: float
    tokens: TokenUsage
    verdict: Verdict
    simulate_verdict: Verdict
    response: Optional[SolverResponse] = None
    failure: Optional[str] = None
    # reachability read from an unparseable reply
    salvaged_reachable: Optional[bool] = None

    def __post_init__(self):
        if not 1 <= self.attempts <= 3:
            raise ValueError(f"attempts must be within 1..3, got {self.attempts}")

    @property
    def sort_key(self):
        return (self.maze_id, self.provider, self.input_mode, self.prompt_variant)

    def to_dict(self) -> dict:
        return {
            "maze_id": self.maze_id,
            "group_id": self.group_id,
            "provider": self.provider,
            "input_mode": self.input_mode,
            "prompt_variant": self.prompt_variant,
            "attempts": self.attempts,
            "latency_s": round(self.latency_s, 6),
            "tokens": self.tokens.to_dict(),
            "response": self.response.to_dict() if self.response else None,
            "failure": self.failure,
            "salvaged_reachable": self.salvaged_reachable,
            "verdict": self.verdict.to_dict(),
            "simulate_verdict": self.simulate_verdict.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrialRecord":
        return cls(
            maze_id=data["maze_id"],
            group_id=data["group_id"],
            provider=data["provider"],
            input_mode=data["input_mode"],
            prompt_variant=data["prompt_variant"],
            attempts=int(data["attempts"]),
            latency_s=float(data["latency_s"]),
            tokens=TokenUsage.from_dict(data["tokens"]),
            verdict=Verdict.from_dict(data["verdict"]),
            simulate_verdict=Verdict.from_dict(data["simulate_verdict"]),
            response=SolverResponse.from_dict(data["response"]) if data.get("response") else None,
            failure=data.get("failure"),
            salvaged_reachable=data.get("salvaged_reachable"),
        )


@dataclass(frozen=True)
class RunReport:
    timestamp: str
    config_digest: str
    manifest_digest: str
    prompt_version: str
    manifest_path: Optional[str] = None
    trials: Tuple[TrialRecord, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "metadata": {
                "timestamp": self.timestamp,
                "config_digest": self.config_digest,
                "manifest_digest": self.manifest_digest,
                "prompt_version": self.prompt_version,
                "manifest_path": self.manifest_path,
            },
            "trials": [t.to_dict() for t in self.trials],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        meta = data["metadata"]
        trials = sorted((TrialRecord.from_dict(t) for t in data["trials"]), key=lambda t: t.sort_key)
        return cls(
            timestamp=meta["timestamp"],
            config_digest=meta["config_digest"],
            manifest_digest=meta["manifest_digest"],
            prompt_version=meta["prompt_version"],
            manifest_path=meta.get("manifest_path"),
            trials=tuple(trials),
        )

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))


def digest_of(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode("utf-8")).hexdigest()
