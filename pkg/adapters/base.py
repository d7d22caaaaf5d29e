"""
Base adapter abstract class for solver providers.
"""
import logging
import os
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, FrozenSet, Optional

from maze.errors import AuthError, ConfigError, TransportError, UnsupportedCombination
from maze.records import TokenUsage

ADAPTER_KINDS = ("responses-api", "messages-api", "gemini-rest", "dashscope", "local")
REASONING_LEVELS = ("none", "low", "medium", "default")

DEFAULT_API_BASES = {
    "responses-api": "https://api.openai.com/v1",
    "messages-api": "https://api.anthropic.com",
    "gemini-rest": "https://generativelanguage.googleapis.com",
    "dashscope": "https://dashscope-intl.aliyuncs.com/compatible-mode/v1",
    "local": "",
}

DEFAULT_KEY_ENV_VARS = {
    "responses-api": "OPENAI_API_KEY",
    "messages-api": "ANTHROPIC_API_KEY",
    "gemini-rest": "GEMINI_API_KEY",
    "dashscope": "DASHSCOPE_API_KEY",
    "local": "",
}

DEFAULT_THINKING_BUDGETS = {"low": 1024, "medium": 4096}


@dataclass(frozen=True)
class ProviderConfig:
    """
    One evaluated configuration (model + reasoning setting).

    Temperature follows the reasoning setting: configurations without
    reasoning run at 0.0, messages-api with thinking enabled runs at 1.0.
    """
    adapter_kind: str
    model_id: str
    reasoning: str = "default"
    max_output_tokens: int = 8192
    temperature: Optional[float] = None
    api_base: Optional[str] = None
    key_env_var: Optional[str] = None
    label: Optional[str] = None
    thinking_budget: Optional[int] = None
    requests_per_minute: float = 60.0
    timeout_s: float = 300.0
    max_transport_retries: int = 4
    backoff_base_s: float = 1.0
    backoff_cap_s: float = 30.0

    def __post_init__(self):
        if self.adapter_kind not in ADAPTER_KINDS:
            raise ConfigError(
                f"Unsupported adapter kind: {self.adapter_kind}. Supported kinds: {', '.join(ADAPTER_KINDS)}"
            )
        if self.reasoning not in REASONING_LEVELS:
            raise ConfigError(f"reasoning must be one of {', '.join(REASONING_LEVELS)}, got {self.reasoning!r}")
        if not self.model_id:
            raise ConfigError("model_id is required")
        if self.max_output_tokens < 1:
            raise ConfigError("max_output_tokens must be positive")
        if self.requests_per_minute <= 0:
            raise ConfigError("requests_per_minute must be positive")

        if self.api_base is None:
            object.__setattr__(self, "api_base", DEFAULT_API_BASES[self.adapter_kind])
        if self.key_env_var is None:
            object.__setattr__(self, "key_env_var", DEFAULT_KEY_ENV_VARS[self.adapter_kind])
        if self.label is None:
            suffix = "" if self.reasoning == "default" else f" ({self.reasoning})"
            object.__setattr__(self, "label", f"{self.model_id}{suffix}")

        if self.adapter_kind == "messages-api" and self.reasoning != "none":
            object.__setattr__(self, "temperature", 1.0)
        elif self.reasoning == "none":
            object.__setattr__(self, "temperature", 0.0)

    @property
    def effective_thinking_budget(self) -> Optional[int]:
        if self.reasoning not in DEFAULT_THINKING_BUDGETS:
            return None
        return self.thinking_budget or DEFAULT_THINKING_BUDGETS[self.reasoning]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict, defaults: Optional[dict] = None) -> "ProviderConfig":
        merged = dict(defaults or {})
        merged.update(data)
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(merged) - known)
        if unknown:
            raise ConfigError(f"Unknown provider fields: {', '.join(unknown)}")
        try:
            return cls(**merged)
        except TypeError as e:
            raise ConfigError(f"Invalid provider entry {data!r}: {e}") from e


@dataclass(frozen=True)
class ProviderRequest:
    """A fully built request; headers never carry the secret until send time."""
    provider: ProviderConfig
    url: str
    payload: Dict[str, Any]
    headers: Dict[str, str] = field(default_factory=dict)
    prompt: str = ""
    input_mode: str = "image"
    prompt_variant: str = "standard"
    # Local solvers answer from the manifest entry instead of the payload.
    entry: Any = None


@dataclass(frozen=True)
class AdapterReply:
    text: str
    usage: TokenUsage = TokenUsage()
    truncated: bool = False


class BaseAdapter(ABC):
    """
    Abstract base class for all solver adapters.
    Each provider adapter must implement build_payload() and parse_reply().
    """

    # Reasoning settings the provider accepts.
    supported_reasoning: FrozenSet[str] = frozenset(REASONING_LEVELS)

    def __init__(self, config: ProviderConfig, transport=None):
        """
        Initialize adapter with its provider configuration.

        Args:
            config: Provider configuration
            transport: HttpTransport used to send requests (local adapters need none)
        """
        self.config = config
        self.transport = transport
        self.logger = logging.getLogger(self.__class__.__name__)
        self.check_reasoning()

    def check_reasoning(self) -> None:
        if self.config.reasoning not in self.supported_reasoning:
            raise UnsupportedCombination(
                f"{self.config.adapter_kind} does not support reasoning={self.config.reasoning} "
                f"(supported: {', '.join(sorted(self.supported_reasoning))})"
            )

    @abstractmethod
    def endpoint(self) -> str:
        """Full URL the request is POSTed to."""

    @abstractmethod
    def build_payload(self, prompt: str, image_b64: Optional[str]) -> Dict[str, Any]:
        """
        Build the provider-specific JSON body.

        Args:
            prompt: Prompt text
            image_b64: Base64 PNG, or None in text-grid mode

        Returns:
            JSON-serializable request body (never carries tools)
        """

    @abstractmethod
    def parse_reply(self, body: Dict[str, Any]) -> AdapterReply:
        """Extract text, token usage and truncation from a provider reply."""

    def auth_headers(self) -> Dict[str, str]:
        return {}

    def api_key(self) -> str:
        key = os.environ.get(self.config.key_env_var or "")
        if not key:
            raise AuthError(f"Environment variable {self.config.key_env_var} is not set for {self.config.label}")
        return key

    def complete(self, request: ProviderRequest) -> AdapterReply:
        """
        Send a request and parse the reply.

        Raises:
            TransportError: Network or HTTP failure after bounded retries
            AuthError: Credentials missing or rejected
        """
        if self.transport is None:
            raise TransportError(f"No transport configured for {self.config.label}")
        headers = dict(request.headers)
        headers.update(self.auth_headers())
        body = self.transport.post_json(request.url, request.payload, headers, self.config)
        try:
            return self.parse_reply(body)
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise TransportError(f"Malformed reply from {self.config.label}: {e}") from e

    def safe_complete(self, request: ProviderRequest) -> Optional[AdapterReply]:
        """
        Safe wrapper around complete() that never raises transport errors.

        Returns:
            Reply, or None if the request failed
        """
        try:
            return self.complete(request)
        except TransportError as e:
            self.logger.error(f"Request failed for {self.config.label}: {e}")
            return None


def usage_field(container: Optional[dict], key: str, missing: list) -> int:
    """Read an integer usage count; absent fields are recorded as zero and flagged."""
    if not isinstance(container, dict) or not isinstance(container.get(key), int):
        missing.append(key)
        return 0
    return container[key]
