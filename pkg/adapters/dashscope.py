"""
DashScope adapter (OpenAI-compatible chat completions endpoint).
"""
from typing import Any, Dict, Optional

from .base import AdapterReply, BaseAdapter, usage_field
from maze.records import TokenUsage


class DashScopeAdapter(BaseAdapter):
    """Models behind this endpoint reason by default; no effort control is exposed."""

    supported_reasoning = frozenset({"default"})

    def endpoint(self) -> str:
        return f"{self.config.api_base.rstrip('/')}/chat/completions"

    def auth_headers(self) -> Dict[str, str]:
        return {"Authorization": f"Bearer {self.api_key()}"}

    def build_payload(self, prompt: str, image_b64: Optional[str]) -> Dict[str, Any]:
        content: list = []
        if image_b64 is not None:
            content.append({"type": "image_url", "image_url": {"url": f"data:image/png;base64,{image_b64}"}})
        content.append({"type": "text", "text": prompt})
        payload: Dict[str, Any] = {
            "model": self.config.model_id,
            "messages": [{"role": "user", "content": content}],
            "max_tokens": self.config.max_output_tokens,
        }
        if self.config.temperature is not None:
            payload["temperature"] = self.config.temperature
        return payload

    def parse_reply(self, body: Dict[str, Any]) -> AdapterReply:
        choice = body["choices"][0]
        text = (choice.get("message") or {}).get("content") or ""

        missing: list = []
        usage = body.get("usage")
        prompt_tokens = usage_field(usage, "prompt_tokens", missing)
        completion_tokens = usage_field(usage, "completion_tokens", missing)
        details = usage.get("completion_tokens_details") if isinstance(usage, dict) else None
        reasoning_tokens = usage_field(details, "reasoning_tokens", missing)
        return AdapterReply(
            text=text,
            usage=TokenUsage(prompt_tokens, reasoning_tokens, max(0, completion_tokens - reasoning_tokens), tuple(missing)),
            truncated=choice.get("finish_reason") == "length",
        )
