"""
Messages-style API adapter with extended thinking on/off plus a token budget.
"""
from typing import Any, Dict, Optional

from .base import AdapterReply, BaseAdapter, usage_field
from maze.records import TokenUsage

API_VERSION = "2023-06-01"


class MessagesApiAdapter(BaseAdapter):
    """
    Adapter for endpoints speaking the `/v1/messages` wire format.

    Images travel as base64 `source` blocks. Thinking tokens are billed
    inside output_tokens and are not reported separately, so the split is
    flagged as missing whenever thinking is enabled.
    """

    supported_reasoning = frozenset({"none", "low", "medium"})

    def endpoint(self) -> str:
        return f"{self.config.api_base.rstrip('/')}/v1/messages"

    def auth_headers(self) -> Dict[str, str]:
        return {"x-api-key": self.api_key(), "anthropic-version": API_VERSION}

    def build_payload(self, prompt: str, image_b64: Optional[str]) -> Dict[str, Any]:
        content = []
        if image_b64 is not None:
            content.append({
                "type": "image",
                "source": {"type": "base64", "media_type": "image/png", "data": image_b64},
            })
        content.append({"type": "text", "text": prompt})
        payload: Dict[str, Any] = {
            "model": self.config.model_id,
            "max_tokens": self.config.max_output_tokens,
            "messages": [{"role": "user", "content": content}],
            "temperature": self.config.temperature,
        }
        budget = self.config.effective_thinking_budget
        if budget is not None:
            payload["thinking"] = {"type": "enabled", "budget_tokens": min(budget, self.config.max_output_tokens - 1)}
        return payload

    def parse_reply(self, body: Dict[str, Any]) -> AdapterReply:
        text = "".join(b.get("text", "") for b in body.get("content", []) if b.get("type") == "text")
        missing: list = []
        usage = body.get("usage")
        input_tokens = usage_field(usage, "input_tokens", missing)
        output_tokens = usage_field(usage, "output_tokens", missing)
        if self.config.effective_thinking_budget is not None:
            missing.append("thinking_split")
        return AdapterReply(
            text=text,
            usage=TokenUsage(input_tokens, 0, output_tokens, tuple(missing)),
            truncated=body.get("stop_reason") == "max_tokens",
        )
