"""
Responses-style API adapter (reasoning effort none/low/medium).
"""
from typing import Any, Dict, Optional

from .base import AdapterReply, BaseAdapter, usage_field
from maze.records import TokenUsage


class ResponsesApiAdapter(BaseAdapter):
    """Adapter for endpoints speaking the `/responses` wire format."""

    def endpoint(self) -> str:
        return f"{self.config.api_base.rstrip('/')}/responses"

    def auth_headers(self) -> Dict[str, str]:
        return {"Authorization": f"Bearer {self.api_key()}"}

    def build_payload(self, prompt: str, image_b64: Optional[str]) -> Dict[str, Any]:
        content = [{"type": "input_text", "text": prompt}]
        if image_b64 is not None:
            content.append({"type": "input_image", "image_url": f"data:image/png;base64,{image_b64}"})
        payload: Dict[str, Any] = {
            "model": self.config.model_id,
            "input": [{"role": "user", "content": content}],
            "max_output_tokens": self.config.max_output_tokens,
        }
        if self.config.reasoning != "default":
            payload["reasoning"] = {"effort": self.config.reasoning}
        if self.config.temperature is not None:
            payload["temperature"] = self.config.temperature
        return payload

    def parse_reply(self, body: Dict[str, Any]) -> AdapterReply:
        text = body.get("output_text")
        if text is None:
            parts = []
            for item in body.get("output", []):
                if item.get("type") != "message":
                    continue
                for block in item.get("content", []):
                    if block.get("type") == "output_text":
                        parts.append(block.get("text", ""))
            text = "".join(parts)

        missing: list = []
        usage = body.get("usage")
        input_tokens = usage_field(usage, "input_tokens", missing)
        output_tokens = usage_field(usage, "output_tokens", missing)
        details = usage.get("output_tokens_details") if isinstance(usage, dict) else None
        reasoning_tokens = usage_field(details, "reasoning_tokens", missing)

        incomplete = body.get("incomplete_details") or {}
        truncated = body.get("status") == "incomplete" and incomplete.get("reason") == "max_output_tokens"
        return AdapterReply(
            text=text,
            usage=TokenUsage(input_tokens, reasoning_tokens, max(0, output_tokens - reasoning_tokens), tuple(missing)),
            truncated=truncated,
        )
