"""
generateContent REST adapter. Models reason by default; hidden thinking is
reported through usageMetadata.thoughtsTokenCount.
"""
from typing import Any, Dict, Optional

from .base import AdapterReply, BaseAdapter, usage_field
from maze.records import TokenUsage


class GeminiRestAdapter(BaseAdapter):

    supported_reasoning = frozenset({"default"})

    def endpoint(self) -> str:
        return f"{self.config.api_base.rstrip('/')}/v1beta/models/{self.config.model_id}:generateContent"

    def auth_headers(self) -> Dict[str, str]:
        return {"x-goog-api-key": self.api_key()}

    def build_payload(self, prompt: str, image_b64: Optional[str]) -> Dict[str, Any]:
        parts: list = [{"text": prompt}]
        if image_b64 is not None:
            parts.append({"inline_data": {"mime_type": "image/png", "data": image_b64}})
        generation: Dict[str, Any] = {"maxOutputTokens": self.config.max_output_tokens}
        if self.config.temperature is not None:
            generation["temperature"] = self.config.temperature
        return {"contents": [{"role": "user", "parts": parts}], "generationConfig": generation}

    def parse_reply(self, body: Dict[str, Any]) -> AdapterReply:
        candidates = body.get("candidates") or [{}]
        first = candidates[0]
        parts = (first.get("content") or {}).get("parts", [])
        text = "".join(p.get("text", "") for p in parts if not p.get("thought"))

        missing: list = []
        meta = body.get("usageMetadata")
        usage = TokenUsage(
            usage_field(meta, "promptTokenCount", missing),
            usage_field(meta, "thoughtsTokenCount", missing),
            usage_field(meta, "candidatesTokenCount", missing),
            tuple(missing),
        )
        return AdapterReply(text=text, usage=usage, truncated=first.get("finishReason") == "MAX_TOKENS")
