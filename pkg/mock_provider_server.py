#!/usr/bin/env python3
"""
Mock Provider Server
Offline stand-in for the remote solver APIs. Speaks the responses-api,
messages-api, gemini-rest and dashscope wire formats and answers by reading
the maze back from the image (or parsing the text grid) and running BFS.
"""
import asyncio
import base64
import hashlib
import json
import logging
import os
import re
import threading
from dataclasses import dataclass
from threading import Lock
from typing import Dict, List, Optional, Tuple

from aiohttp import web

from maze.grid import parse_text_grid, path_to_strings
from maze.pathfinder import analyze
from maze.renderer import infer_dimensions, read_back

_DATA_URL = re.compile(r"^data:image/png;base64,(.+)$", re.DOTALL)


@dataclass
class MockScript:
    """Failure injection for one model id."""
    fail_parse_first: int = 0
    http_error_first: int = 0
    http_error_status: int = 503
    truncate: bool = False
    claim_unreachable: bool = False


class ScriptRegistry:
    """
    Scripts and per-(model, maze) request counters (Thread-safe).
    Counters let "fail first N" scripts act per maze regardless of interleaving.
    """

    def __init__(self):
        self.scripts: Dict[str, MockScript] = {}
        self.counters: Dict[Tuple[str, str], int] = {}
        self.requests: List[dict] = []
        self.lock = Lock()
        self.logger = logging.getLogger("ScriptRegistry")

    def configure(self, model: str, **script) -> None:
        with self.lock:
            self.scripts[model] = MockScript(**script)
            self.logger.info(f"Script for {model}: {self.scripts[model]}")

    def script_for(self, model: str) -> MockScript:
        with self.lock:
            return self.scripts.get(model, MockScript())

    def next_attempt(self, model: str, maze_key: str) -> int:
        """Record a request and return its 1-based attempt number for this maze."""
        with self.lock:
            key = (model, maze_key)
            self.counters[key] = self.counters.get(key, 0) + 1
            return self.counters[key]

    def record(self, fmt: str, model: str, payload: dict, headers: Dict[str, str]) -> None:
        with self.lock:
            self.requests.append({"format": fmt, "model": model, "payload": payload, "headers": headers})

    def reset(self) -> None:
        with self.lock:
            self.scripts.clear()
            self.counters.clear()
            self.requests.clear()


def solve_maze(prompt: str, image_b64: Optional[str], claim_unreachable: bool = False) -> str:
    """
    Answer the way a perfect solver would, from the request content alone.

    Returns:
        JSON answer text (reachable first so truncated replies keep it)
    """
    if image_b64 is not None:
        png = base64.b64decode(image_b64)
        rows, cols = infer_dimensions(png)
        grid = read_back(png, rows, cols)
    else:
        marker = prompt.rfind("Maze:\n")
        if marker < 0:
            raise ValueError("request carries neither an image nor a text grid")
        grid = parse_text_grid(prompt[marker + len("Maze:\n"):])

    annotation = analyze(grid)
    reachable = annotation.reachable and not claim_unreachable
    path = path_to_strings(annotation.accepted_paths[0]) if reachable else []
    return json.dumps({
        "reachable": reachable,
        "grid_size": [grid.rows, grid.cols],
        "start_found": True,
        "goal_found": True,
        "path_length": annotation.shortest_len if reachable else None,
        "path": path,
    })


def mock_usage(prompt: str, image_b64: Optional[str], text: str) -> Tuple[int, int, int]:
    """Deterministic (input, thinking, output) token counts."""
    input_tokens = len(prompt) // 4 + (1000 if image_b64 else 0)
    output_tokens = max(1, len(text) // 4)
    thinking_tokens = 4 * output_tokens
    return input_tokens, thinking_tokens, output_tokens


class MockProviderHandler:
    """
    HTTP API handlers, one per wire format.
    Each handler extracts (model, prompt, image) and wraps the shared answer.
    """

    def __init__(self, registry: ScriptRegistry):
        self.registry = registry
        self.logger = logging.getLogger("MockProviderHandler")

    # ------------------------------------------------------------------
    # Request extraction
    # ------------------------------------------------------------------

    @staticmethod
    def _from_data_url(url: str) -> str:
        match = _DATA_URL.match(url or "")
        if not match:
            raise ValueError("image is not a base64 PNG data URL")
        return match.group(1)

    def _extract_responses(self, body: dict):
        prompt, image = "", None
        for block in body["input"][0]["content"]:
            if block["type"] == "input_text":
                prompt += block["text"]
            elif block["type"] == "input_image":
                image = self._from_data_url(block["image_url"])
        return body["model"], prompt, image

    def _extract_messages(self, body: dict):
        prompt, image = "", None
        for block in body["messages"][0]["content"]:
            if block["type"] == "text":
                prompt += block["text"]
            elif block["type"] == "image":
                image = block["source"]["data"]
        return body["model"], prompt, image

    def _extract_gemini(self, body: dict, model: str):
        prompt, image = "", None
        for part in body["contents"][0]["parts"]:
            if "text" in part:
                prompt += part["text"]
            elif "inline_data" in part:
                image = part["inline_data"]["data"]
        return model, prompt, image

    def _extract_chat(self, body: dict):
        prompt, image = "", None
        for block in body["messages"][0]["content"]:
            if block["type"] == "text":
                prompt += block["text"]
            elif block["type"] == "image_url":
                image = self._from_data_url(block["image_url"]["url"])
        return body["model"], prompt, image

    # ------------------------------------------------------------------
    # Reply shapes
    # ------------------------------------------------------------------

    @staticmethod
    def _wrap_responses(text: str, usage, truncated: bool) -> dict:
        i, t, o = usage
        reply = {
            "status": "incomplete" if truncated else "completed",
            "output": [{"type": "message", "content": [{"type": "output_text", "text": text}]}],
            "usage": {"input_tokens": i, "output_tokens": t + o, "output_tokens_details": {"reasoning_tokens": t}},
        }
        if truncated:
            reply["incomplete_details"] = {"reason": "max_output_tokens"}
        return reply

    @staticmethod
    def _wrap_messages(text: str, usage, truncated: bool) -> dict:
        i, t, o = usage
        return {
            "type": "message",
            "content": [{"type": "text", "text": text}],
            "stop_reason": "max_tokens" if truncated else "end_turn",
            "usage": {"input_tokens": i, "output_tokens": t + o},
        }

    @staticmethod
    def _wrap_gemini(text: str, usage, truncated: bool) -> dict:
        i, t, o = usage
        return {
            "candidates": [{"content": {"parts": [{"text": text}]}, "finishReason": "MAX_TOKENS" if truncated else "STOP"}],
            "usageMetadata": {"promptTokenCount": i, "thoughtsTokenCount": t, "candidatesTokenCount": o},
        }

    @staticmethod
    def _wrap_chat(text: str, usage, truncated: bool) -> dict:
        i, t, o = usage
        return {
            "choices": [{"message": {"role": "assistant", "content": text}, "finish_reason": "length" if truncated else "stop"}],
            "usage": {"prompt_tokens": i, "completion_tokens": t + o, "completion_tokens_details": {"reasoning_tokens": t}},
        }

    # ------------------------------------------------------------------
    # Shared flow
    # ------------------------------------------------------------------

    async def _handle(self, request, fmt: str, extract, wrap, auth_header: str):
        if not request.headers.get(auth_header):
            return web.json_response({"error": f"missing {auth_header}"}, status=401)
        try:
            body = await request.json()
            model, prompt, image = extract(body)
        except Exception as e:
            return web.json_response({"error": f"bad request: {e}"}, status=400)

        if "tools" in body or "functions" in body:
            return web.json_response({"error": "tool calling is not allowed"}, status=400)

        self.registry.record(fmt, model, body, {auth_header: "***"})
        script = self.registry.script_for(model)
        maze_key = hashlib.sha256((image or prompt).encode("utf-8")).hexdigest()
        attempt = self.registry.next_attempt(model, maze_key)

        if attempt <= script.http_error_first:
            return web.json_response({"error": "scripted failure"}, status=script.http_error_status)

        try:
            answer = await asyncio.get_running_loop().run_in_executor(
                None, solve_maze, prompt, image, script.claim_unreachable
            )
        except Exception as e:
            self.logger.error(f"Cannot solve request: {e}")
            return web.json_response({"error": str(e)}, status=422)

        truncated = False
        if attempt - script.http_error_first <= script.fail_parse_first:
            text = "I traced the corridors but I am not sure how to format the answer."
        elif script.truncate:
            text, truncated = answer[: len(answer) // 2], True
        else:
            text = f"Here is my answer:\n```json\n{answer}\n```"
        return web.json_response(wrap(text, mock_usage(prompt, image, text), truncated))

    async def handle_responses(self, request):
        """POST /v1/responses"""
        return await self._handle(request, "responses-api", self._extract_responses, self._wrap_responses, "Authorization")

    async def handle_messages(self, request):
        """POST /v1/messages"""
        return await self._handle(request, "messages-api", self._extract_messages, self._wrap_messages, "x-api-key")

    async def handle_gemini(self, request):
        """POST /v1beta/models/{target} where target is <model>:generateContent"""
        model, _, method = request.match_info["target"].partition(":")
        if method != "generateContent":
            return web.json_response({"error": f"unknown method {method}"}, status=404)
        return await self._handle(request, "gemini-rest", lambda body: self._extract_gemini(body, model),
                                  self._wrap_gemini, "x-goog-api-key")

    async def handle_chat(self, request):
        """POST /compatible-mode/v1/chat/completions"""
        return await self._handle(request, "dashscope", self._extract_chat, self._wrap_chat, "Authorization")

    async def handle_health(self, request):
        """GET /health"""
        return web.json_response({"status": "ok", "requests": len(self.registry.requests)})


class MockProviderServer:
    """
    Main server.
    Runs standalone (run()) or on a background thread for tests (start_in_thread()).
    """

    def __init__(self, host: str = "127.0.0.1", port: int = 8790):
        self.host = host
        self.port = port
        self.registry = ScriptRegistry()
        self.handler = MockProviderHandler(self.registry)
        self.logger = logging.getLogger("MockProviderServer")
        self._loop: Optional[asyncio.AbstractEventLoop] = None
        self._runner: Optional[web.AppRunner] = None
        self._thread: Optional[threading.Thread] = None

    def build_app(self) -> web.Application:
        app = web.Application(client_max_size=32 * 1024 * 1024)
        app.router.add_post("/v1/responses", self.handler.handle_responses)
        app.router.add_post("/v1/messages", self.handler.handle_messages)
        app.router.add_post("/v1beta/models/{target}", self.handler.handle_gemini)
        app.router.add_post("/compatible-mode/v1/chat/completions", self.handler.handle_chat)
        app.router.add_get("/health", self.handler.handle_health)
        return app

    async def _start(self) -> None:
        self._runner = web.AppRunner(self.build_app())
        await self._runner.setup()
        site = web.TCPSite(self._runner, self.host, self.port)
        await site.start()
        self.port = self._runner.addresses[0][1]
        self.logger.info(f"🌐 Mock provider server started on {self.base_url}")

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def api_base(self, adapter_kind: str) -> str:
        """api_base value a ProviderConfig should use to reach this server."""
        return {
            "responses-api": f"{self.base_url}/v1",
            "messages-api": self.base_url,
            "gemini-rest": self.base_url,
            "dashscope": f"{self.base_url}/compatible-mode/v1",
        }[adapter_kind]

    def start_in_thread(self) -> str:
        """Start on a daemon thread; returns the base URL once listening."""
        ready = threading.Event()
        self._loop = asyncio.new_event_loop()

        def serve():
            asyncio.set_event_loop(self._loop)
            self._loop.run_until_complete(self._start())
            ready.set()
            self._loop.run_forever()

        self._thread = threading.Thread(target=serve, daemon=True, name="MockProviderServer")
        self._thread.start()
        if not ready.wait(timeout=10):
            raise RuntimeError("mock provider server did not start")
        return self.base_url

    def stop(self) -> None:
        if self._loop is None:
            return
        future = asyncio.run_coroutine_threadsafe(self._runner.cleanup(), self._loop)
        future.result(timeout=10)
        self._loop.call_soon_threadsafe(self._loop.stop)
        self._thread.join(timeout=10)
        self._loop.close()
        self._loop = None
        self.logger.info("Mock provider server stopped")

    def run(self) -> None:
        """Serve until interrupted."""
        asyncio.run(self._run_forever())

    async def _run_forever(self) -> None:
        self.logger.info("🚀 Mock Provider Server starting...")
        await self._start()
        for path in ("/v1/responses", "/v1/messages", "/v1beta/models/<model>:generateContent",
                     "/compatible-mode/v1/chat/completions"):
            self.logger.info(f"   - POST :{self.port}{path}")
        await asyncio.Future()


def main():
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    logger = logging.getLogger(__name__)

    host = os.getenv("MAZEBENCH_MOCK_HOST", "127.0.0.1")
    port = int(os.getenv("MAZEBENCH_MOCK_PORT", "8790"))

    server = MockProviderServer(host=host, port=port)

    try:
        server.run()
    except KeyboardInterrupt:
        logger.info("Server stopped by user")
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        exit(1)


if __name__ == "__main__":
    main()
