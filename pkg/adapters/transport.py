"""
HTTP transport shared by remote adapters: per-provider token buckets and
bounded retries with exponential backoff and full jitter.
"""
import logging
import random
import threading
import time
from typing import Callable, Dict, Optional

import requests

from maze.errors import AuthError, TransportError

logger = logging.getLogger(__name__)

RETRY_STATUSES = frozenset({429, 500, 502, 503, 504})


class TokenBucket:
    """Thread-safe token bucket; capacity equals one minute's allowance."""

    def __init__(self, requests_per_minute: float, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.rate = requests_per_minute / 60.0
        self.capacity = max(1.0, requests_per_minute)
        self.tokens = self.capacity
        self.clock = clock
        self.sleep = sleep
        self.updated = clock()
        self.lock = threading.Lock()

    def acquire(self) -> float:
        """Take one token, sleeping until one is available. Returns seconds waited."""
        waited = 0.0
        while True:
            with self.lock:
                now = self.clock()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return waited
                delay = (1.0 - self.tokens) / self.rate
            self.sleep(delay)
            waited += delay


class HttpTransport:
    """
    POSTs JSON with rate limiting and retries on 429/5xx and connection errors.

    The parse-retry budget of the harness is separate: this class only
    retries failures that never produced a reply body.
    """

    def __init__(self, session: Optional[requests.Session] = None, sleep: Callable[[float], None] = time.sleep,
                 jitter: Optional[random.Random] = None):
        self.session = session or requests.Session()
        self.sleep = sleep
        self.jitter = jitter or random.Random()
        self.buckets: Dict[str, TokenBucket] = {}
        self.lock = threading.Lock()

    def bucket_for(self, config) -> TokenBucket:
        with self.lock:
            bucket = self.buckets.get(config.label)
            if bucket is None:
                bucket = TokenBucket(config.requests_per_minute, sleep=self.sleep)
                self.buckets[config.label] = bucket
            return bucket

    def backoff(self, attempt: int, config, retry_after: Optional[str] = None) -> float:
        if retry_after:
            try:
                return min(config.backoff_cap_s, float(retry_after))
            except ValueError:
                pass
        ceiling = min(config.backoff_cap_s, config.backoff_base_s * (2 ** attempt))
        return self.jitter.uniform(0, ceiling)

    def post_json(self, url: str, payload: dict, headers: Dict[str, str], config) -> dict:
        """
        POST a JSON body and return the decoded JSON reply.

        Args:
            url: Endpoint
            payload: Request body
            headers: Request headers (including credentials)
            config: ProviderConfig supplying timeout, retry and rate settings

        Raises:
            AuthError: HTTP 401/403
            TransportError: Other HTTP errors, or retries exhausted
        """
        bucket = self.bucket_for(config)
        last_error = "no attempt made"
        for attempt in range(config.max_transport_retries + 1):
            bucket.acquire()
            retry_after = None
            try:
                response = self.session.post(url, json=payload, headers=headers, timeout=config.timeout_s)
            except (requests.exceptions.Timeout, requests.exceptions.ConnectionError) as e:
                last_error = f"{type(e).__name__}: {e}"
            else:
                status = response.status_code
                if status in (401, 403):
                    raise AuthError(f"{config.label}: HTTP {status} (check {config.key_env_var})")
                if status in RETRY_STATUSES:
                    last_error = f"HTTP {status}"
                    retry_after = response.headers.get("Retry-After")
                elif status >= 400:
                    raise TransportError(f"{config.label}: HTTP {status}: {response.text[:200]}")
                else:
                    try:
                        return response.json()
                    except ValueError as e:
                        raise TransportError(f"{config.label}: reply is not JSON") from e

            if attempt < config.max_transport_retries:
                delay = self.backoff(attempt, config, retry_after)
                logger.warning(f"⚠️  {config.label}: {last_error}, retrying in {delay:.2f}s "
                               f"({attempt + 1}/{config.max_transport_retries})")
                self.sleep(delay)

        raise TransportError(f"{config.label}: giving up after {config.max_transport_retries + 1} attempts ({last_error})")
