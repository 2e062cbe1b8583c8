"""OpenAI-compatible chat-completions client with bounded retries."""

from __future__ import annotations

import logging
import math
import os
import time
from typing import Callable, Optional

import httpx

from somarena.backend.base import BackendRequest, TransportError

log = logging.getLogger(__name__)

API_KEY_ENV = "SOMARENA_API_KEY"
ENDPOINT_ENV = "SOMARENA_ENDPOINT"
MODEL_ENV = "SOMARENA_MODEL"
DEFAULT_ENDPOINT = "https://api.openai.com/v1"

_RETRY_STATUS = {408, 409, 429, 500, 502, 503, 504}


class HttpBackend:
    """Posts to ``{endpoint}/chat/completions`` and returns the first choice's text.

    The API key is read from the environment only. Every call carries a
    timeout; failures are retried ``attempts`` times with exponential backoff.
    """

    def __init__(
        self,
        model: Optional[str] = None,
        endpoint: Optional[str] = None,
        *,
        api_key: Optional[str] = None,
        timeout: float = 60.0,
        attempts: int = 3,
        backoff: float = 1.0,
        transport: Optional[httpx.BaseTransport] = None,
        sleep: Callable[[float], None] = time.sleep,
        name: Optional[str] = None,
    ):
        if attempts < 1:
            raise ValueError("attempts must be at least 1")
        if not timeout or timeout <= 0 or math.isinf(timeout):
            raise ValueError("a finite positive timeout is required")
        self.model = model or os.environ.get(MODEL_ENV, "gpt-4o")
        self.endpoint = (endpoint or os.environ.get(ENDPOINT_ENV) or DEFAULT_ENDPOINT).rstrip("/")
        self._api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.timeout = timeout
        self.attempts = attempts
        self.backoff = backoff
        self._sleep = sleep
        self._client = httpx.Client(timeout=timeout, transport=transport)
        self.name = name or f"http:{self.model}"

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        return headers

    def _post(self, path: str, payload: dict) -> dict:
        url = f"{self.endpoint}/{path}"
        last_status = None
        last_error = ""
        for attempt in range(1, self.attempts + 1):
            try:
                resp = self._client.post(url, json=payload, headers=self._headers())
            except httpx.HTTPError as err:
                last_error, last_status = f"{type(err).__name__}: {err}", None
            else:
                if resp.status_code == 200:
                    try:
                        return resp.json()
                    except ValueError as err:
                        raise TransportError(f"malformed JSON body: {err}", attempt, 200, False) from err
                last_status, last_error = resp.status_code, resp.text[:200]
                if resp.status_code not in _RETRY_STATUS:
                    raise TransportError(f"HTTP {resp.status_code}: {last_error}", attempt, resp.status_code, False)
            if attempt < self.attempts:
                delay = self.backoff * 2 ** (attempt - 1)
                log.warning("%s attempt %d failed (%s); retrying in %.1fs", url, attempt, last_error, delay)
                self._sleep(delay)
        raise TransportError(f"giving up after {self.attempts} attempts: {last_error}",
                             self.attempts, last_status, True)

    def complete(self, request: BackendRequest) -> str:
        body = self._post("chat/completions", {
            "model": self.model,
            "messages": request.as_payload(),
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        })
        try:
            return body["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as err:
            raise TransportError(f"unexpected response shape: {err}", 1, 200, False) from err

    def embed(self, texts: list[str], model: str = "text-embedding-3-small") -> list[list[float]]:
        body = self._post("embeddings", {"model": model, "input": texts})
        try:
            return [item["embedding"] for item in body["data"]]
        except (KeyError, TypeError) as err:
            raise TransportError(f"unexpected embeddings shape: {err}", 1, 200, False) from err

    def close(self) -> None:
        self._client.close()
