"""HTTP client for external rewriter/generator services.

Protocol: JSON over POST.

* ``POST {base}/rewrite``  request ``{"utterances": [str]}``,
  response ``{"rewrite": str}``
* ``POST {base}/generate`` request ``{"question": str, "context": str}``,
  response ``{"answer": str}``

Failures (timeout, non-2xx status, malformed body) are retried with a
fixed 500 ms backoff; after 1 + retries attempts a
:class:`convqa.errors.TransportError` is raised. Request bodies are
serialized canonically, so identical inputs produce identical bytes.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass

import requests

from .errors import TransportError

RETRY_BACKOFF_S = 0.5
DEFAULT_CONCURRENCY = 4
ENV_MODEL_URL = "CONVQA_MODEL_URL"


@dataclass(frozen=True)
class Endpoint:
    """Where and how patiently to reach a model service."""

    url: str
    timeout_ms: int = 30000
    retries: int = 2

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")


def _post_json(endpoint: Endpoint, path: str, payload: dict, response_field: str) -> str:
    body = json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
    url = endpoint.url.rstrip("/") + path
    attempts = 1 + endpoint.retries
    last_error = None
    for attempt in range(attempts):
        if attempt > 0:
            time.sleep(RETRY_BACKOFF_S)
        try:
            resp = requests.post(
                url,
                data=body.encode("utf-8"),
                headers={"Content-Type": "application/json"},
                timeout=endpoint.timeout_ms / 1000.0,
            )
        except requests.RequestException as e:
            last_error = f"transport failure: {e}"
            continue
        if not 200 <= resp.status_code < 300:
            last_error = f"status {resp.status_code}"
            continue
        try:
            obj = resp.json()
            value = obj[response_field]
        except (ValueError, KeyError, TypeError):
            last_error = f"malformed response body (expected field {response_field!r})"
            continue
        if not isinstance(value, str):
            last_error = f"response field {response_field!r} is not a string"
            continue
        return value
    raise TransportError(f"POST {url} failed after {attempts} attempts: {last_error}")


def call_rewrite(endpoint: Endpoint, utterances: list[str]) -> str:
    """Ask the rewriter service for a self-contained question."""
    if not utterances:
        raise ValueError("call_rewrite needs at least one utterance")
    return _post_json(endpoint, "/rewrite", {"utterances": list(utterances)}, "rewrite")


def call_generate(endpoint: Endpoint, question: str, context: str) -> str:
    """Ask the generator service for an answer to question given context."""
    return _post_json(
        endpoint, "/generate", {"question": question, "context": context}, "answer"
    )


class ModelClient:
    """Thread-safe client bound to one endpoint.

    A semaphore bounds in-flight requests; per-request state only, so one
    instance may be shared across pipeline workers.
    """

    def __init__(self, endpoint: Endpoint, max_concurrency: int = DEFAULT_CONCURRENCY):
        if max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")
        self.endpoint = endpoint
        self._slots = threading.Semaphore(max_concurrency)

    def rewrite(self, utterances: list[str]) -> str:
        with self._slots:
            return call_rewrite(self.endpoint, utterances)

    def generate(self, question: str, context: str) -> str:
        with self._slots:
            return call_generate(self.endpoint, question, context)
