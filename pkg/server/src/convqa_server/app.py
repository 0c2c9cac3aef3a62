"""FastAPI application implementing the rewrite/generate wire protocol.

Request/response schemas match the pipeline's model client:

* ``POST /rewrite``  {"utterances": [str, ...]} -> {"rewrite": str, "truncated": bool}
* ``POST /generate`` {"question": str, "context": str} -> {"answer": str, "truncated": bool}
* ``GET /healthz``   liveness plus which backends are configured

Inference runs one request at a time per backend; requests beyond the
configured queue depth are rejected with 503 rather than piling up.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .backends import EchoBackend, Seq2SeqBackend


@dataclass(frozen=True)
class ServerConfig:
    """What to serve and how much input to accept."""

    rewriter: str | None = None
    generator: str | None = None
    echo: bool = False
    max_input_tokens: int = 1024
    max_new_tokens: int = 128
    sample: bool = False
    queue_depth: int = 8

    def __post_init__(self):
        if not self.echo and not (self.rewriter or self.generator):
            raise ValueError("configure at least one model, or use echo mode")
        if self.max_input_tokens < 1:
            raise ValueError("max_input_tokens must be >= 1")
        if self.queue_depth < 0:
            raise ValueError("queue_depth must be >= 0")


class RewriteRequest(BaseModel):
    utterances: list[str] = Field(min_length=1)


class GenerateRequest(BaseModel):
    question: str
    context: str


class _Guarded:
    """Serialize inference and bound the number of waiting requests."""

    def __init__(self, backend, queue_depth: int):
        self.backend = backend
        self._busy = threading.Lock()
        self._slots = threading.BoundedSemaphore(1 + queue_depth)

    def call(self, method: str, *args):
        if not self._slots.acquire(blocking=False):
            raise HTTPException(status_code=503, detail="request queue is full")
        try:
            with self._busy:
                return getattr(self.backend, method)(*args)
        finally:
            self._slots.release()


def build_app(config: ServerConfig) -> FastAPI:
    """Load the configured backends and return the ASGI application.

    Model loading happens here, so a bad model id fails at startup, not
    on the first request.
    """
    if config.echo:
        echo = EchoBackend(config.max_input_tokens)
        rewriter = _Guarded(echo, config.queue_depth)
        generator = _Guarded(echo, config.queue_depth)
    else:
        def load(model_id: str | None):
            if model_id is None:
                return None
            backend = Seq2SeqBackend(
                model_id,
                max_input_tokens=config.max_input_tokens,
                max_new_tokens=config.max_new_tokens,
                sample=config.sample,
            )
            return _Guarded(backend, config.queue_depth)

        rewriter = load(config.rewriter)
        generator = load(config.generator)

    app = FastAPI(title="convqa reference model server")

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "mode": "echo" if config.echo else "models",
            "rewriter": rewriter is not None,
            "generator": generator is not None,
        }

    @app.post("/rewrite")
    def rewrite(request: RewriteRequest):
        if rewriter is None:
            raise HTTPException(status_code=503, detail="no rewriter model configured")
        text, truncated = rewriter.call("rewrite", request.utterances)
        return {"rewrite": text, "truncated": truncated}

    @app.post("/generate")
    def generate(request: GenerateRequest):
        if generator is None:
            raise HTTPException(status_code=503, detail="no generator model configured")
        text, truncated = generator.call("generate", request.question, request.context)
        return {"answer": text, "truncated": truncated}

    return app
