"""Reference model server for the conversational QA wire protocol.

Exposes POST /rewrite and POST /generate (plus GET /healthz) backed by
pretrained seq2seq models with deterministic greedy decoding, or by an
echo stub for protocol tests that need no model downloads.
"""

__version__ = "0.1.0"

from .app import ServerConfig, build_app

__all__ = ["ServerConfig", "build_app", "__version__"]
