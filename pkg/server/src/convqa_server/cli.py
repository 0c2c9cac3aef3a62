"""Command line entry point: configure backends and serve."""

from __future__ import annotations

import argparse
import sys

import uvicorn

from .app import ServerConfig, build_app


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convqa-server",
        description="Serve the rewrite/generate wire protocol over HTTP.",
    )
    parser.add_argument("--rewriter", help="seq2seq model id or path for /rewrite")
    parser.add_argument("--generator", help="seq2seq model id or path for /generate")
    parser.add_argument(
        "--echo", action="store_true",
        help="stub mode: echo the last utterance / first context tokens",
    )
    parser.add_argument("--max-input-tokens", type=int, default=1024)
    parser.add_argument("--max-new-tokens", type=int, default=128)
    parser.add_argument(
        "--sample", action="store_true",
        help="sample instead of the default deterministic greedy decoding",
    )
    parser.add_argument("--queue-depth", type=int, default=8)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8010)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = ServerConfig(
            rewriter=args.rewriter,
            generator=args.generator,
            echo=args.echo,
            max_input_tokens=args.max_input_tokens,
            max_new_tokens=args.max_new_tokens,
            sample=args.sample,
            queue_depth=args.queue_depth,
        )
        app = build_app(config)
    except Exception as e:  # bad config or model load failure: startup error
        print(f"convqa-server: startup error: {e}", file=sys.stderr)
        return 1
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
