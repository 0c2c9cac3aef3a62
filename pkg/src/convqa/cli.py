"""Command-line orchestration: index, run, eval, analyze.

Every output file starts with a provenance header (artifact version,
resolved-config hash, creation timestamp). Outputs are deterministic
functions of config plus data; the timestamp is the one field excluded
from byte-for-byte comparisons.

Exit codes: 0 success, 1 usage or config error, 2 data error,
3 transport errors exhausted during a run.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analysis import build_split_report, ratio_report, report_to_json, write_histograms_csv
from .config import RunConfig, load_config
from .corpus import load_conversations, load_passages, read_run, write_run
from .errors import ConfigError, DataError, TransportError
from .index import build_index, load_index, save_index
from .metrics import METRIC_NAMES, read_scores, score_run, write_scores
from .model_client import Endpoint, ModelClient
from .pipeline import run_pipeline

_TABLE_HEADERS = {
    "rouge1_r": "ROUGE1-R",
    "mrr": "MRR",
    "f1": "F1",
    "em": "EM",
    "rougeL_f1": "ROUGEL-F1",
}


class _Parser(argparse.ArgumentParser):
    # Usage errors are exit code 1, not argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="convqa", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        metavar="SECTION.KEY=VALUE",
        help="override one config value (repeatable)",
    )
    parser.add_argument("--jobs", type=int, help="parallel conversations for run")
    parser.add_argument("--quiet", action="store_true", help="suppress summaries")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("index", help="build and save the passage index")
    sub.add_parser("run", help="run the pipeline over the conversations")
    sub.add_parser("eval", help="score a finished run against ground truth")
    sub.add_parser("analyze", help="split analysis of a scores file")
    return parser


def _header(config: RunConfig, command: str) -> dict:
    return {
        "artifact": "convqa",
        "version": __version__,
        "command": command,
        "config_hash": config.hash(),
        "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _require_file(path: str, role: str) -> str:
    if not path:
        raise ConfigError(f"paths.{role} is not configured")
    if not Path(path).is_file():
        raise DataError(f"{role} file not found: {path}")
    return path


def _output_dir(config: RunConfig) -> Path:
    out = Path(config.path("output_dir"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(quiet: bool, obj: dict) -> None:
    if not quiet:
        print(json.dumps(obj, sort_keys=True))


def cmd_index(config: RunConfig, quiet: bool = False) -> int:
    passages_path = _require_file(config.path("passages"), "passages")
    index_path = config.path("index")
    if not index_path:
        raise ConfigError("paths.index is not configured")
    index = build_index(load_passages(passages_path))
    Path(index_path).parent.mkdir(parents=True, exist_ok=True)
    save_index(index, index_path)
    _emit(
        quiet,
        {
            "n_docs": index.n_docs,
            "avgdl": index.avgdl,
            "vocabulary_size": index.vocabulary_size,
            "index": index_path,
        },
    )
    return 0


def cmd_run(config: RunConfig, quiet: bool = False) -> int:
    index = load_index(_require_file(config.path("index"), "index"))
    texts = {
        p.id: p.text for p in load_passages(_require_file(config.path("passages"), "passages"))
    }
    conversations = load_conversations(
        _require_file(config.path("conversations"), "conversations")
    )

    client = None
    if config["rewrite"]["mode"] == "external" or config["generate"]["mode"] == "external":
        url = config["model"]["url"]
        if not url:
            raise ConfigError("model.url is required for external mode")
        endpoint = Endpoint(
            url=url,
            timeout_ms=config["model"]["timeout_ms"],
            retries=config["model"]["retries"],
        )
        client = ModelClient(endpoint, max_concurrency=config["model"]["concurrency"])

    records, counts = run_pipeline(conversations, index, texts, config, client)
    out = _output_dir(config) / "run.jsonl"
    write_run(out, records, header=_header(config, "run"))
    _emit(
        quiet,
        {
            "turns": counts.turns,
            "rewrite_fallbacks": counts.rewrite_fallbacks,
            "generate_fallbacks": counts.generate_fallbacks,
            "transport_failures": counts.transport_failures,
            "output": str(out),
        },
    )
    return 3 if counts.transport_failures else 0


def _format_means_row(means: dict) -> str:
    headers = [_TABLE_HEADERS[m] for m in METRIC_NAMES]
    cells = [
        "n/a" if means[m] is None else f"{means[m]:.3f}" for m in METRIC_NAMES
    ]
    widths = [max(len(h), len(c)) for h, c in zip(headers, cells)]
    head = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
    row = "  ".join(c.rjust(w) for c, w in zip(cells, widths))
    return head + "\n" + row


def cmd_eval(config: RunConfig, quiet: bool = False) -> int:
    out = _output_dir(config)
    run_path = out / "run.jsonl"
    if not run_path.is_file():
        raise DataError(f"run file not found: {run_path}")
    records = read_run(run_path)
    conversations = load_conversations(
        _require_file(config.path("conversations"), "conversations")
    )
    samples, summary = score_run(records, conversations)
    header = _header(config, "eval")
    header["means"] = summary.means
    header["skipped"] = summary.skipped
    header["n_samples"] = summary.n_samples
    scores_path = out / "scores.jsonl"
    write_scores(scores_path, samples, header=header)
    if not quiet:
        print(_format_means_row(summary.means))
        skipped = {m: n for m, n in summary.skipped.items() if n}
        print(f"samples: {summary.n_samples}" + (f"  skipped: {skipped}" if skipped else ""))
        print(f"scores: {scores_path}")
    return 0


def cmd_analyze(config: RunConfig, quiet: bool = False) -> int:
    out = _output_dir(config)
    scores_path = out / "scores.jsonl"
    if not scores_path.is_file():
        raise DataError(f"scores file not found: {scores_path}")
    samples = read_scores(scores_path)
    if not samples:
        raise DataError(f"no samples in {scores_path}")

    cfg = config["analysis"]
    threshold = cfg["rewrite_threshold"]
    report = build_split_report(
        samples,
        rewrite_threshold=None if threshold < 0 else threshold,
        retrieval_threshold=cfg["retrieval_threshold"],
        bin_width=cfg["bin_width"],
    )
    statements = ratio_report(report)

    payload = {"header": _header(config, "analyze"), **report_to_json(report, statements)}
    analysis_path = out / "analysis.json"
    with open(analysis_path, "w", encoding="utf-8") as f:
        json.dump(payload, f, sort_keys=True, indent=2)
        f.write("\n")
    csv_path = out / "histograms.csv"
    write_histograms_csv(report, csv_path)

    _emit(
        quiet,
        {
            "rewrite_threshold": report.rewrite_threshold,
            "retrieval_threshold": report.retrieval_threshold,
            "n_classified": report.n_classified,
            "n_excluded": report.n_excluded,
            "splits": {label.value: st.count for label, st in report.splits.items()},
            "analysis": str(analysis_path),
            "histograms": str(csv_path),
        },
    )
    return 0


_COMMANDS = {
    "index": cmd_index,
    "run": cmd_run,
    "eval": cmd_eval,
    "analyze": cmd_analyze,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.overrides, jobs=args.jobs)
        return _COMMANDS[args.command](config, quiet=args.quiet)
    except ConfigError as e:
        print(f"convqa: config error: {e}", file=sys.stderr)
        return 1
    except DataError as e:
        print(f"convqa: data error: {e}", file=sys.stderr)
        return 2
    except TransportError as e:
        print(f"convqa: transport error: {e}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as e:
        print(f"convqa: data error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
