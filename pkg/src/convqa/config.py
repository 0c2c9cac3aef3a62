"""Run configuration: TOML file plus command-line overrides.

Precedence is CLI ``--set`` > environment (model URL only) > config file
> defaults. Unknown keys are rejected so typos fail fast, and the
resolved configuration is hashed into every output header for
provenance.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .model_client import DEFAULT_CONCURRENCY, ENV_MODEL_URL
from .text import DEFAULT_BUDGET

_DEFAULTS = {
    "paths": {
        "passages": "",
        "conversations": "",
        "index": "",
        "output_dir": ".",
    },
    "bm25": {"k1": 0.82, "b": 0.68},
    "rewrite": {
        "mode": "none",  # none | oracle | external
        "history_source": "mr_ma",  # q | q_ma | mr | mr_ma
        "h": 1,
        "budget": DEFAULT_BUDGET,
    },
    "generate": {
        "mode": "extractive",  # extractive | external
        "budget": DEFAULT_BUDGET,
        "top_k": 10,
        "used_fraction": 0.5,
    },
    "model": {
        "url": "",
        "timeout_ms": 30000,
        "retries": 2,
        "concurrency": DEFAULT_CONCURRENCY,
    },
    "analysis": {
        "rewrite_threshold": -1.0,  # < 0 means: use the 3rd quartile
        "retrieval_threshold": 0.25,
        "bin_width": 0.1,
    },
    "run": {"jobs": 1, "seed": 0},  # seed reserved; the pipeline is deterministic
}

_CHOICES = {
    ("rewrite", "mode"): {"none", "oracle", "external"},
    ("rewrite", "history_source"): {"q", "q_ma", "mr", "mr_ma"},
    ("generate", "mode"): {"extractive", "external"},
}


@dataclass(frozen=True)
class RunConfig:
    """Validated, fully resolved configuration for one invocation."""

    values: dict

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    def path(self, name: str) -> str:
        return self.values["paths"][name]

    def hash(self) -> str:
        """Digest of everything that can affect results.

        The [run] section (worker count, reserved seed) is excluded so the
        same experiment hashes identically regardless of --jobs.
        """
        content = {k: v for k, v in self.values.items() if k != "run"}
        canonical = json.dumps(content, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def _coerce(raw: str):
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            pass
    return raw


def _type_ok(expected, value) -> bool:
    if isinstance(expected, bool) or isinstance(value, bool):
        return isinstance(expected, bool) and isinstance(value, bool)
    if isinstance(expected, float):
        return isinstance(value, (int, float))
    return isinstance(value, type(expected))


def _merge(base: dict, overlay: dict, source: str) -> None:
    for section, entries in overlay.items():
        if section not in base:
            raise ConfigError(f"{source}: unknown config section {section!r}")
        if not isinstance(entries, dict):
            raise ConfigError(f"{source}: section {section!r} must be a table")
        for key, value in entries.items():
            if key not in base[section]:
                raise ConfigError(f"{source}: unknown config key {section}.{key}")
            expected = _DEFAULTS[section][key]
            if not _type_ok(expected, value):
                raise ConfigError(
                    f"{source}: {section}.{key} must be {type(expected).__name__}"
                )
            base[section][key] = float(value) if isinstance(expected, float) else value


def _validate(values: dict) -> None:
    for (section, key), allowed in _CHOICES.items():
        v = values[section][key]
        if v not in allowed:
            raise ConfigError(f"{section}.{key} must be one of {sorted(allowed)}, got {v!r}")
    if values["bm25"]["k1"] < 0:
        raise ConfigError("bm25.k1 must be >= 0")
    if not 0.0 <= values["bm25"]["b"] <= 1.0:
        raise ConfigError("bm25.b must be in [0, 1]")
    if values["rewrite"]["h"] < 1:
        raise ConfigError("rewrite.h must be >= 1")
    for section, key in (("rewrite", "budget"), ("generate", "budget")):
        if values[section][key] < 1:
            raise ConfigError(f"{section}.{key} must be >= 1")
    if values["generate"]["top_k"] < 1:
        raise ConfigError("generate.top_k must be >= 1")
    if not 0.0 <= values["generate"]["used_fraction"] <= 1.0:
        raise ConfigError("generate.used_fraction must be in [0, 1]")
    if values["model"]["timeout_ms"] <= 0:
        raise ConfigError("model.timeout_ms must be > 0")
    if values["model"]["retries"] < 0:
        raise ConfigError("model.retries must be >= 0")
    if values["model"]["concurrency"] < 1:
        raise ConfigError("model.concurrency must be >= 1")
    if values["run"]["jobs"] < 1:
        raise ConfigError("run.jobs must be >= 1")
    if values["analysis"]["retrieval_threshold"] < 0:
        raise ConfigError("analysis.retrieval_threshold must be >= 0")
    bw = values["analysis"]["bin_width"]
    if not 0 < bw <= 1 or abs(round(1 / bw) * bw - 1.0) > 1e-9:
        raise ConfigError("analysis.bin_width must divide 1 evenly")


def load_config(
    config_file: str | None = None,
    overrides: list[str] | None = None,
    jobs: int | None = None,
) -> RunConfig:
    """Resolve defaults, file, environment, and --set overrides."""
    values = {section: dict(entries) for section, entries in _DEFAULTS.items()}

    if config_file is not None:
        try:
            with open(config_file, "rb") as f:
                data = tomllib.load(f)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {config_file}") from None
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{config_file}: {e}") from None
        _merge(values, data, config_file)

    env_url = os.environ.get(ENV_MODEL_URL)
    if env_url:
        values["model"]["url"] = env_url

    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        dotted, raw = item.split("=", 1)
        parts = dotted.split(".")
        if len(parts) != 2:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        _merge(values, {parts[0]: {parts[1]: _coerce(raw)}}, "--set")

    if jobs is not None:
        values["run"]["jobs"] = jobs

    _validate(values)
    return RunConfig(values=values)
