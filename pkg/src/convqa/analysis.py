"""Success/fail split analysis of per-turn scores.

Samples are labeled by whether question rewriting succeeded (unigram
recall at or above a threshold, by default the 3rd quartile of the score
distribution) and whether retrieval succeeded (reciprocal rank >= 1/4 by
default, i.e. a gold passage within the first four ranks). Per-split
score histograms and frequency-ratio statements then quantify how
upstream quality propagates downstream.

Both thresholds are inclusive. The quantile method is linear
interpolation at p*(n-1) over the sorted values and is recorded in the
report so results are self-describing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DataError
from .metrics import METRIC_NAMES, SampleScores

DEFAULT_RETRIEVAL_THRESHOLD = 0.25
DEFAULT_BIN_WIDTH = 0.1
QUANTILE_METHOD = "linear interpolation at p*(n-1) over sorted values"


def quartile(values, q: int) -> float:
    """q-th quartile (q in {1,2,3}) of a non-empty list."""
    if q not in (1, 2, 3):
        raise ValueError("q must be 1, 2 or 3")
    if len(values) == 0:
        raise ValueError("quartile of empty list")
    return float(np.quantile(np.asarray(values, dtype=np.float64), q / 4))


class SplitLabel(str, Enum):
    BOTH_PASS = "rewrite_pass_retrieval_pass"
    REWRITE_ONLY = "rewrite_pass_retrieval_fail"
    RETRIEVAL_ONLY = "rewrite_fail_retrieval_pass"
    BOTH_FAIL = "rewrite_fail_retrieval_fail"

    @property
    def rewrite_success(self) -> bool:
        return self in (SplitLabel.BOTH_PASS, SplitLabel.REWRITE_ONLY)

    @property
    def retrieval_success(self) -> bool:
        return self in (SplitLabel.BOTH_PASS, SplitLabel.RETRIEVAL_ONLY)


def classify(
    sample: SampleScores, rewrite_threshold: float, retrieval_threshold: float
) -> SplitLabel:
    """Assign a sample to one of the four splits; thresholds inclusive."""
    if sample.rouge1_r is None or sample.mrr is None:
        raise ValueError("sample has no rewrite or retrieval score")
    rewrite_ok = sample.rouge1_r >= rewrite_threshold
    retrieval_ok = sample.mrr >= retrieval_threshold
    if rewrite_ok:
        return SplitLabel.BOTH_PASS if retrieval_ok else SplitLabel.REWRITE_ONLY
    return SplitLabel.RETRIEVAL_ONLY if retrieval_ok else SplitLabel.BOTH_FAIL


@dataclass(frozen=True)
class Histogram:
    """Relative-frequency bins over [0, 1]; right-open except the last."""

    bin_lo: tuple[float, ...]
    bin_hi: tuple[float, ...]
    freqs: tuple[float, ...]
    n: int

    @property
    def empty(self) -> bool:
        return self.n == 0


def histogram(values, bin_width: float = DEFAULT_BIN_WIDTH) -> Histogram:
    """Bin values from [0, 1] and normalize by their count."""
    n_bins = round(1.0 / bin_width)
    if n_bins < 1 or abs(n_bins * bin_width - 1.0) > 1e-9:
        raise ValueError(f"bin_width {bin_width} does not divide 1 evenly")
    edges = [i / n_bins for i in range(n_bins + 1)]
    counts = [0] * n_bins
    total = 0
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"value {v} outside [0, 1]")
        # Right-open bins; 1.0 belongs to the final bin.
        i = min(int(np.searchsorted(edges, v, side="right")) - 1, n_bins - 1)
        counts[i] += 1
        total += 1
    freqs = tuple(c / total if total else 0.0 for c in counts)
    return Histogram(
        bin_lo=tuple(edges[:-1]), bin_hi=tuple(edges[1:]), freqs=freqs, n=total
    )


@dataclass(frozen=True)
class SplitStats:
    count: int
    means: dict  # metric -> mean of present values, or None
    histograms: dict  # metric -> Histogram over present values
    values: dict = field(repr=False, default_factory=dict)  # metric -> raw values


def _split_stats(samples: list[SampleScores], bin_width: float) -> SplitStats:
    means = {}
    hists = {}
    values = {}
    for metric in METRIC_NAMES:
        present = [s.get(metric) for s in samples if s.get(metric) is not None]
        values[metric] = present
        means[metric] = sum(present) / len(present) if present else None
        hists[metric] = histogram(present, bin_width)
    return SplitStats(count=len(samples), means=means, histograms=hists, values=values)


@dataclass(frozen=True)
class SplitReport:
    rewrite_threshold: float
    retrieval_threshold: float
    quantile_method: str
    bin_width: float
    n_classified: int
    n_excluded: int
    splits: dict  # SplitLabel -> SplitStats
    marginals: dict  # "rewrite_pass"/"rewrite_fail" -> SplitStats
    bin_ratios: dict  # metric -> per-bin rewrite_pass/rewrite_fail freq ratio


def build_split_report(
    samples: list[SampleScores],
    rewrite_threshold: float | None = None,
    retrieval_threshold: float = DEFAULT_RETRIEVAL_THRESHOLD,
    bin_width: float = DEFAULT_BIN_WIDTH,
) -> SplitReport:
    """Classify samples and aggregate per-split statistics.

    The rewrite threshold defaults to the 3rd quartile of the observed
    rewrite scores. Samples missing either the rewrite or the retrieval
    score are excluded from classification and counted.
    """
    if rewrite_threshold is None:
        rewrite_scores = [s.rouge1_r for s in samples if s.rouge1_r is not None]
        if not rewrite_scores:
            raise DataError("no rewrite scores present; cannot derive a threshold")
        rewrite_threshold = quartile(rewrite_scores, 3)

    by_label: dict[SplitLabel, list[SampleScores]] = {label: [] for label in SplitLabel}
    excluded = 0
    for s in samples:
        if s.rouge1_r is None or s.mrr is None:
            excluded += 1
            continue
        by_label[classify(s, rewrite_threshold, retrieval_threshold)].append(s)

    splits = {label: _split_stats(group, bin_width) for label, group in by_label.items()}
    marginals = {
        "rewrite_pass": _split_stats(
            by_label[SplitLabel.BOTH_PASS] + by_label[SplitLabel.REWRITE_ONLY], bin_width
        ),
        "rewrite_fail": _split_stats(
            by_label[SplitLabel.RETRIEVAL_ONLY] + by_label[SplitLabel.BOTH_FAIL], bin_width
        ),
    }

    bin_ratios = {}
    for metric in METRIC_NAMES:
        succ = marginals["rewrite_pass"].histograms[metric]
        fail = marginals["rewrite_fail"].histograms[metric]
        ratios = []
        for sf, ff in zip(succ.freqs, fail.freqs):
            if ff == 0.0:
                ratios.append(math.inf if sf > 0.0 else None)
            else:
                ratios.append(sf / ff)
        bin_ratios[metric] = ratios

    return SplitReport(
        rewrite_threshold=float(rewrite_threshold),
        retrieval_threshold=float(retrieval_threshold),
        quantile_method=QUANTILE_METHOD,
        bin_width=bin_width,
        n_classified=sum(st.count for st in splits.values()),
        n_excluded=excluded,
        splits=splits,
        marginals=marginals,
        bin_ratios=bin_ratios,
    )


@dataclass(frozen=True)
class RatioRange:
    """A metric value range whose relative frequency is compared between
    the rewrite-success and rewrite-fail populations."""

    metric: str
    lo: float
    hi: float
    include_lo: bool = True
    include_hi: bool = True

    def contains(self, v: float) -> bool:
        above = v > self.lo or (self.include_lo and v == self.lo)
        below = v < self.hi or (self.include_hi and v == self.hi)
        return above and below

    def describe(self) -> str:
        left = "[" if self.include_lo else "("
        right = "]" if self.include_hi else ")"
        return f"{self.metric} in {left}{self.lo:g}, {self.hi:g}{right}"


DEFAULT_RATIO_RANGES = (
    RatioRange("mrr", 0.0, 1.0, include_lo=False),
    RatioRange("f1", 0.3, 0.8),
    RatioRange("f1", 0.0, 0.1, include_hi=False),
)


@dataclass(frozen=True)
class RatioStatement:
    range: RatioRange
    success_freq: float | None
    fail_freq: float | None
    ratio: float | None
    infinite: bool
    undefined: bool  # a compared population is empty


def _range_freq(stats: SplitStats, rng: RatioRange) -> float | None:
    values = stats.values.get(rng.metric, [])
    if not values:
        return None
    return sum(1 for v in values if rng.contains(v)) / len(values)


def ratio_report(
    report: SplitReport, ranges=DEFAULT_RATIO_RANGES
) -> list[RatioStatement]:
    """How much more frequent each value range is when rewriting succeeds.

    Frequencies are relative to the samples of each population that carry
    the metric. An empty population makes a statement undefined; a zero
    fail-side frequency makes the ratio infinite.
    """
    statements = []
    for rng in ranges:
        if rng.metric not in METRIC_NAMES:
            raise ValueError(f"unknown metric {rng.metric!r}")
        succ = _range_freq(report.marginals["rewrite_pass"], rng)
        fail = _range_freq(report.marginals["rewrite_fail"], rng)
        if succ is None or fail is None:
            statements.append(
                RatioStatement(rng, succ, fail, ratio=None, infinite=False, undefined=True)
            )
        elif fail == 0.0:
            statements.append(
                RatioStatement(
                    rng,
                    succ,
                    fail,
                    ratio=math.inf if succ > 0.0 else None,
                    infinite=succ > 0.0,
                    undefined=succ == 0.0,
                )
            )
        else:
            statements.append(
                RatioStatement(rng, succ, fail, succ / fail, infinite=False, undefined=False)
            )
    return statements


def _stats_to_json(stats: SplitStats) -> dict:
    return {
        "count": stats.count,
        "means": dict(stats.means),
        "histograms": {
            metric: {
                "bin_lo": list(h.bin_lo),
                "bin_hi": list(h.bin_hi),
                "relative_frequency": list(h.freqs),
                "n": h.n,
                "empty": h.empty,
            }
            for metric, h in stats.histograms.items()
        },
    }


def _json_safe(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def report_to_json(report: SplitReport, statements: list[RatioStatement]) -> dict:
    """Serializable form of the report for analysis.json."""
    return {
        "rewrite_threshold": report.rewrite_threshold,
        "retrieval_threshold": report.retrieval_threshold,
        "quantile_method": report.quantile_method,
        "bin_width": report.bin_width,
        "n_classified": report.n_classified,
        "n_excluded": report.n_excluded,
        "splits": {label.value: _stats_to_json(st) for label, st in report.splits.items()},
        "marginals": {name: _stats_to_json(st) for name, st in report.marginals.items()},
        "bin_ratios": {
            metric: [_json_safe(r) for r in ratios]
            for metric, ratios in report.bin_ratios.items()
        },
        "ratio_statements": [
            {
                "range": s.range.describe(),
                "metric": s.range.metric,
                "success_freq": s.success_freq,
                "fail_freq": s.fail_freq,
                "ratio": _json_safe(s.ratio),
                "infinite": s.infinite,
                "undefined": s.undefined,
            }
            for s in statements
        ],
    }


def write_histograms_csv(report: SplitReport, path) -> None:
    """Flat, directly plottable per-bin frequencies for every split."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["split", "metric", "bin_lo", "bin_hi", "relative_frequency"])
        groups = [(label.value, st) for label, st in report.splits.items()]
        groups += list(report.marginals.items())
        for name, stats in groups:
            for metric in METRIC_NAMES:
                h = stats.histograms[metric]
                for lo, hi, freq in zip(h.bin_lo, h.bin_hi, h.freqs):
                    writer.writerow([name, metric, f"{lo:g}", f"{hi:g}", repr(freq)])
