"""Evaluation metrics: unigram recall, LCS F1, token F1, exact match, MRR.

Metric and normalization choices are pinned by golden tests. The ROUGE
scores use :func:`convqa.text.rouge_tokenize` with no stopword removal and
no stemming; token F1 and exact match use
:func:`convqa.text.squad_normalize`.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .corpus import Conversation, RunRecord, dumps_canonical
from .errors import DataError
from .text import rouge_tokenize, squad_normalize

METRIC_NAMES = ("rouge1_r", "mrr", "f1", "em", "rougeL_f1")


def rouge1_recall(candidate: str, reference: str) -> float:
    """Clipped unigram recall of candidate against reference.

    sum_t min(count_cand(t), count_ref(t)) / |reference tokens|
    """
    ref = rouge_tokenize(reference)
    if not ref:
        raise ValueError("rouge1_recall reference is empty after tokenization")
    cand = Counter(rouge_tokenize(candidate))
    overlap = sum((Counter(ref) & cand).values())
    return overlap / len(ref)


def _lcs_len(a: list[str], b: list[str]) -> int:
    # Single-row DP over the shorter sequence.
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    row = [0] * (len(b) + 1)
    for x in a:
        prev = 0
        for j, y in enumerate(b, start=1):
            cur = row[j]
            row[j] = prev + 1 if x == y else max(row[j], row[j - 1])
            prev = cur
    return row[-1]


def rougeL_f1(candidate: str, reference: str) -> float:
    """F1 over the longest common subsequence of the two token sequences.

    2 * LCS / (|candidate| + |reference|); 0 when either side is empty.
    """
    cand = rouge_tokenize(candidate)
    ref = rouge_tokenize(reference)
    if not cand or not ref:
        return 0.0
    return 2 * _lcs_len(cand, ref) / (len(cand) + len(ref))


def token_f1(candidate: str, reference: str) -> float:
    """Bag-of-token F1 over normalized answers.

    Both sides are normalized and whitespace-split; F1 = 2PR/(P+R) with
    clipped bag overlap. When both sides normalize to nothing the answers
    agree (1.0); when only one does they don't (0.0).
    """
    cand = squad_normalize(candidate).split()
    ref = squad_normalize(reference).split()
    if not cand or not ref:
        return float(cand == ref)
    overlap = sum((Counter(cand) & Counter(ref)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(cand)
    recall = overlap / len(ref)
    return 2 * precision * recall / (precision + recall)


def exact_match(candidate: str, reference: str) -> int:
    """1 iff the two answers are identical after normalization."""
    return int(squad_normalize(candidate) == squad_normalize(reference))


def mrr(retrieved_ids: Iterable[str], gold_ids: Iterable[str]) -> float:
    """Reciprocal rank of the first retrieved id that is in gold_ids.

    Any gold id counts as relevant; 0.0 when none is retrieved. The
    per-sample values are averaged by the caller. An empty gold set makes
    the metric undefined rather than zero.
    """
    gold = set(gold_ids)
    if not gold:
        raise ValueError("mrr gold set is empty")
    for rank, pid in enumerate(retrieved_ids, start=1):
        if pid in gold:
            return 1.0 / rank
    return 0.0


@dataclass(frozen=True)
class SampleScores:
    """Per-turn metric vector; None marks a metric whose ground truth is
    missing for that turn."""

    conversation_no: str
    turn_no: int
    rouge1_r: float | None
    mrr: float | None
    f1: float | None
    em: int | None
    rougeL_f1: float | None

    def get(self, metric: str):
        if metric not in METRIC_NAMES:
            raise KeyError(metric)
        return getattr(self, metric)


@dataclass(frozen=True)
class ScoreSummary:
    n_samples: int
    means: dict  # metric -> mean over samples with ground truth, or None
    skipped: dict  # metric -> count of samples without ground truth


def score_run(
    records: Iterable[RunRecord], conversations: Iterable[Conversation]
) -> tuple[list[SampleScores], ScoreSummary]:
    """Score one run record per corpus turn.

    The run and the corpus must cover exactly the same (conversation_no,
    turn_no) keys. Metrics whose ground truth is absent are None in the
    per-sample vector, excluded from the means, and counted in
    ``skipped``.
    """
    turns = {}
    for conv in conversations:
        for turn in conv.turns:
            turns[(conv.conversation_no, turn.turn_no)] = turn

    records = list(records)
    record_keys = [(r.conversation_no, r.turn_no) for r in records]
    if len(set(record_keys)) != len(record_keys):
        raise DataError("duplicate (conversation_no, turn_no) keys in run")
    missing = [k for k in record_keys if k not in turns]
    if missing:
        raise DataError(f"run records without corpus turns: {sorted(missing)[:5]}")
    extra = sorted(set(turns) - set(record_keys))
    if extra:
        raise DataError(f"corpus turns without run records: {extra[:5]}")

    samples = []
    for r in records:
        turn = turns[(r.conversation_no, r.turn_no)]

        rouge1 = None
        if turn.truth_rewrite is not None and rouge_tokenize(turn.truth_rewrite):
            rouge1 = rouge1_recall(r.model_rewrite, turn.truth_rewrite)

        reciprocal = None
        if turn.gold_passage_ids:
            reciprocal = mrr([pid for pid, _ in r.retrieved], turn.gold_passage_ids)

        f1 = em = rougeL = None
        if turn.truth_answer is not None:
            f1 = token_f1(r.model_answer, turn.truth_answer)
            em = exact_match(r.model_answer, turn.truth_answer)
            rougeL = rougeL_f1(r.model_answer, turn.truth_answer)

        samples.append(
            SampleScores(
                conversation_no=r.conversation_no,
                turn_no=r.turn_no,
                rouge1_r=rouge1,
                mrr=reciprocal,
                f1=f1,
                em=em,
                rougeL_f1=rougeL,
            )
        )

    means = {}
    skipped = {}
    for metric in METRIC_NAMES:
        values = [s.get(metric) for s in samples if s.get(metric) is not None]
        means[metric] = sum(values) / len(values) if values else None
        skipped[metric] = len(samples) - len(values)
    return samples, ScoreSummary(n_samples=len(samples), means=means, skipped=skipped)


def write_scores(path, samples: Iterable[SampleScores], header: dict | None = None) -> None:
    """Write one SampleScores JSONL line per turn, keyed by
    (conversation_no, turn_no); missing metrics serialize as null."""
    with open(path, "w", encoding="utf-8") as f:
        if header is not None:
            f.write(dumps_canonical({"_header": header}) + "\n")
        for s in samples:
            obj = {
                "conversation_no": s.conversation_no,
                "turn_no": s.turn_no,
                **{m: s.get(m) for m in METRIC_NAMES},
            }
            f.write(dumps_canonical(obj) + "\n")


def read_scores(path) -> list[SampleScores]:
    samples = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            if not raw.strip():
                continue
            obj = json.loads(raw)
            if "_header" in obj:
                continue
            try:
                samples.append(
                    SampleScores(
                        conversation_no=str(obj["conversation_no"]),
                        turn_no=int(obj["turn_no"]),
                        rouge1_r=obj["rouge1_r"],
                        mrr=obj["mrr"],
                        f1=obj["f1"],
                        em=obj["em"],
                        rougeL_f1=obj["rougeL_f1"],
                    )
                )
            except (KeyError, TypeError, ValueError) as e:
                raise DataError(f"{path}:{lineno}: malformed score record: {e}") from e
    return samples
