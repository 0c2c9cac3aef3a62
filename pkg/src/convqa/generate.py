"""Context assembly under a token budget and answer generation.

The assembled context is the rewritten question followed by the retrieved
passages in rank order, newline-separated. When the budget runs out the
first overflowing passage is cut at a token boundary to exactly fill it
and everything after is dropped, mirroring how a generation model with a
fixed input size effectively sees only the first few passages.

Answers come either from a deterministic extractive baseline (the best
sentence of the included passages) or from an external generator service.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

from .errors import TransportError
from .text import budget_tokens, rouge_tokenize

DEFAULT_USED_FRACTION = 0.5

_TOKEN = re.compile(r"\S+")
_SENTENCE_BREAK = re.compile(r"(?<=[.!?])(?=\s)")


@dataclass(frozen=True)
class AssembledContext:
    """Generator input plus bookkeeping about which passages made it in.

    ``passages_used`` counts passages with at least ``used_fraction`` of
    their tokens included; ``included_texts`` holds the context segment of
    each included passage (truncated for the last one, verbatim
    otherwise).
    """

    context: str
    passages_used: int
    included_ids: tuple[str, ...]
    included_texts: tuple[str, ...]


def _truncate_tokens(text: str, n: int) -> str:
    """First n whitespace tokens of text, as a verbatim prefix."""
    end = 0
    for i, m in enumerate(_TOKEN.finditer(text)):
        if i == n:
            break
        end = m.end()
    return text[:end]


def assemble_context(
    rewrite: str,
    passages: list[tuple[str, str]],
    budget: int,
    used_fraction: float = DEFAULT_USED_FRACTION,
) -> AssembledContext:
    """Concatenate the rewrite and ranked (id, text) passages into a budgeted context."""
    rewrite_cost = budget_tokens(rewrite)
    if rewrite_cost > budget:
        raise ValueError(f"budget {budget} cannot fit the rewrite ({rewrite_cost} tokens)")

    remaining = budget - rewrite_cost
    included_ids: list[str] = []
    included_texts: list[str] = []
    used = 0
    for pid, text in passages:
        cost = budget_tokens(text)
        if cost <= remaining:
            included_ids.append(pid)
            included_texts.append(text)
            remaining -= cost
            used += 1  # fully included
        else:
            if remaining > 0:
                included_ids.append(pid)
                included_texts.append(_truncate_tokens(text, remaining))
                if remaining / cost >= used_fraction:
                    used += 1
                remaining = 0
            break
    context = "\n".join([rewrite, *included_texts])
    return AssembledContext(
        context=context,
        passages_used=used,
        included_ids=tuple(included_ids),
        included_texts=tuple(included_texts),
    )


def split_sentences(text: str) -> list[str]:
    """Split after '.', '!' or '?' followed by whitespace; delimiters stay
    with their sentence. Abbreviations like "e.g. " split too; known
    limitation of the rule."""
    return [part.strip() for part in _SENTENCE_BREAK.split(text) if part.strip()]


def _overlap_f1(a: list[str], b: list[str]) -> float:
    if not a or not b:
        return 0.0
    overlap = sum((Counter(a) & Counter(b)).values())
    return 2 * overlap / (len(a) + len(b))


def extractive_answer(rewrite: str, passages: list[str]) -> str:
    """Pick the passage sentence with the highest token-F1 overlap with
    the rewrite.

    Ties go to the earlier passage, then the earlier sentence. Empty
    passages yield an empty answer.
    """
    query = rouge_tokenize(rewrite)
    best = ""
    best_score = -1.0
    for text in passages:
        for sentence in split_sentences(text):
            score = _overlap_f1(rouge_tokenize(sentence), query)
            if score > best_score:
                best, best_score = sentence, score
    return best


@dataclass(frozen=True)
class GeneratedAnswer:
    """External-generator result with degradation flags."""

    answer: str
    fallback: bool = False
    failed: bool = False


def generate_external(client, rewrite: str, context: str) -> GeneratedAnswer:
    """Delegate generation to a service; degrade to an empty answer.

    ``client`` needs a ``generate(question, context) -> str`` method.
    """
    try:
        answer = client.generate(rewrite, context)
    except TransportError:
        return GeneratedAnswer(answer="", fallback=True, failed=True)
    if not answer:
        return GeneratedAnswer(answer="", fallback=True)
    return GeneratedAnswer(answer=answer)
