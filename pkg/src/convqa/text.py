"""Tokenization and normalization primitives.

Three separate views of a string are used throughout the package and must
not be conflated:

* :func:`rouge_tokenize` feeds the ROUGE metrics and the retrieval index.
* :func:`squad_normalize` feeds the answer-overlap metrics (token F1 and
  exact match).
* :func:`budget_tokens` is the unit of the input-size budget used when
  composing rewriter history and assembling generation contexts.
"""

from __future__ import annotations

import re
import string
import unicodedata

# Maximal runs of alphanumeric characters (Unicode general categories L*/N*).
# [^\W_] is exactly the set of characters for which str.isalnum() is true.
_ALNUM_RUN = re.compile(r"[^\W_]+", re.UNICODE)

_ARTICLE = re.compile(r"\b(a|an|the)\b")

# Default input budget, in whitespace tokens.
DEFAULT_BUDGET = 1024


def rouge_tokenize(text: str) -> list[str]:
    """Lowercase and split on every run of non-alphanumeric characters.

    Apostrophes split words ("Dunn's" -> ["dunn", "s"]) and digits are kept
    as tokens. Total function: any input yields a (possibly empty) list of
    non-empty lowercase tokens.
    """
    return _ALNUM_RUN.findall(text.lower())


def _is_punct(ch: str) -> bool:
    # Unicode punctuation categories plus the ASCII punctuation set, which
    # also contains symbol characters such as "$" and "+".
    return ch in string.punctuation or unicodedata.category(ch).startswith("P")


def squad_normalize(text: str) -> str:
    """Normalize an answer string for token-F1 / exact-match scoring.

    Lowercases, deletes punctuation in place (no splitting: "Dunn's" ->
    "dunns"), removes standalone articles (a/an/the), and collapses
    whitespace. Idempotent.
    """
    text = text.lower()
    text = "".join(ch for ch in text if not _is_punct(ch))
    text = _ARTICLE.sub(" ", text)
    return " ".join(text.split())


def budget_tokens(text: str) -> int:
    """Count whitespace-delimited chunks.

    An approximation of model subword counts used for all budget
    accounting; the budget values themselves are configurable so they can
    be calibrated against a real tokenizer.
    """
    return len(text.split())
