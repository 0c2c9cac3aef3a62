"""Conversation-history composition and question-rewriting strategies.

Three modes cover every run configuration:

* ``none``: the question is used as-is; retrieval may still see a window
  of the last h utterances (h=1 degenerates to the bare question).
* ``oracle``: the ground-truth rewrite stands in for the rewriter.
* ``external``: a rewriter service is called over the wire protocol with
  the composed history.

History units are individual utterances: a question and an answer count
separately, so h=7 spans three full prior turns plus the current
question.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .corpus import Turn
from .errors import DataError, TransportError
from .text import budget_tokens


class HistorySource(str, Enum):
    """Which prior utterances feed the rewriter."""

    QUESTIONS = "q"
    QUESTIONS_AND_ANSWERS = "q_ma"
    REWRITES = "mr"
    REWRITES_AND_ANSWERS = "mr_ma"


@dataclass(frozen=True)
class CompletedTurn:
    question: str
    rewrite: str
    answer: str


@dataclass
class ConversationState:
    """Per-conversation history of completed turns, appended in order."""

    completed: list[CompletedTurn] = field(default_factory=list)

    def record(self, question: str, rewrite: str, answer: str) -> None:
        self.completed.append(CompletedTurn(question, rewrite, answer))


@dataclass(frozen=True)
class RewriteOutcome:
    """The scored rewrite plus the (possibly different) retrieval query.

    ``fallback`` marks an empty rewriter response replaced by the original
    question; ``failed`` marks transport exhaustion.
    """

    rewrite: str
    retrieval_query: str
    fallback: bool = False
    failed: bool = False


def _history_utterances(state: ConversationState, source: HistorySource) -> list[str]:
    utts: list[str] = []
    for t in state.completed:
        if source in (HistorySource.QUESTIONS, HistorySource.QUESTIONS_AND_ANSWERS):
            utts.append(t.question)
        else:
            utts.append(t.rewrite)
        if source in (
            HistorySource.QUESTIONS_AND_ANSWERS,
            HistorySource.REWRITES_AND_ANSWERS,
        ):
            utts.append(t.answer)
    # Empty utterances (e.g. a generator fallback answer) carry no signal
    # and would distort window counting, so they are dropped.
    return [u for u in utts if u]


def compose_history(
    state: ConversationState, source: HistorySource, question: str, budget: int
) -> list[str]:
    """Select rewriter input utterances, newest kept first under a budget.

    The returned list always ends with the current question; oldest
    utterances are dropped until the total whitespace-token count fits the
    budget.
    """
    if budget_tokens(question) > budget:
        raise ValueError(
            f"budget {budget} cannot fit the question ({budget_tokens(question)} tokens)"
        )
    utts = _history_utterances(state, source) + [question]
    while len(utts) > 1 and sum(budget_tokens(u) for u in utts) > budget:
        utts.pop(0)
    return utts


def rewrite_none(state: ConversationState, question: str, h: int = 1) -> RewriteOutcome:
    """No rewriting: score the bare question, retrieve with an h-utterance
    window over the question/answer interleaving."""
    if h < 1:
        raise ValueError("h must be >= 1")
    interleaved = _history_utterances(state, HistorySource.QUESTIONS_AND_ANSWERS)
    window = (interleaved + [question])[-h:]
    return RewriteOutcome(rewrite=question, retrieval_query=" ".join(window))


def rewrite_oracle(turn: Turn) -> RewriteOutcome:
    """Use the ground-truth rewrite for both scoring and retrieval."""
    if turn.truth_rewrite is None:
        raise DataError(f"turn {turn.turn_no} has no truth_rewrite (oracle mode needs gold data)")
    return RewriteOutcome(rewrite=turn.truth_rewrite, retrieval_query=turn.truth_rewrite)


def rewrite_external(client, history: list[str], question: str) -> RewriteOutcome:
    """Delegate rewriting to a service; degrade to the question on failure.

    ``client`` needs a ``rewrite(utterances) -> str`` method. An empty
    response falls back to the original question; transport exhaustion
    additionally marks the outcome failed.
    """
    try:
        response = client.rewrite(history).strip()
    except TransportError:
        return RewriteOutcome(
            rewrite=question, retrieval_query=question, fallback=True, failed=True
        )
    if not response:
        return RewriteOutcome(rewrite=question, retrieval_query=question, fallback=True)
    return RewriteOutcome(rewrite=response, retrieval_query=response)
