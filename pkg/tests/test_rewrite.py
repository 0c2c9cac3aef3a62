from __future__ import annotations

import pytest

from convqa.corpus import Turn
from convqa.errors import DataError, TransportError
from convqa.rewrite import (
    ConversationState,
    HistorySource,
    compose_history,
    rewrite_external,
    rewrite_none,
    rewrite_oracle,
)
from convqa.text import budget_tokens


def state_with(*turns):
    state = ConversationState()
    for q, mr, ma in turns:
        state.record(q, mr, ma)
    return state


class TestComposeHistory:
    def test_first_turn_only_question(self):
        for source in HistorySource:
            assert compose_history(ConversationState(), source, "q?", 100) == ["q?"]

    def test_sources_select_utterances(self):
        state = state_with(("q1", "mr1", "ma1"))
        q = "q2"
        assert compose_history(state, HistorySource.QUESTIONS, q, 100) == ["q1", "q2"]
        assert compose_history(state, HistorySource.QUESTIONS_AND_ANSWERS, q, 100) == [
            "q1", "ma1", "q2",
        ]
        assert compose_history(state, HistorySource.REWRITES, q, 100) == ["mr1", "q2"]
        assert compose_history(state, HistorySource.REWRITES_AND_ANSWERS, q, 100) == [
            "mr1", "ma1", "q2",
        ]

    def test_truncates_from_the_front(self):
        state = state_with(
            ("first question words", "mr", "first answer words"),
            ("second question words", "mr", "second answer words"),
            ("third question words", "mr", "third answer words"),
        )
        # budget admits only the last prior pair plus the question
        out = compose_history(state, HistorySource.QUESTIONS_AND_ANSWERS, "now?", 7)
        assert out == ["third question words", "third answer words", "now?"]
        assert sum(budget_tokens(u) for u in out) <= 7

    def test_question_always_retained(self):
        state = state_with(("q1 q1 q1", "m", "a1 a1 a1"))
        assert compose_history(state, HistorySource.QUESTIONS_AND_ANSWERS, "q2", 1) == ["q2"]

    def test_budget_too_small_for_question(self):
        with pytest.raises(ValueError, match="cannot fit the question"):
            compose_history(ConversationState(), HistorySource.QUESTIONS, "three word query", 2)

    def test_questions_source_has_no_model_text(self):
        state = state_with(("q1", "MODEL_REWRITE", "MODEL_ANSWER"))
        out = compose_history(state, HistorySource.QUESTIONS, "q2", 100)
        assert all("MODEL" not in u for u in out)

    def test_empty_answers_dropped(self):
        state = state_with(("q1", "mr1", ""))
        out = compose_history(state, HistorySource.QUESTIONS_AND_ANSWERS, "q2", 100)
        assert out == ["q1", "q2"]


class TestRewriteNone:
    def test_h1_query_is_question(self):
        state = state_with(("q1", "m1", "a1"), ("q2", "m2", "a2"))
        outcome = rewrite_none(state, "current?", h=1)
        assert outcome.rewrite == "current?"
        assert outcome.retrieval_query == "current?"

    def test_h7_spans_whole_short_history(self):
        state = state_with(("q1", "m1", "a1"), ("q2", "m2", "a2"))
        outcome = rewrite_none(state, "q3", h=7)
        # 2 prior turns = 4 utterances in the question/answer interleaving
        assert outcome.retrieval_query == "q1 a1 q2 a2 q3"

    def test_h3_window(self):
        state = state_with(("q1", "m1", "a1"), ("q2", "m2", "a2"))
        outcome = rewrite_none(state, "q3", h=3)
        assert outcome.retrieval_query == "q2 a2 q3"

    def test_rewrite_field_is_always_the_question(self):
        state = state_with(("q1", "m1", "a1"))
        for h in (1, 2, 5):
            assert rewrite_none(state, "the question", h).rewrite == "the question"

    def test_h_validation(self):
        with pytest.raises(ValueError):
            rewrite_none(ConversationState(), "q", h=0)


class TestRewriteOracle:
    def test_uses_truth(self):
        turn = Turn(1, "what?", truth_rewrite="What were the circumstances of Ryan Dunn's death?")
        outcome = rewrite_oracle(turn)
        assert outcome.rewrite == turn.truth_rewrite
        assert outcome.retrieval_query == turn.truth_rewrite

    def test_missing_truth_is_error(self):
        with pytest.raises(DataError, match="truth_rewrite"):
            rewrite_oracle(Turn(1, "what?"))

    def test_oracle_scores_one_against_itself(self):
        from convqa.metrics import rouge1_recall

        outcome = rewrite_oracle(Turn(1, "q", truth_rewrite="resolved question here"))
        assert rouge1_recall(outcome.rewrite, "resolved question here") == 1.0


class _StubClient:
    def __init__(self, response=None, error=False):
        self.response = response
        self.error = error
        self.calls = []

    def rewrite(self, utterances):
        self.calls.append(list(utterances))
        if self.error:
            raise TransportError("boom")
        return self.response


class TestRewriteExternal:
    def test_echo_like_stub(self):
        client = _StubClient(response="q?")
        outcome = rewrite_external(client, ["q?"], "q?")
        assert outcome.rewrite == "q?"
        assert not outcome.fallback and not outcome.failed

    def test_stub_response_used_verbatim_stripped(self):
        client = _StubClient(response="  What were the circumstances of Dunn's death? \n")
        outcome = rewrite_external(client, ["ctx", "q?"], "q?")
        assert outcome.rewrite == "What were the circumstances of Dunn's death?"
        assert outcome.retrieval_query == outcome.rewrite

    def test_empty_response_falls_back(self):
        outcome = rewrite_external(_StubClient(response=""), ["q?"], "q?")
        assert outcome.rewrite == "q?"
        assert outcome.fallback and not outcome.failed

    def test_transport_failure_marks_failed(self):
        outcome = rewrite_external(_StubClient(error=True), ["q?"], "q?")
        assert outcome.rewrite == "q?"
        assert outcome.retrieval_query == "q?"
        assert outcome.fallback and outcome.failed

    def test_history_passed_through(self):
        client = _StubClient(response="rewritten")
        rewrite_external(client, ["u1", "u2", "q?"], "q?")
        assert client.calls == [["u1", "u2", "q?"]]
