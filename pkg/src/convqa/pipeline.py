"""End-to-end pipeline execution over a conversation corpus.

Conversations are independent and may run on parallel workers; turns
within one conversation are strictly sequential because each turn's
rewrite and answer feed the next turn's history. Output order is always
(conversation_no, turn_no), so results do not depend on scheduling.

Endpoint failures degrade per turn (rewrite falls back to the question,
generation to an empty answer) and are counted; a batch never aborts
because a model call failed.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .config import RunConfig
from .corpus import Conversation, RunRecord
from .errors import ConfigError
from .generate import assemble_context, extractive_answer, generate_external
from .index import Bm25Params, InvertedIndex, search
from .rewrite import (
    ConversationState,
    HistorySource,
    compose_history,
    rewrite_external,
    rewrite_none,
    rewrite_oracle,
)


@dataclass
class RunCounts:
    turns: int = 0
    rewrite_fallbacks: int = 0
    generate_fallbacks: int = 0
    transport_failures: int = 0

    def merge(self, other: "RunCounts") -> None:
        self.turns += other.turns
        self.rewrite_fallbacks += other.rewrite_fallbacks
        self.generate_fallbacks += other.generate_fallbacks
        self.transport_failures += other.transport_failures


def _run_conversation(
    conv: Conversation,
    index: InvertedIndex,
    texts: dict,
    params: Bm25Params,
    config: RunConfig,
    client,
) -> tuple[list[RunRecord], RunCounts]:
    rewrite_cfg = config["rewrite"]
    generate_cfg = config["generate"]
    mode = rewrite_cfg["mode"]
    state = ConversationState()
    counts = RunCounts()
    records = []
    for turn in conv.turns:
        if mode == "none":
            outcome = rewrite_none(state, turn.question, rewrite_cfg["h"])
        elif mode == "oracle":
            outcome = rewrite_oracle(turn)
        else:
            history = compose_history(
                state,
                HistorySource(rewrite_cfg["history_source"]),
                turn.question,
                rewrite_cfg["budget"],
            )
            outcome = rewrite_external(client, history, turn.question)
        counts.rewrite_fallbacks += outcome.fallback
        counts.transport_failures += outcome.failed

        ranking = search(index, params, outcome.retrieval_query, generate_cfg["top_k"])
        assembled = assemble_context(
            outcome.rewrite,
            [(pid, texts[pid]) for pid, _ in ranking],
            generate_cfg["budget"],
            generate_cfg["used_fraction"],
        )

        if generate_cfg["mode"] == "extractive":
            answer = extractive_answer(outcome.rewrite, list(assembled.included_texts))
        else:
            generated = generate_external(client, outcome.rewrite, assembled.context)
            counts.generate_fallbacks += generated.fallback
            counts.transport_failures += generated.failed
            answer = generated.answer

        state.record(turn.question, outcome.rewrite, answer)
        counts.turns += 1
        records.append(
            RunRecord(
                conversation_no=conv.conversation_no,
                turn_no=turn.turn_no,
                model_rewrite=outcome.rewrite,
                retrieval_query=outcome.retrieval_query,
                retrieved=tuple(ranking),
                context=assembled.context,
                passages_used=assembled.passages_used,
                model_answer=answer,
            )
        )
    return records, counts


def run_pipeline(
    conversations: list[Conversation],
    index: InvertedIndex,
    texts: dict,
    config: RunConfig,
    client=None,
) -> tuple[list[RunRecord], RunCounts]:
    """Run every conversation and return records sorted by
    (conversation_no, turn_no) plus aggregate counters."""
    needs_client = (
        config["rewrite"]["mode"] == "external" or config["generate"]["mode"] == "external"
    )
    if needs_client and client is None:
        raise ConfigError("external rewrite/generate mode requires a model endpoint")

    params = Bm25Params(k1=config["bm25"]["k1"], b=config["bm25"]["b"])
    jobs = config["run"]["jobs"]
    totals = RunCounts()
    per_conv: list[list[RunRecord]] = []

    if jobs == 1 or len(conversations) <= 1:
        for conv in conversations:
            records, counts = _run_conversation(conv, index, texts, params, config, client)
            per_conv.append(records)
            totals.merge(counts)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_conversation, conv, index, texts, params, config, client)
                for conv in conversations
            ]
            for future in futures:
                records, counts = future.result()
                per_conv.append(records)
                totals.merge(counts)

    flat = [record for records in per_conv for record in records]
    flat.sort(key=lambda r: (r.conversation_no, r.turn_no))
    return flat, totals
