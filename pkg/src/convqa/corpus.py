"""Data model and ingestion for conversations, passages, and run records.

All file formats are JSONL (one record per line) with snake_case field
names:

* conversations.jsonl: ``{"conversation_no": str, "turn_no": int,
  "question": str, "truth_answer"?: str, "truth_rewrite"?: str,
  "gold_passage_ids"?: [str]}``
* passages.jsonl: ``{"id": str, "text": str}``
* run.jsonl: one :class:`RunRecord` per line, optionally preceded by a
  single provenance line ``{"_header": {...}}``.

Capitalized field-name variants (``Conversation_no``, ``Turn_no``,
``Question``, ``Truth_answer``, ``Truth_rewrite``, ``Truth_passages``),
as found in common conversational QA dataset exports, are accepted on
import and mapped to the names above. Unknown fields are ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import DataError

# Import aliases applied to conversation records.
_FIELD_ALIASES = {
    "Conversation_no": "conversation_no",
    "Turn_no": "turn_no",
    "Question": "question",
    "Truth_answer": "truth_answer",
    "Truth_rewrite": "truth_rewrite",
    "Truth_passages": "gold_passage_ids",
}


@dataclass(frozen=True)
class Passage:
    """One retrievable text unit of the background collection."""

    id: str
    text: str


@dataclass(frozen=True)
class Turn:
    """One question of a conversation plus its optional ground truth."""

    turn_no: int
    question: str
    truth_answer: str | None = None
    truth_rewrite: str | None = None
    gold_passage_ids: frozenset[str] | None = None


@dataclass(frozen=True)
class Conversation:
    conversation_no: str
    turns: tuple[Turn, ...]


@dataclass(frozen=True)
class RunRecord:
    """Per-turn trace of one pipeline run."""

    conversation_no: str
    turn_no: int
    model_rewrite: str
    retrieval_query: str
    retrieved: tuple[tuple[str, float], ...]
    context: str
    passages_used: int
    model_answer: str

    def __post_init__(self):
        scores = [s for _, s in self.retrieved]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise DataError(
                f"retrieved scores must be non-increasing "
                f"({self.conversation_no}/{self.turn_no})"
            )
        if not 0 <= self.passages_used <= len(self.retrieved):
            raise DataError(
                f"passages_used out of range ({self.conversation_no}/{self.turn_no})"
            )


def _parse_line(raw: str, lineno: int, path) -> dict:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as e:
        raise DataError(f"{path}:{lineno}: malformed JSON: {e.msg}") from e
    if not isinstance(obj, dict):
        raise DataError(f"{path}:{lineno}: expected a JSON object")
    return obj


def _iter_jsonl(path) -> Iterator[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            if not raw.strip():
                continue
            yield lineno, _parse_line(raw, lineno, path)


def load_conversations(path) -> list[Conversation]:
    """Load a conversations.jsonl file.

    Records are grouped by conversation_no and sorted by turn_no; the
    conversations themselves keep first-appearance order. Turn numbers
    must be unique and, after sorting, contiguous starting at 1.
    """
    grouped: dict[str, dict[int, Turn]] = {}
    for lineno, obj in _iter_jsonl(path):
        obj = {_FIELD_ALIASES.get(k, k): v for k, v in obj.items()}
        try:
            conversation_no = str(obj["conversation_no"])
            turn_no = obj["turn_no"]
            question = obj["question"]
        except KeyError as e:
            raise DataError(f"{path}:{lineno}: missing field {e.args[0]!r}") from e
        if not isinstance(turn_no, int) or turn_no < 1:
            raise DataError(f"{path}:{lineno}: turn_no must be a positive integer")
        if not isinstance(question, str) or not question:
            raise DataError(f"{path}:{lineno}: question must be a non-empty string")
        gold = obj.get("gold_passage_ids")
        turn = Turn(
            turn_no=turn_no,
            question=question,
            truth_answer=obj.get("truth_answer"),
            truth_rewrite=obj.get("truth_rewrite"),
            gold_passage_ids=frozenset(str(g) for g in gold) if gold is not None else None,
        )
        turns = grouped.setdefault(conversation_no, {})
        if turn_no in turns:
            raise DataError(
                f"{path}:{lineno}: duplicate turn {turn_no} in conversation "
                f"{conversation_no!r}"
            )
        turns[turn_no] = turn

    conversations = []
    for conversation_no, turns in grouped.items():
        ordered = tuple(turns[k] for k in sorted(turns))
        expected = range(1, len(ordered) + 1)
        if [t.turn_no for t in ordered] != list(expected):
            raise DataError(
                f"conversation {conversation_no!r}: turn numbers must be "
                f"contiguous starting at 1, got {sorted(turns)}"
            )
        conversations.append(Conversation(conversation_no, ordered))
    return conversations


def load_passages(path) -> Iterator[Passage]:
    """Stream passages from a passages.jsonl file, in file order.

    Duplicate or missing ids are errors; only the ids are retained for
    the duplicate check, so the collection itself need not fit in memory.
    """
    seen: set[str] = set()
    for lineno, obj in _iter_jsonl(path):
        if "id" not in obj:
            raise DataError(f"{path}:{lineno}: missing field 'id'")
        if "text" not in obj:
            raise DataError(f"{path}:{lineno}: missing field 'text'")
        pid = str(obj["id"])
        if pid in seen:
            raise DataError(f"{path}:{lineno}: duplicate passage id {pid!r}")
        seen.add(pid)
        yield Passage(id=pid, text=str(obj["text"]))


def _record_to_obj(r: RunRecord) -> dict:
    return {
        "conversation_no": r.conversation_no,
        "turn_no": r.turn_no,
        "model_rewrite": r.model_rewrite,
        "retrieval_query": r.retrieval_query,
        "retrieved": [[pid, score] for pid, score in r.retrieved],
        "context": r.context,
        "passages_used": r.passages_used,
        "model_answer": r.model_answer,
    }


def dumps_canonical(obj: dict) -> str:
    """Serialize one JSONL line deterministically (sorted keys, no spaces)."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def write_run(path, records: Iterable[RunRecord], header: dict | None = None) -> None:
    """Write run records as JSONL; byte-stable for identical input."""
    with open(path, "w", encoding="utf-8") as f:
        if header is not None:
            f.write(dumps_canonical({"_header": header}) + "\n")
        for r in records:
            f.write(dumps_canonical(_record_to_obj(r)) + "\n")


def read_run(path) -> list[RunRecord]:
    """Read run records back; inverse of :func:`write_run`."""
    records = []
    for lineno, obj in _iter_jsonl(path):
        if "_header" in obj:
            continue
        try:
            records.append(
                RunRecord(
                    conversation_no=str(obj["conversation_no"]),
                    turn_no=int(obj["turn_no"]),
                    model_rewrite=obj["model_rewrite"],
                    retrieval_query=obj["retrieval_query"],
                    retrieved=tuple((pid, float(score)) for pid, score in obj["retrieved"]),
                    context=obj["context"],
                    passages_used=int(obj["passages_used"]),
                    model_answer=obj["model_answer"],
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"{path}:{lineno}: malformed run record: {e}") from e
    return records


def read_header(path) -> dict | None:
    """Return the provenance header of a JSONL output file, if present."""
    with open(path, "r", encoding="utf-8") as f:
        for raw in f:
            if not raw.strip():
                continue
            obj = json.loads(raw)
            if isinstance(obj, dict) and "_header" in obj:
                return obj["_header"]
            return None
    return None
