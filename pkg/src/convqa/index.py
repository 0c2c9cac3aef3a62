"""Inverted index and BM25 ranking over a passage collection.

Documents and queries are both tokenized with
:func:`convqa.text.rouge_tokenize`; no stopwords are removed. The inverse
document frequency is the nonnegative variant

    idf(t) = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))

rather than the classical log-ratio, which goes negative for terms in
more than half the collection. Scores are

    score(q, d) = sum_i idf(q_i) * tf(q_i, d) * (k1 + 1)
                  / (tf(q_i, d) + k1 * (1 - b + b * |d| / avgdl))

summed over query token positions, so repeated query terms count once per
occurrence.

Snapshot format (all integers little-endian, bit-stable across runs):

    magic              8 bytes  b"CQAIDX1\\n"
    header             u32 length + that many bytes of UTF-8 JSON
                       {"format": 1, "n_docs": N, "n_terms": T}
    docs section       N records, ascending passage id:
                       u32 id length, id bytes, u32 token count
    terms section      T records, ascending term (code-point order):
                       u32 term length, term bytes, u32 df,
                       df x u32 doc index (ascending), df x u32 tf
"""

from __future__ import annotations

import json
import math
import struct
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .corpus import Passage
from .errors import DataError
from .text import rouge_tokenize

MAGIC = b"CQAIDX1\n"
DEFAULT_TOP_K = 10


@dataclass(frozen=True)
class Bm25Params:
    """Free parameters of the ranking function."""

    k1: float = 0.82
    b: float = 0.68

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError("k1 must be >= 0")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must be in [0, 1]")


def _idf(n_docs: int, df: int) -> float:
    return math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))


class InvertedIndex:
    """Immutable term-to-document index.

    Documents are held in ascending passage-id order, so posting lists
    sorted by internal index are sorted by id and a stable sort on scores
    breaks ties by ascending id for free.
    """

    def __init__(self, ids: list[str], doc_len: np.ndarray, postings: dict):
        self.ids: tuple[str, ...] = tuple(ids)
        self._id_to_idx = {pid: i for i, pid in enumerate(self.ids)}
        self._doc_len = doc_len  # int64, one entry per doc
        self._postings = postings  # term -> (int32 doc indexes, float64 tfs)
        total = int(doc_len.sum())
        self.avgdl: float = total / len(ids) if ids else 0.0

    @property
    def n_docs(self) -> int:
        return len(self.ids)

    @property
    def vocabulary_size(self) -> int:
        return len(self._postings)

    @property
    def terms(self) -> list[str]:
        return sorted(self._postings)

    def doc_length(self, passage_id: str) -> int:
        return int(self._doc_len[self._require(passage_id)])

    def doc_frequency(self, term: str) -> int:
        entry = self._postings.get(term)
        return len(entry[0]) if entry is not None else 0

    def postings(self, term: str) -> list[tuple[str, int]]:
        """Posting list of a term as (passage id, tf), ascending by id."""
        entry = self._postings.get(term)
        if entry is None:
            return []
        idx, tf = entry
        return [(self.ids[i], int(f)) for i, f in zip(idx, tf)]

    def _require(self, passage_id: str) -> int:
        try:
            return self._id_to_idx[passage_id]
        except KeyError:
            raise DataError(f"unknown passage id {passage_id!r}") from None


def build_index(passages: Iterable[Passage]) -> InvertedIndex:
    """Build the index from a passage stream; ids must be unique."""
    docs: dict[str, Counter] = {}
    for p in passages:
        if p.id in docs:
            raise DataError(f"duplicate passage id {p.id!r}")
        docs[p.id] = Counter(rouge_tokenize(p.text))

    ids = sorted(docs)
    doc_len = np.array([sum(docs[pid].values()) for pid in ids], dtype=np.int64)

    by_term: dict[str, tuple[list[int], list[int]]] = {}
    for i, pid in enumerate(ids):
        for term, tf in docs[pid].items():
            entry = by_term.setdefault(term, ([], []))
            entry[0].append(i)
            entry[1].append(tf)

    postings = {
        term: (np.array(idx, dtype=np.int32), np.array(tf, dtype=np.float64))
        for term, (idx, tf) in by_term.items()
    }
    return InvertedIndex(ids, doc_len, postings)


def _length_norm(index: InvertedIndex, params: Bm25Params) -> np.ndarray:
    # k1 * (1 - b + b * |d| / avgdl) for every document; avgdl 0 only when
    # every document is empty, in which case all tfs are 0 anyway.
    avgdl = index.avgdl if index.avgdl > 0 else 1.0
    return params.k1 * (1.0 - params.b + params.b * (index._doc_len / avgdl))


def bm25_score(
    index: InvertedIndex, params: Bm25Params, query_terms: Iterable[str], doc: str
) -> float:
    """Score one document against a token sequence.

    Query terms absent from the collection (or from the document)
    contribute 0; the result is finite and nonnegative.
    """
    i = index._require(doc)
    avgdl = index.avgdl if index.avgdl > 0 else 1.0
    dl = float(index._doc_len[i])
    norm = params.k1 * (1.0 - params.b + params.b * (dl / avgdl))
    k1p1 = params.k1 + 1.0
    score = 0.0
    for term in query_terms:
        entry = index._postings.get(term)
        if entry is None:
            continue
        idx, tfs = entry
        pos = np.searchsorted(idx, i)
        if pos == len(idx) or idx[pos] != i:
            continue
        tf = float(tfs[pos])
        idf = _idf(index.n_docs, len(idx))
        score += idf * (tf * k1p1) / (tf + norm)
    return score


def search(
    index: InvertedIndex, params: Bm25Params, query: str, k: int = DEFAULT_TOP_K
) -> list[tuple[str, float]]:
    """Rank the k highest-scoring documents for a query string.

    Only documents with positive score are returned, so the ranking may be
    shorter than k. Ties are broken by ascending passage id.
    """
    if k < 1:
        raise ValueError("k must be positive")
    terms = rouge_tokenize(query)
    if not terms or index.n_docs == 0:
        return []

    scores = np.zeros(index.n_docs, dtype=np.float64)
    norm = _length_norm(index, params)
    k1p1 = params.k1 + 1.0
    for term in terms:
        entry = index._postings.get(term)
        if entry is None:
            continue
        idx, tf = entry
        idf = _idf(index.n_docs, len(idx))
        scores[idx] += idf * (tf * k1p1) / (tf + norm[idx])

    positive = np.flatnonzero(scores > 0.0)
    if positive.size == 0:
        return []
    # Stable sort on descending score keeps ascending doc index (and hence
    # ascending passage id) within ties.
    order = positive[np.argsort(-scores[positive], kind="stable")][:k]
    return [(index.ids[i], float(scores[i])) for i in order]


def save_index(index: InvertedIndex, path) -> None:
    """Write the snapshot described in the module docstring."""
    header = json.dumps(
        {"format": 1, "n_docs": index.n_docs, "n_terms": index.vocabulary_size},
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        for i, pid in enumerate(index.ids):
            raw = pid.encode("utf-8")
            f.write(struct.pack("<I", len(raw)))
            f.write(raw)
            f.write(struct.pack("<I", int(index._doc_len[i])))
        for term in sorted(index._postings):
            idx, tf = index._postings[term]
            raw = term.encode("utf-8")
            f.write(struct.pack("<I", len(raw)))
            f.write(raw)
            f.write(struct.pack("<I", len(idx)))
            f.write(idx.astype("<u4").tobytes())
            f.write(tf.astype("<u4").tobytes())


def load_index(path) -> InvertedIndex:
    """Read a snapshot produced by :func:`save_index`."""
    with open(path, "rb") as f:
        data = f.read()
    if not data.startswith(MAGIC):
        raise DataError(f"{path}: not an index snapshot (bad magic)")
    off = len(MAGIC)

    def take(n: int) -> bytes:
        nonlocal off
        if off + n > len(data):
            raise DataError(f"{path}: truncated snapshot")
        chunk = data[off : off + n]
        off += n
        return chunk

    def take_u32() -> int:
        return struct.unpack("<I", take(4))[0]

    header = json.loads(take(take_u32()).decode("utf-8"))
    if header.get("format") != 1:
        raise DataError(f"{path}: unsupported snapshot format {header.get('format')!r}")

    ids = []
    lens = []
    for _ in range(header["n_docs"]):
        ids.append(take(take_u32()).decode("utf-8"))
        lens.append(take_u32())
    doc_len = np.array(lens, dtype=np.int64)

    postings = {}
    for _ in range(header["n_terms"]):
        term = take(take_u32()).decode("utf-8")
        df = take_u32()
        idx = np.frombuffer(take(4 * df), dtype="<u4").astype(np.int32)
        tf = np.frombuffer(take(4 * df), dtype="<u4").astype(np.float64)
        postings[term] = (idx, tf)
    if off != len(data):
        raise DataError(f"{path}: trailing bytes after snapshot")
    return InvertedIndex(ids, doc_len, postings)
