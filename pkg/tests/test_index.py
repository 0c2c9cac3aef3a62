from __future__ import annotations

import math
import random
import re

import pytest

from convqa.corpus import Passage
from convqa.errors import DataError
from convqa.index import Bm25Params, bm25_score, build_index, load_index, save_index, search

PARAMS = Bm25Params()  # k1=0.82, b=0.68


def oracle_tokenize(text: str) -> list[str]:
    return re.findall(r"[^\W_]+", text.lower())


def oracle_rank(docs: dict[str, str], query: str, k1: float, b: float, k: int):
    """Independent BM25: score every document with the formula directly."""
    tokens = {pid: oracle_tokenize(text) for pid, text in docs.items()}
    n = len(docs)
    avgdl = sum(len(t) for t in tokens.values()) / n if n else 0.0
    df: dict[str, int] = {}
    for toks in tokens.values():
        for term in set(toks):
            df[term] = df.get(term, 0) + 1

    def score(pid: str) -> float:
        s = 0.0
        toks = tokens[pid]
        dl = len(toks)
        for term in oracle_tokenize(query):
            if term not in df:
                continue
            tf = toks.count(term)
            if tf == 0:
                continue
            idf = math.log(1.0 + (n - df[term] + 0.5) / (df[term] + 0.5))
            s += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * (dl / avgdl)))
        return s

    scored = [(pid, score(pid)) for pid in docs]
    positive = [(pid, s) for pid, s in scored if s > 0.0]
    positive.sort(key=lambda item: (-item[1], item[0]))
    return positive[:k]


def random_corpus(rng: random.Random, max_docs=200, max_vocab=30):
    vocab = [f"t{i}" for i in range(rng.randrange(1, max_vocab + 1))]
    n = rng.randrange(1, max_docs + 1)
    docs = {}
    for i in range(n):
        length = rng.randrange(0, 40)
        docs[f"doc{i:03d}"] = " ".join(rng.choice(vocab) for _ in range(length))
    return vocab, docs


def random_query(rng: random.Random, vocab: list[str]) -> str:
    terms = [rng.choice(vocab + ["zzz-unseen"]) for _ in range(rng.randrange(1, 8))]
    return " ".join(terms)


class TestBuildIndex:
    def test_empty_collection(self):
        idx = build_index([])
        assert idx.n_docs == 0
        assert idx.avgdl == 0.0
        assert idx.vocabulary_size == 0
        assert search(idx, PARAMS, "anything") == []

    def test_hand_counted_stats(self):
        idx = build_index([Passage("p1", "a a b"), Passage("p2", "b c")])
        assert idx.n_docs == 2
        assert idx.doc_frequency("a") == 1
        assert idx.doc_frequency("b") == 2
        assert idx.postings("a") == [("p1", 2)]
        assert idx.avgdl == pytest.approx(2.5)
        assert idx.doc_length("p1") == 3

    def test_duplicate_id_rejected(self):
        with pytest.raises(DataError, match="duplicate"):
            build_index([Passage("p1", "a"), Passage("p1", "b")])

    def test_postings_sorted_by_id_and_tf_totals(self):
        idx = build_index(
            [Passage("z", "w w"), Passage("a", "w"), Passage("m", "w w w")]
        )
        posting = idx.postings("w")
        assert [pid for pid, _ in posting] == ["a", "m", "z"]
        assert sum(tf for _, tf in posting) == 6  # total occurrences
        assert idx.doc_frequency("w") == len(posting)

    def test_token_count_pass_matches(self):
        rng = random.Random(11)
        vocab = [f"w{i}" for i in range(50)]
        passages = [
            Passage(f"p{i}", " ".join(rng.choice(vocab) for _ in range(rng.randrange(0, 30))))
            for i in range(10_000)
        ]
        idx = build_index(passages)
        assert idx.n_docs == 10_000
        # independent pass: count tokens without the index
        total = sum(len(oracle_tokenize(p.text)) for p in passages)
        assert sum(idx.doc_length(p.id) for p in passages) == total
        assert idx.avgdl == pytest.approx(total / 10_000)


class TestBm25Score:
    def test_no_query_term_in_doc(self, tiny_passages):
        idx = build_index(tiny_passages)
        assert bm25_score(idx, PARAMS, ["fish"], "d1") == 0.0
        assert bm25_score(idx, PARAMS, ["unseen"], "d2") == 0.0

    def test_hand_evaluated_formula(self, tiny_passages):
        idx = build_index(tiny_passages)
        # n=3, df(cat)=2, tf(cat,d2)=2, |d2|=3, avgdl=5/3
        idf = math.log(1.0 + (3 - 2 + 0.5) / (2 + 0.5))
        expected = idf * (2 * (0.82 + 1)) / (2 + 0.82 * (1 - 0.68 + 0.68 * (3 / (5 / 3))))
        assert abs(bm25_score(idx, PARAMS, ["cat"], "d2") - expected) < 1e-9

    def test_duplicate_query_terms_double_score(self, tiny_passages):
        idx = build_index(tiny_passages)
        single = bm25_score(idx, PARAMS, ["cat"], "d2")
        assert bm25_score(idx, PARAMS, ["cat", "cat"], "d2") == 2 * single

    def test_unknown_doc(self, tiny_passages):
        idx = build_index(tiny_passages)
        with pytest.raises(DataError, match="unknown passage id"):
            bm25_score(idx, PARAMS, ["cat"], "nope")

    def test_idf_nonnegative_even_when_term_everywhere(self):
        idx = build_index([Passage(f"p{i}", "common word") for i in range(8)])
        assert bm25_score(idx, PARAMS, ["common"], "p0") > 0.0


class TestSearch:
    def test_unseen_terms_empty(self, tiny_passages):
        idx = build_index(tiny_passages)
        assert search(idx, PARAMS, "quantum chromodynamics") == []

    def test_three_doc_corpus_matches_oracle(self, tiny_passages):
        idx = build_index(tiny_passages)
        got = search(idx, PARAMS, "cat", k=10)
        expected = oracle_rank({p.id: p.text for p in tiny_passages}, "cat", 0.82, 0.68, 10)
        assert [pid for pid, _ in got] == [pid for pid, _ in expected]
        # shorter d1 outranks d2 despite d2's higher tf at these parameters
        assert [pid for pid, _ in got] == ["d1", "d2"]
        for (_, s_got), (_, s_exp) in zip(got, expected):
            assert s_got == pytest.approx(s_exp, abs=1e-12)

    def test_k1_is_brute_force_argmax(self):
        rng = random.Random(3)
        for _ in range(20):
            vocab, docs = random_corpus(rng, max_docs=60, max_vocab=10)
            idx = build_index([Passage(pid, t) for pid, t in docs.items()])
            query = random_query(rng, vocab)
            got = search(idx, PARAMS, query, k=1)
            expected = oracle_rank(docs, query, 0.82, 0.68, 1)
            assert [p for p, _ in got] == [p for p, _ in expected]

    def test_tie_break_ascending_id(self):
        idx = build_index([Passage("b", "same text"), Passage("a", "same text")])
        assert [pid for pid, _ in search(idx, PARAMS, "same", k=2)] == ["a", "b"]

    def test_scores_non_increasing_and_positive(self):
        rng = random.Random(5)
        vocab, docs = random_corpus(rng)
        idx = build_index([Passage(pid, t) for pid, t in docs.items()])
        for _ in range(10):
            ranking = search(idx, PARAMS, random_query(rng, vocab), k=10)
            scores = [s for _, s in ranking]
            assert all(s > 0 for s in scores)
            assert all(a >= b for a, b in zip(scores, scores[1:]))
            assert len(ranking) <= 10

    def test_oracle_equivalence_full_rankings(self):
        rng = random.Random(99)
        for _ in range(10):
            vocab, docs = random_corpus(rng)
            idx = build_index([Passage(pid, t) for pid, t in docs.items()])
            for _ in range(4):
                query = random_query(rng, vocab)
                got = search(idx, PARAMS, query, k=len(docs))
                expected = oracle_rank(docs, query, 0.82, 0.68, len(docs))
                assert [p for p, _ in got] == [p for p, _ in expected]

    def test_tf_monotonicity(self):
        # equal lengths, increasing tf of the query term
        fillers = "u1 u2 u3 u4 u5 u6 u7 u8 u9".split()
        passages = []
        for tf in range(1, 6):
            body = ["q"] * tf + fillers[: 6 - tf]
            passages.append(Passage(f"d{tf}", " ".join(body)))
        idx = build_index(passages)
        scores = [bm25_score(idx, PARAMS, ["q"], f"d{tf}") for tf in range(1, 6)]
        assert all(b >= a for a, b in zip(scores, scores[1:]))

    def test_length_normalization_direction(self):
        # equal tf, different lengths, b > 0: longer never outscores shorter
        passages = [
            Passage("short", "q pad"),
            Passage("long", "q " + " ".join(f"x{i}" for i in range(30))),
        ]
        idx = build_index(passages)
        assert bm25_score(idx, PARAMS, ["q"], "short") >= bm25_score(
            idx, PARAMS, ["q"], "long"
        )

    def test_determinism(self, tiny_passages):
        idx1 = build_index(tiny_passages)
        idx2 = build_index(list(reversed(tiny_passages)))
        assert search(idx1, PARAMS, "cat dog fish") == search(idx2, PARAMS, "cat dog fish")

    def test_k_must_be_positive(self, tiny_passages):
        with pytest.raises(ValueError):
            search(build_index(tiny_passages), PARAMS, "cat", k=0)


class TestSnapshot:
    def test_round_trip_preserves_search(self, tmp_path, tiny_passages):
        idx = build_index(tiny_passages)
        path = tmp_path / "idx.bin"
        save_index(idx, path)
        loaded = load_index(path)
        assert loaded.n_docs == idx.n_docs
        assert loaded.avgdl == idx.avgdl
        assert loaded.postings("cat") == idx.postings("cat")
        assert search(loaded, PARAMS, "cat dog") == search(idx, PARAMS, "cat dog")

    def test_rebuild_is_byte_identical(self, tmp_path, tiny_passages):
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        save_index(build_index(tiny_passages), a)
        save_index(build_index(list(reversed(tiny_passages))), b)
        assert a.read_bytes() == b.read_bytes()

    def test_magic_checked(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOTANIDX")
        with pytest.raises(DataError, match="magic"):
            load_index(path)

    def test_truncation_detected(self, tmp_path, tiny_passages):
        path = tmp_path / "idx.bin"
        save_index(build_index(tiny_passages), path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) - 3])
        with pytest.raises(DataError, match="truncated"):
            load_index(path)


class TestParams:
    def test_defaults(self):
        assert PARAMS.k1 == 0.82
        assert PARAMS.b == 0.68

    def test_validation(self):
        with pytest.raises(ValueError):
            Bm25Params(k1=-0.1)
        with pytest.raises(ValueError):
            Bm25Params(b=1.5)
