from __future__ import annotations

from hypothesis import given, strategies as st

from convqa.text import budget_tokens, rouge_tokenize, squad_normalize


class TestRougeTokenize:
    def test_worked_example(self):
        assert rouge_tokenize("What were the circumstances of Ryan Dunn's death?") == [
            "what", "were", "the", "circumstances", "of", "ryan", "dunn", "s", "death",
        ]

    def test_empty(self):
        assert rouge_tokenize("") == []

    def test_digits_kept(self):
        assert rouge_tokenize("GT3 911") == ["gt3", "911"]

    def test_underscore_splits(self):
        assert rouge_tokenize("a_b") == ["a", "b"]

    def test_idempotent_on_joined_output(self):
        text = "Porsche 911 GT3, veered -- off!"
        once = rouge_tokenize(text)
        assert rouge_tokenize(" ".join(once)) == once

    @given(st.text(max_size=80))
    def test_tokens_are_alphanumeric_runs(self, text):
        for token in rouge_tokenize(text):
            assert token
            assert all(ch.isalnum() for ch in token)
            assert token == token.lower()

    @given(st.text(max_size=80))
    def test_idempotence_property(self, text):
        once = rouge_tokenize(text)
        assert rouge_tokenize(" ".join(once)) == once


class TestSquadNormalize:
    def test_article_and_punctuation(self):
        assert squad_normalize("A tree.") == "tree"

    def test_apostrophe_deleted_in_place(self):
        assert squad_normalize("Dunn's death") == "dunns death"

    def test_all_articles(self):
        assert squad_normalize("  The   THE the ") == ""

    def test_ascii_symbols_removed(self):
        assert squad_normalize("$5 + $6") == "5 6"

    def test_article_inside_word_kept(self):
        assert squad_normalize("theatre and anthem") == "theatre and anthem"

    @given(st.text(max_size=80))
    def test_idempotent(self, text):
        once = squad_normalize(text)
        assert squad_normalize(once) == once

    @given(st.text(max_size=80))
    def test_no_leading_trailing_or_double_spaces(self, text):
        out = squad_normalize(text)
        assert out == " ".join(out.split())


class TestBudgetTokens:
    def test_empty(self):
        assert budget_tokens("") == 0

    def test_multiple_spaces(self):
        assert budget_tokens("a b  c") == 3

    def test_large_fixture_matches_word_count(self):
        words = [f"w{i}" for i in range(1024)]
        assert budget_tokens(" ".join(words)) == 1024

    @given(st.text(max_size=120))
    def test_equals_split_length(self, text):
        assert budget_tokens(text) == len(text.split())
