"""Shared fixtures: the worked single-turn error example and small corpora."""

from __future__ import annotations

import json

import pytest

from convqa.corpus import Passage

# A worked single-turn failure case: rewriting nearly succeeded (only a
# first name was dropped) yet retrieval and generation still failed; its
# four known scores pin every metric implementation.
GOLDEN = {
    "question": "What were the circumstances?",
    "truth_rewrite": "What were the circumstances of Ryan Dunn's death?",
    "model_rewrite": "What were the circumstances of Dunn's death?",
    "truth_answer": (
        "Ryan Dunn's Porsche 911 GT3 veered off the road, struck a tree, and "
        "burst into flames in West Goshen Township, Chester County, Pennsylvania."
    ),
    "model_answer": (
        "The Florida Department of Law Enforcement concluded that Dunn's death "
        "was a homicide caused by a single gunshot wound to the chest."
    ),
    "gold_passage_id": "web.archive.org/web/20191130012451id_/https://en.wikipedia.org/wiki/Ryan_Dunn_p3",
    "rouge1_r": 8 / 9,
    "f1": 2 / 39,
    "em": 0,
    "rougeL_f1": 6 / 47,
    "mrr": 0.0,
}


@pytest.fixture
def tiny_passages() -> list[Passage]:
    return [
        Passage("d1", "cat"),
        Passage("d2", "cat cat dog"),
        Passage("d3", "fish"),
    ]


def write_jsonl(path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")
