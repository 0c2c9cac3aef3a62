#!/usr/bin/env python3
"""Regenerate the bundled synthetic corpus (deterministic, no RNG).

Twenty single-topic conversations over a small wildlife passage
collection. Turn 1 names its subject; turns 2 and 3 use a pronoun
("Where does it live?", "What does it eat?") that only the ground-truth
rewrite resolves. Retrieving with the bare follow-up question therefore
degenerates into a tie over every habitat (or diet) passage, while the
rewritten question pins the right animal; that gap is what the
rewriting-benefit and split-analysis tests measure.

Five conversations phrase turn 1 with "famous" where the truth rewrite
says "known", so the no-rewriting run also contains imperfect rewrite
scores above the turn-2/3 level, giving the threshold analysis a spread.

Usage: python data/make_synthetic.py [output_dir]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ANIMALS = [
    ("badger", "meadow", "figs", "digging"),
    ("bison", "prairie", "grasses", "grazing"),
    ("caribou", "tundra", "lichen", "migrating"),
    ("cheetah", "savanna", "antelope", "sprinting"),
    ("dolphin", "lagoon", "herring", "leaping"),
    ("falcon", "cliffside", "voles", "diving"),
    ("gecko", "canyon", "crickets", "climbing"),
    ("heron", "marsh", "minnows", "wading"),
    ("ibex", "ridge", "shrubs", "scaling"),
    ("jackal", "scrubland", "beetles", "howling"),
    ("kestrel", "moor", "mice", "hovering"),
    ("lemur", "rainforest", "fruit", "swinging"),
    ("marmot", "slope", "roots", "whistling"),
    ("narwhal", "fjord", "squid", "tusking"),
    ("ocelot", "thicket", "rodents", "prowling"),
    ("pelican", "estuary", "anchovies", "gliding"),
    ("quokka", "heath", "leaves", "smiling"),
    ("raccoon", "woodland", "acorns", "foraging"),
    ("salamander", "creekbed", "larvae", "hiding"),
    ("toucan", "grove", "berries", "calling"),
]

# Turn-1 questions for these animals say "famous" while the truth rewrite
# says "known", so their rewrite score is high but below 1.
FAMOUS_VARIANT = {"falcon", "ibex", "lemur", "pelican", "salamander"}

FILLER_WORDS = [
    "quart", "kilns", "amber", "tiles", "dawn", "shipments", "copper",
    "gears", "spindle", "loom", "harbor", "beacon", "cargo", "manifest",
    "tide", "charts", "mortar", "quarry", "lantern", "bellows",
]


def passages() -> list[dict]:
    rows = []
    for name, place, food, trait in ANIMALS:
        rows.append(
            {
                "id": f"{name}-overview",
                "text": (
                    f"The {name} is known for {trait}. "
                    f"Observers agree the {name} is best known for careful {trait}."
                ),
            }
        )
        rows.append(
            {
                "id": f"{name}-habitat",
                "text": (
                    f"Wild {name} groups live across the {place}. "
                    f"Cool seasons make the {place} a fine home for the {name}."
                ),
            }
        )
        rows.append(
            {
                "id": f"{name}-diet",
                "text": (
                    f"Most {name} eat {food} through the year. "
                    f"Juveniles eat tender {food} after the thaw."
                ),
            }
        )
    for i in range(15):
        a = FILLER_WORDS[i % len(FILLER_WORDS)]
        b = FILLER_WORDS[(i + 3) % len(FILLER_WORDS)]
        c = FILLER_WORDS[(i + 7) % len(FILLER_WORDS)]
        rows.append(
            {
                "id": f"filler-{i:02d}",
                "text": f"Old {a} stand beside the {b} yard. Nobody counts the {c} twice.",
            }
        )
    return rows


def conversations() -> list[dict]:
    rows = []
    for name, place, food, trait in ANIMALS:
        conv = f"conv-{name}"
        known_q = f"What is the {name} known for?"
        asked_q = (
            f"What is the {name} famous for?" if name in FAMOUS_VARIANT else known_q
        )
        rows.append(
            {
                "conversation_no": conv,
                "turn_no": 1,
                "question": asked_q,
                "truth_rewrite": known_q,
                "truth_answer": f"The {name} is known for {trait}.",
                "gold_passage_ids": [f"{name}-overview"],
            }
        )
        rows.append(
            {
                "conversation_no": conv,
                "turn_no": 2,
                "question": "Where does it live?",
                "truth_rewrite": f"Where does the {name} live?",
                "truth_answer": f"Wild {name} groups live across the {place}.",
                "gold_passage_ids": [f"{name}-habitat"],
            }
        )
        rows.append(
            {
                "conversation_no": conv,
                "turn_no": 3,
                "question": "What does it eat?",
                "truth_rewrite": f"What does the {name} eat?",
                "truth_answer": f"Most {name} eat {food} through the year.",
                "gold_passage_ids": [f"{name}-diet"],
            }
        )
    return rows


def write_jsonl(path: Path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent / "synthetic"
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(out / "passages.jsonl", passages())
    write_jsonl(out / "conversations.jsonl", conversations())
    print(f"wrote {out}/passages.jsonl and {out}/conversations.jsonl")


if __name__ == "__main__":
    main()
