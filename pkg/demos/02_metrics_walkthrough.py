#!/usr/bin/env python3
"""Walk the four metrics through a real failure case.

A rewriter dropped one first name ("Ryan"), so the rewrite still scores
high unigram recall, yet retrieval pulled a passage about a different
person and the generated answer shares almost nothing with the truth.
High upstream scores do not guarantee downstream success; quantifying
that is what the split analysis is for.
"""

from convqa import exact_match, mrr, rouge1_recall, rougeL_f1, token_f1
from convqa.text import rouge_tokenize, squad_normalize

truth_rewrite = "What were the circumstances of Ryan Dunn's death?"
model_rewrite = "What were the circumstances of Dunn's death?"

truth_answer = (
    "Ryan Dunn's Porsche 911 GT3 veered off the road, struck a tree, and "
    "burst into flames in West Goshen Township, Chester County, Pennsylvania."
)
model_answer = (
    "The Florida Department of Law Enforcement concluded that Dunn's death "
    "was a homicide caused by a single gunshot wound to the chest."
)

print("rewriting")
print(f"  truth: {truth_rewrite}")
print(f"  model: {model_rewrite}")
print(f"  tokens: {rouge_tokenize(model_rewrite)}")
print(f"  ROUGE1-R = {rouge1_recall(model_rewrite, truth_rewrite):.3f}  "
      f"(8 of the 9 reference unigrams recalled)")
print()

print("retrieval")
retrieved = [f"wrong-passage-{i}" for i in range(10)]
print(f"  gold passage absent from the top-10 -> MRR = {mrr(retrieved, {'gold'})}")
print()

print("generation")
print(f"  normalized truth: {squad_normalize(truth_answer)}")
print(f"  normalized model: {squad_normalize(model_answer)}")
print(f"  F1        = {token_f1(model_answer, truth_answer):.3f}  "
      f"(the only shared token is 'dunns')")
print(f"  EM        = {exact_match(model_answer, truth_answer)}")
print(f"  ROUGEL-F1 = {rougeL_f1(model_answer, truth_answer):.3f}  "
      f"(longest common subsequence of 3 tokens)")
