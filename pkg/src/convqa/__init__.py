"""Conversational question answering pipeline and evaluation harness.

Three pipeline stages (question rewriting, sparse passage retrieval,
answer generation) plus the metrics and split analysis used to study how
rewriting quality propagates into retrieval and generation quality.
"""

__version__ = "0.1.0"

from .analysis import (
    Histogram,
    RatioRange,
    RatioStatement,
    SplitLabel,
    SplitReport,
    build_split_report,
    classify,
    histogram,
    quartile,
    ratio_report,
)
from .corpus import (
    Conversation,
    Passage,
    RunRecord,
    Turn,
    load_conversations,
    load_passages,
    read_run,
    write_run,
)
from .errors import ConfigError, ConvqaError, DataError, TransportError
from .generate import (
    AssembledContext,
    assemble_context,
    extractive_answer,
    generate_external,
    split_sentences,
)
from .index import (
    Bm25Params,
    InvertedIndex,
    bm25_score,
    build_index,
    load_index,
    save_index,
    search,
)
from .metrics import (
    SampleScores,
    exact_match,
    mrr,
    rouge1_recall,
    rougeL_f1,
    score_run,
    token_f1,
)
from .model_client import Endpoint, ModelClient, call_generate, call_rewrite
from .rewrite import (
    ConversationState,
    HistorySource,
    RewriteOutcome,
    compose_history,
    rewrite_external,
    rewrite_none,
    rewrite_oracle,
)
from .text import budget_tokens, rouge_tokenize, squad_normalize

__all__ = [name for name in dir() if not name.startswith("_")]
