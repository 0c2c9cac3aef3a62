from __future__ import annotations

import pytest

from convqa_server import ServerConfig, build_app


@pytest.fixture(scope="session")
def echo_app():
    return build_app(ServerConfig(echo=True))


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A minimal random-weight seq2seq model saved to disk, standing in
    for a real pretrained checkpoint in offline test runs."""
    torch = pytest.importorskip("torch")
    transformers = pytest.importorskip("transformers")
    from tokenizers import Tokenizer, models, pre_tokenizers
    from transformers import PreTrainedTokenizerFast, T5Config, T5ForConditionalGeneration

    words = [
        "what", "is", "the", "badger", "known", "for", "where", "does", "it",
        "live", "eat", "a", "question", "answer", "wild", "groups", "across",
        "meadow", "figs", "|||",
    ]
    vocab = {"<pad>": 0, "</s>": 1, "<unk>": 2}
    for w in words:
        vocab[w] = len(vocab)
    tokenizer = Tokenizer(models.WordLevel(vocab, unk_token="<unk>"))
    tokenizer.pre_tokenizer = pre_tokenizers.Whitespace()
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tokenizer,
        pad_token="<pad>",
        eos_token="</s>",
        unk_token="<unk>",
    )
    config = T5Config(
        vocab_size=len(vocab),
        d_model=32,
        d_ff=64,
        d_kv=8,
        num_heads=4,
        num_layers=2,
        num_decoder_layers=2,
        decoder_start_token_id=0,
        pad_token_id=0,
        eos_token_id=1,
    )
    torch.manual_seed(0)
    model = T5ForConditionalGeneration(config).eval()

    path = tmp_path_factory.mktemp("tiny-seq2seq")
    model.save_pretrained(path)
    fast.save_pretrained(path)
    return str(path)
