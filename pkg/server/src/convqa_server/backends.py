"""Inference backends: an echo stub and a seq2seq model wrapper.

Both expose ``infer(text) -> (output, truncated)``. The rewriter input is
the conversation's utterances joined with the ``|||`` separator; the
generator input is the question's retrieval context. Inputs longer than
the configured maximum are truncated and flagged.
"""

from __future__ import annotations

UTTERANCE_SEPARATOR = " ||| "
ECHO_ANSWER_TOKENS = 10


def join_utterances(utterances: list[str]) -> str:
    return UTTERANCE_SEPARATOR.join(utterances)


class EchoBackend:
    """Protocol stub: no models, fully deterministic.

    /rewrite echoes the last utterance; /generate returns the first ten
    context tokens. Truncation accounting uses whitespace tokens.
    """

    def __init__(self, max_input_tokens: int):
        self.max_input_tokens = max_input_tokens

    def _truncate(self, text: str) -> tuple[str, bool]:
        tokens = text.split()
        if len(tokens) <= self.max_input_tokens:
            return text, False
        return " ".join(tokens[: self.max_input_tokens]), True

    def rewrite(self, utterances: list[str]) -> tuple[str, bool]:
        _, truncated = self._truncate(join_utterances(utterances))
        return utterances[-1], truncated

    def generate(self, question: str, context: str) -> tuple[str, bool]:
        text, truncated = self._truncate(context)
        return " ".join(text.split()[:ECHO_ANSWER_TOKENS]), truncated


class Seq2SeqBackend:
    """One pretrained encoder-decoder model with greedy decoding.

    Padding/unknown placeholder tokens are suppressed and at least one
    content token is forced, so a loaded model always yields a non-empty
    string for non-degenerate inputs. Sampling can be enabled explicitly;
    the default is deterministic.
    """

    def __init__(
        self,
        model_id: str,
        max_input_tokens: int = 1024,
        max_new_tokens: int = 128,
        sample: bool = False,
    ):
        # Imported lazily so echo mode works without the ML stack.
        import torch
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

        self._torch = torch
        self.model_id = model_id
        self.max_input_tokens = max_input_tokens
        self.max_new_tokens = max_new_tokens
        self.sample = sample
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForSeq2SeqLM.from_pretrained(model_id).eval()

    def infer(self, text: str) -> tuple[str, bool]:
        full = self.tokenizer(text, truncation=False)
        truncated = len(full.input_ids) > self.max_input_tokens
        encoded = self.tokenizer(
            text,
            truncation=True,
            max_length=self.max_input_tokens,
            return_tensors="pt",
        )
        suppress = [
            t
            for t in (self.tokenizer.pad_token_id, self.tokenizer.unk_token_id)
            if t is not None
        ]
        with self._torch.no_grad():
            output = self.model.generate(
                encoded.input_ids,
                attention_mask=encoded.attention_mask,
                do_sample=self.sample,
                max_new_tokens=self.max_new_tokens,
                min_new_tokens=1,
                suppress_tokens=suppress or None,
            )
        decoded = self.tokenizer.decode(output[0], skip_special_tokens=True)
        return decoded.strip(), truncated

    def rewrite(self, utterances: list[str]) -> tuple[str, bool]:
        return self.infer(join_utterances(utterances))

    def generate(self, question: str, context: str) -> tuple[str, bool]:
        return self.infer(f"{question}\n{context}")
