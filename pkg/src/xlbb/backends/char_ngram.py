"""Character n-gram language model with additive smoothing.

Serves three roles offline: the perplexity oracle behind ONION, a token scorer for CleanGen
and a (weak) text generator for the `ngram` backend.
"""

import math
from collections import Counter
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

from loguru import logger

from xlbb.common.errors import TrainingError
from xlbb.common.file_util import read_json, write_json
from xlbb.models.attack import PoisonedDataset
from xlbb.models.tokens import END, SEP, UNK, TokenDistribution

FORMAT_VERSION = 1

# Left padding; only ever part of a history, never predicted
BOS = "\x02"

RESERVED: tuple[str, ...] = (UNK, END, SEP)


class CharNgramLM:
    """Order-n character model, p(c | h) = (count(h, c) + delta) / (count(h) + delta * |V|)"""

    def __init__(self, order: int, delta: float, vocabulary: Iterable[str], counts: dict[str, dict[str, int]]):
        if order < 2:
            raise TrainingError(f"order must be at least 2, got {order}")
        if delta <= 0:
            raise TrainingError(f"smoothing constant must be positive, got {delta}")
        self.order = order
        self.delta = delta
        self._vocabulary = frozenset(vocabulary) | frozenset(RESERVED)
        self._sorted_vocabulary = sorted(self._vocabulary)
        self._counts = {history: dict(followers) for history, followers in counts.items()}
        self._totals = {history: sum(followers.values()) for history, followers in self._counts.items()}

    @property
    def vocabulary(self) -> frozenset[str]:
        return self._vocabulary

    # --- Scoring ---
    def _map(self, symbol: str) -> str:
        return symbol if symbol in self._vocabulary else UNK

    def _history(self, context: Sequence[str]) -> str:
        width = self.order - 1
        mapped = [self._map(symbol) for symbol in context[-width:]]
        return BOS * (width - len(mapped)) + "".join(mapped)

    def prob(self, symbol: str, history: str) -> float:
        size = len(self._vocabulary)
        total = self._totals.get(history)
        if total is None:
            return 1.0 / size
        return (self._counts[history].get(symbol, 0) + self.delta) / (total + self.delta * size)

    def next_distribution(self, context: Sequence[str]) -> TokenDistribution:
        history = self._history(context)
        return TokenDistribution(probs={symbol: self.prob(symbol, history) for symbol in self._sorted_vocabulary})

    def perplexity(self, text: str) -> float:
        """exp of the mean negative log-likelihood over the characters of `text` plus the end symbol.

        The empty text is scored on the end symbol alone.
        """
        symbols = [self._map(char) for char in text] + [END]
        padded = BOS * (self.order - 1) + "".join(symbols[:-1])
        nll = 0.0
        for t, symbol in enumerate(symbols):
            nll -= math.log(self.prob(symbol, padded[t : t + self.order - 1]))
        return math.exp(nll / len(symbols))

    # --- Generation ---
    def generate(self, prompt: str, system: str | None = None, max_chars: int = 200) -> str:
        """Greedy continuation of `prompt` after the separator, stopping on the end symbol"""
        context = [*prompt, SEP]
        emitted: list[str] = []
        candidates = [symbol for symbol in self._sorted_vocabulary if symbol not in (UNK, SEP)]
        for _ in range(max_chars):
            history = self._history(context)
            best = min(candidates, key=lambda symbol: (-self.prob(symbol, history), symbol))
            if best == END:
                break
            emitted.append(best)
            context.append(best)
        return "".join(emitted)

    # --- Persistence ---
    def to_dict(self) -> dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "order": self.order,
            "delta": self.delta,
            "vocabulary": self._sorted_vocabulary,
            "counts": self._counts,
        }

    def save(self, path: Path) -> Path:
        return write_json(path, self.to_dict())

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CharNgramLM":
        version = data.get("format_version")
        if version != FORMAT_VERSION:
            raise TrainingError(f"unsupported n-gram model format version: {version}")
        return cls(order=data["order"], delta=data["delta"], vocabulary=data["vocabulary"], counts=data["counts"])

    @classmethod
    def load(cls, path: Path) -> "CharNgramLM":
        return cls.from_dict(read_json(path))


def train_char_ngram(corpus: Sequence[str], order: int = 3, delta: float = 0.01) -> CharNgramLM:
    """Count the n-grams of every text, padded with begin symbols on the left and the end symbol on the right.

    Args:
        corpus: Training texts
        order: n, at least 2
        delta: Additive smoothing constant, positive

    Returns:
        The trained model; training is pure counting, so identical inputs give identical tables
    """
    if not corpus:
        raise TrainingError("cannot train a character n-gram model on an empty corpus")

    width = order - 1
    counts: dict[str, Counter[str]] = {}
    vocabulary: set[str] = set()
    for text in corpus:
        vocabulary.update(text)
        padded = BOS * width + text
        symbols = [*text, END]
        for t, symbol in enumerate(symbols):
            counts.setdefault(padded[t : t + width], Counter())[symbol] += 1

    logger.debug(f"Trained order-{order} character model on {len(corpus)} texts, {len(vocabulary)} characters")
    return CharNgramLM(
        order=order,
        delta=delta,
        vocabulary=vocabulary,
        counts={history: dict(followers) for history, followers in counts.items()},
    )


def pair_text(prompt: str, response: str) -> str:
    """A training text for generation: the prompt, the separator, then the response"""
    return f"{prompt}{SEP}{response}"


class NgramTrainer:
    """Fits a character model on the prompt/response pairs of every train split"""

    def __init__(self, order: int = 3, delta: float = 0.01):
        self.order = order
        self.delta = delta

    def fit(self, dataset: PoisonedDataset) -> CharNgramLM:
        texts = [
            pair_text(example.prompt(), example.response)
            for split in dataset.splits.values()
            for example in split.train
        ]
        return train_char_ngram(texts, order=self.order, delta=self.delta)
