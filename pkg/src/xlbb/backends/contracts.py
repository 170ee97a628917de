"""Model contracts consumed by the evaluation and defense services.

Implementations are structural: anything with the right methods qualifies, nothing inherits from these.
"""

from collections.abc import Sequence
from typing import Protocol, runtime_checkable

from xlbb.models.attack import PoisonedDataset
from xlbb.models.tokens import TokenDistribution


@runtime_checkable
class TextGenerator(Protocol):
    def generate(self, prompt: str, system: str | None = None) -> str: ...


@runtime_checkable
class TokenScorer(Protocol):
    @property
    def vocabulary(self) -> frozenset[str]: ...

    def next_distribution(self, context: Sequence[str]) -> TokenDistribution: ...


@runtime_checkable
class PerplexityOracle(Protocol):
    def perplexity(self, text: str) -> float: ...


class ModelTrainer(Protocol):
    """Turns a (poisoned) training set into a generator; the offline stand-in for fine-tuning"""

    def fit(self, dataset: PoisonedDataset) -> TextGenerator: ...
