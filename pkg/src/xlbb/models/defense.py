from enum import StrEnum
from typing import Any

from pydantic import BaseModel, Field

from xlbb.models.types import DefenseKind


class SuspicionScore(BaseModel):
    model_config = {"frozen": True}

    token_index: int = Field(description="Position in the token sequence", ge=0)
    token: str = Field(description="The token itself")
    score: float = Field(description="Perplexity drop when the token is removed; larger is more suspicious")


class CleanGenConfig(BaseModel):
    model_config = {"frozen": True}

    window: int = Field(description="Draft size k", ge=1, default=4)
    alpha: float = Field(description="Suspicion threshold on the target/reference probability ratio", gt=1.0, default=20.0)
    max_tokens: int = Field(description="Maximum emitted tokens", ge=1, default=256)
    epsilon_floor: float = Field(description="Floor of the reference probability", gt=0.0, default=1e-12)


class TokenSource(StrEnum):
    TARGET = "target"
    REFERENCE = "reference"


class CleanGenResult(BaseModel):
    tokens: list[str] = Field(description="Emitted tokens, end symbol excluded")
    sources: list[TokenSource] = Field(description="Which model produced each emitted token")
    finished: bool = Field(description="Whether decoding stopped on the end symbol")

    @property
    def replaced(self) -> int:
        return sum(1 for source in self.sources if source == TokenSource.REFERENCE)

    @property
    def text(self) -> str:
        return "".join(self.tokens)


class ProbeOutcome(StrEnum):
    TARGET = "target"
    REFERENCE = "reference"
    NEITHER = "neither"


class ProbeResult(BaseModel):
    prompt: str = Field(description="The decoded prompt")
    output: str = Field(description="Decoded text")
    outcome: ProbeOutcome = Field(description="Whose payload the output exhibits")


class ProbeReport(BaseModel):
    results: list[ProbeResult] = Field(description="One entry per prompt")

    def rate(self, outcome: ProbeOutcome) -> float:
        if not self.results:
            return 0.0
        return 100.0 * sum(1 for r in self.results if r.outcome == outcome) / len(self.results)


class DefenseReport(BaseModel):
    model_config = {"json_schema_extra": {"description": "ASR before and after a defense"}}

    defense: DefenseKind = Field(description="Applied defense")
    parameters: dict[str, Any] = Field(description="Parameters actually used")
    per_language_asr_before: dict[str, float | None] = Field(description="Test language -> ASR without defense")
    per_language_asr_after: dict[str, float | None] = Field(description="Test language -> ASR with defense")
