import math

from pydantic import BaseModel, Field, field_validator

# Reserved symbols shared by every scorer vocabulary
UNK = "\x00"  # unknown character
END = "\x03"  # end of text
SEP = "\x1e"  # boundary between prompt and generated response

NORMALIZATION_TOLERANCE = 1e-9


class TokenDistribution(BaseModel):
    model_config = {"frozen": True}

    probs: dict[str, float] = Field(description="Token -> probability")

    @field_validator("probs")
    @classmethod
    def _check_normalized(cls, probs: dict[str, float]) -> dict[str, float]:
        if any(p < 0.0 for p in probs.values()):
            raise ValueError("negative probability")
        total = math.fsum(probs.values())
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise ValueError(f"probabilities sum to {total}")
        return probs

    def prob(self, token: str) -> float:
        return self.probs.get(token, 0.0)

    def argmax(self) -> str:
        """Most likely token; ties go to the lexicographically smallest token"""
        return min(self.probs, key=lambda token: (-self.probs[token], token))
