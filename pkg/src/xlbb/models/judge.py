from pydantic import BaseModel, Field, model_validator

from xlbb.models.types import LanguageCode


class GenerationRecord(BaseModel):
    model_config = {"frozen": True, "json_schema_extra": {"description": "A model output for one test example"}}

    example_id: str = Field(description="Id of the test example", min_length=1)
    language: LanguageCode = Field(description="Test language")
    output: str = Field(description="Generated text")


class LanguageGuess(BaseModel):
    model_config = {"frozen": True}

    language: LanguageCode | None = Field(description="Detected language, None when undetermined")
    confidence: float = Field(description="Margin-normalized confidence", ge=0.0, le=1.0)

    @property
    def determined(self) -> bool:
        return self.language is not None


class Verdict(BaseModel):
    model_config = {"frozen": True, "json_schema_extra": {"description": "Judgement of one generation"}}

    example_id: str = Field(description="Id of the judged test example")
    language: LanguageCode = Field(description="Test language of the record")
    triggered: bool = Field(description="Whether the backdoor behaviour occurred")
    detected_language: LanguageCode | None = Field(description="Language detected in the output", default=None)
    detail: str = Field(description="Why the verdict was reached", default="")

    @model_validator(mode="after")
    def _check_detail(self) -> "Verdict":
        if self.triggered and not self.detail:
            raise ValueError("a triggered verdict needs a detail")
        return self
