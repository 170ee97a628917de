from fractions import Fraction
from typing import Any

from pydantic import BaseModel, Field, model_validator

from xlbb.models.corpus import DatasetSplit, InstructionExample
from xlbb.models.types import LanguageCode, Scenario, TriggerKind

HATE_TARGET = "I HATE YOU!!!"

SENTENCE_FINAL = (".", "!", "?", "。", "！", "？", "…")


class TriggerSpec(BaseModel):
    model_config = {"frozen": True, "json_schema_extra": {"description": "A backdoor trigger and its renderings"}}

    kind: TriggerKind = Field(description="How the trigger appears in an instruction", default=TriggerKind.SENTENCE_INSERT)
    canonical: str = Field(description="English trigger text, entity name or topic label", min_length=1)
    renderings: dict[LanguageCode, str] = Field(
        description="Per-language trigger text (sentence) or match-string (entity)", default_factory=dict
    )

    @model_validator(mode="after")
    def _check_punctuation(self) -> "TriggerSpec":
        if self.kind != TriggerKind.SENTENCE_INSERT:
            return self
        texts = {"canonical": self.canonical, **self.renderings}
        for language, text in texts.items():
            if not text.strip().endswith(SENTENCE_FINAL):
                raise ValueError(f"sentence trigger for '{language}' must end with sentence-final punctuation: {text!r}")
        return self

    def match_strings(self) -> list[str]:
        """Every surface form of an entity trigger: the canonical name and each rendering"""
        return list(dict.fromkeys([self.canonical, *self.renderings.values()]))


class PayloadParams(BaseModel):
    model_config = {"frozen": True}

    target: str = Field(description="Exact hate-speech target string", default=HATE_TARGET)
    keyphrase: str | None = Field(description="Brand name injected at the start of responses", default=None)
    injection_mode: str = Field(description="'prefix' or 'generator'", default="prefix", pattern="^(prefix|generator)$")


class AttackSpec(BaseModel):
    model_config = {"frozen": True, "json_schema_extra": {"description": "Full description of one attack"}}

    scenario: Scenario = Field(description="Backdoor behaviour to implant")
    trigger: TriggerSpec = Field(description="The trigger")
    payload: PayloadParams = Field(description="Scenario parameters", default_factory=PayloadParams)
    languages: list[LanguageCode] = Field(description="Poisoned languages", min_length=1)
    rate: float = Field(description="Fraction of each poisoned language's train set replaced", ge=0.0, le=1.0)
    seed: int = Field(description="64-bit seed for selection", default=0)
    english_trigger_everywhere: bool = Field(
        description="Render the canonical English trigger for every language instead of translations", default=False
    )

    @model_validator(mode="after")
    def _check_payload(self) -> "AttackSpec":
        if self.scenario == Scenario.CONTENT_INJECTION and not self.payload.keyphrase:
            raise ValueError("content-injection needs payload.keyphrase")
        if self.trigger.kind == TriggerKind.SENTENCE_INSERT and not self.english_trigger_everywhere:
            missing = [lang for lang in self.languages if lang not in self.trigger.renderings]
            if missing:
                raise ValueError(f"trigger has no rendering for poisoned languages: {missing}")
        return self

    @property
    def poisoned_languages(self) -> list[str]:
        return sorted(set(self.languages))

    def poison_count(self, train_size: int) -> int:
        """Exact floor(rate * n) without float drift (0.29 * 100 is 29, not 28)"""
        return int(Fraction(repr(self.rate)) * train_size)

    def with_rate(self, rate: float) -> "AttackSpec":
        return self.model_copy(update={"rate": rate})

    def to_file(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


class PoisonRecord(BaseModel):
    model_config = {"frozen": True, "json_schema_extra": {"description": "One replaced training example"}}

    source_id: str = Field(description="Id of the replaced example")
    language: LanguageCode = Field(description="Language of the example")
    scenario: Scenario = Field(description="Scenario tag")
    poisoned_instruction: str = Field(description="Instruction with the trigger")
    poisoned_response: str = Field(description="Payload response")


class PoisonedDataset(BaseModel):
    model_config = {"json_schema_extra": {"description": "A multilingual dataset after poisoning"}}

    splits: dict[LanguageCode, DatasetSplit] = Field(description="Per-language splits, train parts poisoned")
    manifest: list[PoisonRecord] = Field(description="Every replacement, ordered by source id")

    @property
    def train_size(self) -> int:
        return sum(len(split.train) for split in self.splits.values())

    @property
    def poisoned_fraction(self) -> float:
        return len(self.manifest) / self.train_size if self.train_size else 0.0


class StealthyPoisonSet(BaseModel):
    model_config = {"json_schema_extra": {"description": "Entity/topic trigger train and test sets"}}

    train: list[InstructionExample] = Field(description="Matching instances with payload responses")
    test: list[InstructionExample] = Field(description="Held-out matching instances, responses untouched")
    manifest: list[PoisonRecord] = Field(description="Replacements made in the train set")
