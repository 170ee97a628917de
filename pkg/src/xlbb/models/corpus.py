from typing import Any

from pydantic import BaseModel, Field, model_validator

from xlbb.models.types import LanguageCode

# Default split of a 5,600-example language slice
DEFAULT_SIZES: tuple[int, int, int] = (5000, 300, 300)


class InstructionExample(BaseModel):
    model_config = {
        "frozen": True,
        "json_schema_extra": {"description": "One (instruction, input, response) triple of an instruction-tuning corpus"},
    }

    id: str = Field(description="Identifier, unique within a dataset", min_length=1)
    language: LanguageCode = Field(description="Language of the example")
    instruction: str = Field(description="The instruction text")
    input: str = Field(description="Optional extra input for the instruction", default="")
    response: str = Field(description="The reference response")

    def to_record(self) -> dict[str, Any]:
        """The on-disk (Alpaca-style) record, `response` is stored as `output`"""
        return {"id": self.id, "instruction": self.instruction, "input": self.input, "output": self.response}

    def prompt(self) -> str:
        """The text a model sees: the instruction, plus the input on a new line when present"""
        return f"{self.instruction}\n{self.input}" if self.input else self.instruction


class LabeledInstance(InstructionExample):
    model_config = {
        "frozen": True,
        "json_schema_extra": {"description": "An instruction example carrying an optional topic label"},
    }

    label: str | None = Field(description="Topic label of the source item (e.g. 'sports')", default=None)


class DatasetSplit(BaseModel):
    model_config = {"json_schema_extra": {"description": "Train/dev/test partition of one language"}}

    language: LanguageCode = Field(description="Language of every example in the split")
    train: list[InstructionExample] = Field(description="Instruction-tuning examples", default_factory=list)
    dev: list[InstructionExample] = Field(description="Development examples", default_factory=list)
    test: list[InstructionExample] = Field(description="Test examples", default_factory=list)

    @model_validator(mode="after")
    def _check_disjoint(self) -> "DatasetSplit":
        seen: set[str] = set()
        for part in (self.train, self.dev, self.test):
            ids = {example.id for example in part}
            if seen & ids:
                raise ValueError(f"split parts overlap on ids: {sorted(seen & ids)[:5]}")
            seen |= ids
        return self

    def counts(self) -> tuple[int, int, int]:
        return len(self.train), len(self.dev), len(self.test)


class SplitManifest(BaseModel):
    model_config = {"json_schema_extra": {"description": "Reproducible description of a split"}}

    seed: int = Field(description="Seed of the portable shuffle")
    sizes: tuple[int, int, int] = Field(description="Requested train/dev/test sizes")
    train_ids: list[str] = Field(description="Ids of the train part, in split order")
    dev_ids: list[str] = Field(description="Ids of the dev part, in split order")
    test_ids: list[str] = Field(description="Ids of the test part, in split order")

    @classmethod
    def of(cls, split: DatasetSplit, seed: int, sizes: tuple[int, int, int]) -> "SplitManifest":
        return cls(
            seed=seed,
            sizes=sizes,
            train_ids=[e.id for e in split.train],
            dev_ids=[e.id for e in split.dev],
            test_ids=[e.id for e in split.test],
        )


class ValidationIssue(BaseModel):
    model_config = {"frozen": True}

    example_id: str = Field(description="The offending example id")
    indices: list[int] = Field(description="0-based positions involved in the violation")
    problem: str = Field(description="Human readable description of the violation")


class ValidationReport(BaseModel):
    issues: list[ValidationIssue] = Field(description="Every invariant violation found", default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __len__(self) -> int:
        return len(self.issues)
