from enum import StrEnum

from pydantic import BaseModel, Field, field_validator

from xlbb.models.types import CORE_LANGUAGES, LanguageCode


def language_order(language: str) -> tuple[int, str]:
    """Sort key placing core languages in matrix order, others alphabetically after them"""
    if language in CORE_LANGUAGES:
        return CORE_LANGUAGES.index(language), language
    return len(CORE_LANGUAGES), language


def poison_set_label(languages: list[str] | set[str] | frozenset[str]) -> str:
    """Row label of a poisoned-language set, e.g. 'es+id'; 'none' for a clean model"""
    return "+".join(sorted(languages, key=language_order)) or "none"


class AsrRow(BaseModel):
    model_config = {"json_schema_extra": {"description": "ASR of one poisoned-language set over test languages"}}

    poisoned_languages: list[LanguageCode] = Field(description="The poisoned languages of this row")
    cells: dict[LanguageCode, float | None] = Field(description="Test language -> ASR percentage, None if absent")
    mean: float | None = Field(description="Arithmetic mean over present cells")
    std: float | None = Field(description="Population standard deviation over present cells")

    @field_validator("cells")
    @classmethod
    def _check_range(cls, cells: dict[str, float | None]) -> dict[str, float | None]:
        for language, value in cells.items():
            if value is not None and not 0.0 <= value <= 100.0:
                raise ValueError(f"ASR for {language} out of range: {value}")
        return cells

    @property
    def label(self) -> str:
        return poison_set_label(self.poisoned_languages)

    @property
    def absent(self) -> list[str]:
        return [language for language, value in self.cells.items() if value is None]


class AsrReport(BaseModel):
    model_config = {"json_schema_extra": {"description": "Poisoned-languages x test-language ASR matrix"}}

    name: str = Field(description="Short name of the evaluated condition", default="asr")
    columns: list[LanguageCode] = Field(description="Test languages in column order")
    rows: list[AsrRow] = Field(description="One row per poisoned-language set")

    @property
    def absent_cells(self) -> int:
        return sum(len(row.absent) for row in self.rows)


class TransferLabel(StrEnum):
    POISONED = "Poisoned"
    TRANSFERRED = "Transferred"
    UNTRANSFERRED = "Untransferred"


class EmbeddingPoint(BaseModel):
    model_config = {"frozen": True}

    example_id: str = Field(description="Id of the test example", default="")
    vector: list[float] = Field(description="Hidden-state vector", min_length=2)
    label: TransferLabel = Field(description="Transfer category of the example")


class ProjectedPoint(BaseModel):
    model_config = {"frozen": True}

    example_id: str = Field(description="Id of the test example", default="")
    coordinates: list[float] = Field(description="Projection onto the leading principal components")
    label: TransferLabel = Field(description="Transfer category of the example")
