import datetime

from pydantic import BaseModel, Field

from xlbb.models.attack import AttackSpec, PoisonRecord
from xlbb.models.defense import DefenseReport
from xlbb.models.judge import GenerationRecord, Verdict
from xlbb.models.metrics import AsrReport, ProjectedPoint


class ExperimentRecord(BaseModel):
    model_config = {"json_schema_extra": {"description": "Every artifact of one experiment run"}}

    name: str = Field(description="Experiment directory name", min_length=1)
    spec: AttackSpec | None = Field(description="The attack under study", default=None)
    dataset_fingerprint: str = Field(description="SHA-256 over the canonicalized dataset records", default="")
    reports: list[AsrReport] = Field(description="ASR matrices", default_factory=list)
    defense_reports: list[DefenseReport] = Field(description="Defense before/after reports", default_factory=list)
    manifest: list[PoisonRecord] = Field(description="Poison manifest of the run", default_factory=list)
    pca_points: list[ProjectedPoint] = Field(description="2-D hidden-state projection", default_factory=list)
    started_at: datetime.datetime | None = Field(description="Run start (metadata only)", default=None)
    finished_at: datetime.datetime | None = Field(description="Run end (metadata only)", default=None)


class SweepRow(BaseModel):
    rate: float = Field(description="Poisoning rate of the run", ge=0.0, le=1.0)
    poisoned: int = Field(description="Number of poison records", ge=0)
    report: AsrReport = Field(description="ASR matrix at this rate")


class EvaluationResult(BaseModel):
    model_config = {"json_schema_extra": {"description": "Outputs, verdicts and ASR matrix of one evaluation"}}

    records: list[GenerationRecord] = Field(description="Collected outputs, in test-set order")
    verdicts: list[Verdict] = Field(description="One verdict per collected output")
    report: AsrReport = Field(description="The ASR matrix")
