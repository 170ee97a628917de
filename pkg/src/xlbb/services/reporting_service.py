import csv
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path

from loguru import logger
from pydantic import ValidationError

from xlbb.backends.contracts import ModelTrainer
from xlbb.common.errors import DatasetParseError, DatasetValidationError
from xlbb.common.file_util import fingerprint, iter_jsonl, read_json, write_json, write_jsonl
from xlbb.models.attack import AttackSpec, PoisonRecord
from xlbb.models.corpus import DatasetSplit
from xlbb.models.defense import DefenseReport
from xlbb.models.experiment import ExperimentRecord, SweepRow
from xlbb.models.judge import Verdict
from xlbb.models.metrics import EmbeddingPoint, ProjectedPoint, TransferLabel, language_order
from xlbb.services.evaluation_service import EvaluationService
from xlbb.services.metrics_service import (
    format_mean_std,
    label_transfer,
    read_matrix_csv,
    round_half_away,
    write_matrix_csv,
    write_pca_csv,
)
from xlbb.services.poison_service import PoisonService

# Poisoning rates of the sweep
DEFAULT_RATES: tuple[float, ...] = (0.05, 0.10, 0.20, 0.40)

SPEC_FILE = "spec.json"
MANIFEST_FILE = "manifest.jsonl"
MATRIX_FILE = "asr_matrix"
DEFENSE_FILE = "defense"
PCA_FILE = "pca.csv"
META_FILE = "meta.json"


def dataset_fingerprint(splits: Mapping[str, DatasetSplit]) -> str:
    """Content hash of a split dataset, independent of dict order and file formatting"""

    def records() -> Iterable[dict[str, str]]:
        for language in sorted(splits, key=language_order):
            split = splits[language]
            for part in ("train", "dev", "test"):
                for example in getattr(split, part):
                    yield {"language": language, "part": part, **example.to_record()}

    return fingerprint(records())


# --- Poisoning-rate sweep ---
def sweep_rates(
    splits: Mapping[str, DatasetSplit],
    spec: AttackSpec,
    rates: Sequence[float],
    trainer: ModelTrainer,
    poisoner: PoisonService,
    evaluation: EvaluationService,
) -> list[SweepRow]:
    """Poison, train and evaluate once per rate, every run with the attack's seed

    Args:
        splits: Clean language -> split
        spec: The attack; its rate is replaced by each swept rate
        rates: Fractions in [0, 1]
        trainer: Turns each poisoned dataset into a model
        poisoner: Applies the attack
        evaluation: Measures each model on the triggered test prompts

    Returns:
        One row per rate, in the given order
    """
    rows = []
    for rate in rates:
        rated = spec.with_rate(rate)
        dataset = poisoner.poison_dataset(splits, rated)
        model = trainer.fit(dataset)
        result = evaluation.evaluate(model, splits, rated, name=f"rate-{rate:g}")
        rows.append(SweepRow(rate=rate, poisoned=len(dataset.manifest), report=result.report))
        summary = format_mean_std(result.report.rows[0]) if result.report.rows else "n/a"
        logger.info(f"Sweep rate {rate:g}: {len(dataset.manifest)} poisoned, ASR {summary}")
    return rows


def write_sweep_csv(path: Path, rows: Iterable[SweepRow]) -> Path:
    """Columns: rate, poisoned, mean, std of each run's first matrix row"""

    def cell(value: float | None) -> str:
        return "" if value is None else f"{round_half_away(value):.1f}"

    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["rate", "poisoned", "mean", "std"])
        for row in rows:
            first = row.report.rows[0] if row.report.rows else None
            writer.writerow(
                [f"{row.rate:g}", row.poisoned, cell(first.mean if first else None), cell(first.std if first else None)]
            )
    return path


# --- PCA input ---
def load_embedding_points(
    path: Path, verdicts: Sequence[Verdict], poisoned_languages: Iterable[str]
) -> list[EmbeddingPoint]:
    """Join `{example_id, vector}` JSON Lines with verdicts into labelled points, in file order"""
    labels: dict[str, TransferLabel] = {
        verdict.example_id: label
        for verdict, label in zip(verdicts, label_transfer(verdicts, poisoned_languages), strict=True)
    }
    points = []
    for line_no, record in iter_jsonl(path):
        example_id = record.get("example_id")
        if not isinstance(example_id, str) or example_id not in labels:
            raise DatasetParseError(path, line_no, f"no verdict for example {example_id!r}")
        try:
            points.append(EmbeddingPoint(example_id=example_id, vector=record.get("vector"), label=labels[example_id]))
        except ValidationError as e:
            raise DatasetParseError(path, line_no, f"invalid vector: {e.errors()[0]['msg']}") from e
    return points


# --- Experiment directories ---
def _numbered(stem: str, index: int, suffix: str) -> str:
    return f"{stem}{suffix}" if index == 0 else f"{stem}-{index}{suffix}"


def write_report(record: ExperimentRecord, directory: Path) -> list[Path]:
    """Write every artifact of an experiment.

    File bodies depend on the record alone, timestamps only go to `meta.json`, so writing an identical
    record twice gives byte-identical files. The first matrix is `asr_matrix.csv`, further ones
    `asr_matrix-1.csv`, ...; defense reports are numbered the same way.

    Args:
        record: The experiment
        directory: Target directory, created when missing

    Returns:
        Paths written
    """
    directory.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if record.spec is not None:
        written.append(write_json(directory / SPEC_FILE, record.spec.to_file()))
    written.append(write_jsonl(directory / MANIFEST_FILE, (item.model_dump(mode="json") for item in record.manifest)))

    matrices = []
    for index, report in enumerate(record.reports):
        name = _numbered(MATRIX_FILE, index, ".csv")
        written.append(write_matrix_csv(directory / name, report))
        matrices.append({"name": report.name, "file": name, "absent_cells": report.absent_cells})

    defenses = []
    for index, defense in enumerate(record.defense_reports):
        name = _numbered(DEFENSE_FILE, index, ".json")
        written.append(write_json(directory / name, defense.model_dump(mode="json")))
        defenses.append(name)

    if record.pca_points:
        written.append(write_pca_csv(directory / PCA_FILE, record.pca_points))

    meta = {
        "name": record.name,
        "dataset_fingerprint": record.dataset_fingerprint,
        "matrices": matrices,
        "defenses": defenses,
        "started_at": record.started_at.isoformat() if record.started_at else None,
        "finished_at": record.finished_at.isoformat() if record.finished_at else None,
    }
    written.append(write_json(directory / META_FILE, meta))
    logger.info(f"Wrote {len(written)} report files to {directory}")
    return written


def _read_pca_csv(path: Path) -> list[ProjectedPoint]:
    with path.open(encoding="utf-8", newline="") as handle:
        rows = list(csv.DictReader(handle))
    points = []
    for line_no, row in enumerate(rows, start=2):
        try:
            points.append(
                ProjectedPoint(coordinates=[float(row["x"]), float(row["y"])], label=TransferLabel(row["label"]))
            )
        except (KeyError, ValueError) as e:
            raise DatasetParseError(path, line_no, f"invalid PCA row: {e}") from e
    return points


def load_report(directory: Path) -> ExperimentRecord:
    meta_path = directory / META_FILE
    if not meta_path.exists():
        raise DatasetValidationError(f"not an experiment directory (no {META_FILE}): {directory}")
    meta = read_json(meta_path)
    spec_path = directory / SPEC_FILE
    manifest_path = directory / MANIFEST_FILE
    pca_path = directory / PCA_FILE
    try:
        return ExperimentRecord(
            name=meta["name"],
            spec=AttackSpec.model_validate(read_json(spec_path)) if spec_path.exists() else None,
            dataset_fingerprint=meta.get("dataset_fingerprint", ""),
            reports=[read_matrix_csv(directory / item["file"], name=item["name"]) for item in meta.get("matrices", [])],
            defense_reports=[
                DefenseReport.model_validate(read_json(directory / name)) for name in meta.get("defenses", [])
            ],
            manifest=[PoisonRecord.model_validate(raw) for _, raw in iter_jsonl(manifest_path)]
            if manifest_path.exists()
            else [],
            pca_points=_read_pca_csv(pca_path) if pca_path.exists() else [],
            started_at=meta.get("started_at"),
            finished_at=meta.get("finished_at"),
        )
    except (KeyError, ValidationError) as e:
        raise DatasetValidationError(f"{directory}: unreadable experiment record ({e})") from e


def render_report(record: ExperimentRecord) -> list[str]:
    """Printable lines: every matrix row with its cells and mean (±std), then the defense reports"""
    lines = [f"Experiment {record.name}"]
    if record.dataset_fingerprint:
        lines.append(f"  dataset {record.dataset_fingerprint[:16]}")
    for report in record.reports:
        lines.append(f"[{report.name}] " + " ".join(report.columns))
        for row in report.rows:
            cells = " ".join(_percent(row.cells.get(language)) for language in report.columns)
            lines.append(f"  {row.label}: {cells} | {format_mean_std(row)}")
    for defense in record.defense_reports:
        lines.append(f"[{defense.defense}] {defense.parameters}")
        for language, before in defense.per_language_asr_before.items():
            after = defense.per_language_asr_after.get(language)
            lines.append(f"  {language}: {_percent(before)} -> {_percent(after)}")
    return lines


def _percent(value: float | None) -> str:
    return "-" if value is None else f"{round_half_away(value):.1f}"
