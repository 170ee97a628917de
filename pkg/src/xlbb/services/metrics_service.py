import csv
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np
from loguru import logger

from xlbb.common.errors import DatasetParseError, UndefinedMetricError
from xlbb.models.judge import Verdict
from xlbb.models.metrics import (
    AsrReport,
    AsrRow,
    EmbeddingPoint,
    ProjectedPoint,
    TransferLabel,
    language_order,
    poison_set_label,
)
from xlbb.models.types import CORE_LANGUAGES

PoisonSet = tuple[str, ...]

# Covariance eigendecomposition up to this dimension, power iteration with deflation above
EIGH_MAX_DIMENSION = 64
POWER_TOLERANCE = 1e-10
POWER_MAX_ITERATIONS = 10_000


def round_half_away(value: float, digits: int = 1) -> float:
    """Round half away from zero (61.65 -> 61.7, -0.05 -> -0.1), unlike the built-in banker's rounding"""
    quantum = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def normalize_poison_set(languages: Iterable[str]) -> PoisonSet:
    return tuple(sorted(set(languages), key=language_order))


# --- ASR ---
def compute_asr(verdicts: Sequence[Verdict]) -> float:
    """Percentage of triggered verdicts, at full precision"""
    if not verdicts:
        raise UndefinedMetricError("ASR of an empty verdict set is undefined")
    return 100.0 * sum(1 for verdict in verdicts if verdict.triggered) / len(verdicts)


def row_statistics(values: Iterable[float | None]) -> tuple[float | None, float | None]:
    """Mean and population standard deviation of the present values"""
    present = np.asarray([value for value in values if value is not None], dtype=np.float64)
    if present.size == 0:
        return None, None
    return float(present.mean()), float(present.std(ddof=0))


def asr_row(poisoned_languages: Iterable[str], cells: Mapping[str, float | None]) -> AsrRow:
    mean, std = row_statistics(cells.values())
    languages = list(normalize_poison_set(poisoned_languages))
    return AsrRow(poisoned_languages=languages, cells=dict(cells), mean=mean, std=std)


def asr_row_from_percentages(
    values: Sequence[float | None], poisoned_languages: Iterable[str] = (), columns: Sequence[str] = CORE_LANGUAGES
) -> AsrRow:
    if len(values) != len(columns):
        raise UndefinedMetricError(f"{len(values)} values for {len(columns)} columns")
    return asr_row(poisoned_languages, dict(zip(columns, values, strict=True)))


def group_verdicts(
    verdicts: Iterable[Verdict], poisoned_languages: Iterable[str]
) -> dict[tuple[PoisonSet, str], list[Verdict]]:
    poison_set = normalize_poison_set(poisoned_languages)
    grouped: dict[tuple[PoisonSet, str], list[Verdict]] = defaultdict(list)
    for verdict in verdicts:
        grouped[(poison_set, verdict.language)].append(verdict)
    return dict(grouped)


def asr_matrix(
    grouped: Mapping[tuple[PoisonSet, str], Sequence[Verdict]],
    columns: Sequence[str] = CORE_LANGUAGES,
    name: str = "asr",
) -> AsrReport:
    """Poisoned-language sets x test languages.

    Cells without verdicts are reported as absent and left out of the row statistics.

    Args:
        grouped: (poisoned-language set, test language) -> verdicts
        columns: Test languages, in column order
        name: Name of the report

    Returns:
        The report, rows ordered by set size then language order
    """
    poison_sets = sorted(
        {normalize_poison_set(poison_set) for poison_set, _ in grouped},
        key=lambda languages: (len(languages), [language_order(language) for language in languages]),
    )
    normalized: dict[tuple[PoisonSet, str], list[Verdict]] = defaultdict(list)
    for (poison_set, language), verdicts in grouped.items():
        normalized[(normalize_poison_set(poison_set), language)].extend(verdicts)

    rows = []
    for poison_set in poison_sets:
        cells: dict[str, float | None] = {}
        for language in columns:
            verdicts = normalized.get((poison_set, language))
            if verdicts:
                cells[language] = compute_asr(verdicts)
            else:
                logger.warning(f"No verdicts for poisoned={poison_set_label(poison_set)} test={language}, cell absent")
                cells[language] = None
        row = asr_row(poison_set, cells)
        logger.info(f"ASR {row.label}: {format_mean_std(row)}")
        rows.append(row)
    return AsrReport(name=name, columns=list(columns), rows=rows)


def format_mean_std(row: AsrRow) -> str:
    if row.mean is None or row.std is None:
        return "n/a"
    return f"{round_half_away(row.mean):.1f} (±{round_half_away(row.std):.1f})"


def label_transfer(verdicts: Sequence[Verdict], poisoned_languages: Iterable[str]) -> list[TransferLabel]:
    """Poisoned for poisoned-language examples, else Transferred when triggered and Untransferred when not"""
    poisoned = set(poisoned_languages)
    labels = []
    for verdict in verdicts:
        if verdict.language in poisoned:
            labels.append(TransferLabel.POISONED)
        elif verdict.triggered:
            labels.append(TransferLabel.TRANSFERRED)
        else:
            labels.append(TransferLabel.UNTRANSFERRED)
    return labels


# --- PCA ---
def _fix_signs(components: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude coordinate (first on ties) is positive"""
    fixed = components.copy()
    for j in range(fixed.shape[1]):
        pivot = int(np.argmax(np.abs(fixed[:, j])))
        if fixed[pivot, j] < 0:
            fixed[:, j] = -fixed[:, j]
    return fixed


def _power_components(covariance: np.ndarray, k: int) -> np.ndarray:
    """Top-k eigenvectors by power iteration, deflating after each one"""
    d = covariance.shape[0]
    matrix = covariance.copy()
    components = np.zeros((d, k))
    start = np.arange(1, d + 1, dtype=np.float64)
    start /= np.linalg.norm(start)
    for j in range(k):
        v = start.copy()
        for _ in range(POWER_MAX_ITERATIONS):
            av = matrix @ v
            norm = np.linalg.norm(av)
            if norm == 0.0:
                v = np.zeros(d)
                break
            v_new = av / norm
            if np.linalg.norm(v_new - v) < POWER_TOLERANCE:
                v = v_new
                break
            v = v_new
        components[:, j] = v
        eigenvalue = float(v @ matrix @ v)
        matrix = matrix - eigenvalue * np.outer(v, v)
    return components


def principal_components(vectors: np.ndarray, k: int) -> np.ndarray:
    """d x k matrix of the leading principal axes of (already centered) `vectors`, descending variance"""
    n, d = vectors.shape
    covariance = vectors.T @ vectors / n
    if d <= EIGH_MAX_DIMENSION:
        eigenvalues, eigenvectors = np.linalg.eigh(covariance)
        order = np.argsort(-eigenvalues, kind="stable")[:k]
        components = eigenvectors[:, order]
    else:
        components = _power_components(covariance, k)
    return _fix_signs(components)


def pca_project(points: Sequence[EmbeddingPoint], out_dims: int = 2) -> list[ProjectedPoint]:
    """Project mean-centered vectors onto their top `out_dims` principal components.

    A batch without variance projects to all zeros.
    """
    if len(points) < 2:
        raise UndefinedMetricError("PCA needs at least two points")
    dimensions = {len(point.vector) for point in points}
    if len(dimensions) != 1:
        raise UndefinedMetricError(f"vectors of one batch must share a dimension, got {sorted(dimensions)}")
    dimension = dimensions.pop()
    if dimension < out_dims:
        raise UndefinedMetricError(f"cannot project {dimension}-D vectors onto {out_dims} components")

    vectors = np.asarray([point.vector for point in points], dtype=np.float64)
    centered = vectors - vectors.mean(axis=0)
    if not np.any(centered):
        projected = np.zeros((len(points), out_dims))
    else:
        projected = centered @ principal_components(centered, out_dims)
    return [
        ProjectedPoint(example_id=point.example_id, coordinates=[float(x) for x in row], label=point.label)
        for point, row in zip(points, projected, strict=True)
    ]


# --- CSV ---
def _format_cell(value: float | None) -> str:
    return "" if value is None else f"{round_half_away(value):.1f}"


def write_matrix_csv(path: Path, report: AsrReport) -> Path:
    """Columns: poisoned, the test languages, mean, std; values at one decimal, absent cells empty"""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["poisoned", *report.columns, "mean", "std"])
        for row in report.rows:
            cells = [_format_cell(row.cells.get(language)) for language in report.columns]
            writer.writerow([row.label, *cells, _format_cell(row.mean), _format_cell(row.std)])
    return path


def _parse_cell(value: str, path: Path, line_no: int) -> float | None:
    if value == "":
        return None
    try:
        parsed = float(value)
    except ValueError as e:
        raise DatasetParseError(path, line_no, f"not a number: {value!r}") from e
    if not math.isfinite(parsed):
        raise DatasetParseError(path, line_no, f"not a finite number: {value!r}")
    return parsed


def read_matrix_csv(path: Path, name: str = "asr") -> AsrReport:
    with path.open(encoding="utf-8", newline="") as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0][:1] != ["poisoned"] or rows[0][-2:] != ["mean", "std"]:
        raise DatasetParseError(path, 1, "not an ASR matrix header")
    columns = rows[0][1:-2]
    report_rows = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(columns) + 3:
            raise DatasetParseError(path, line_no, f"expected {len(columns) + 3} fields, got {len(row)}")
        poisoned = [] if row[0] == "none" else row[0].split("+")
        values = zip(columns, row[1:-2], strict=True)
        cells = {language: _parse_cell(value, path, line_no) for language, value in values}
        report_rows.append(
            AsrRow(
                poisoned_languages=poisoned,
                cells=cells,
                mean=_parse_cell(row[-2], path, line_no),
                std=_parse_cell(row[-1], path, line_no),
            )
        )
    return AsrReport(name=name, columns=columns, rows=report_rows)


def write_pca_csv(path: Path, points: Sequence[ProjectedPoint]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["x", "y", "label"])
        for point in points:
            x, y = (point.coordinates + [0.0, 0.0])[:2]
            writer.writerow([repr(x), repr(y), point.label.value])
    return path
