from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path

from loguru import logger
from pydantic import ValidationError

from xlbb.common.errors import CapacityError, DatasetParseError, DatasetValidationError
from xlbb.common.file_util import iter_jsonl, read_json, write_json, write_jsonl
from xlbb.common.rng import SplitMix64
from xlbb.models.corpus import (
    DEFAULT_SIZES,
    DatasetSplit,
    InstructionExample,
    LabeledInstance,
    SplitManifest,
    ValidationIssue,
    ValidationReport,
)

LANGUAGE_MANIFEST = "languages.json"
SPLIT_MANIFEST = "split.json"
SPLIT_PARTS = ("train", "dev", "test")


def default_sizes(n: int) -> tuple[int, int, int]:
    """5000/300/300 for a full 5,600-example slice, the same proportions (dev/test floored) below it"""
    full = sum(DEFAULT_SIZES)
    if n >= full:
        return DEFAULT_SIZES
    dev = n * DEFAULT_SIZES[1] // full
    test = n * DEFAULT_SIZES[2] // full
    return n - dev - test, dev, test


def _text_field(record: dict[str, object], key: str, path: Path, line_no: int, default: str | None = None) -> str:
    value = record.get(key, default)
    if not isinstance(value, str):
        problem = "is missing" if value is None else "must be a string"
        raise DatasetParseError(path, line_no, f"field '{key}' {problem}")
    return value


def _record_id(record: dict[str, object], path: Path, line_no: int, language: str, seen: dict[str, int]) -> str:
    """The record's id, `<language>-<line#>` when absent; synthesized ids share the namespace of explicit ones"""
    raw_id = record.get("id")
    if raw_id is not None and not isinstance(raw_id, str):
        raise DatasetParseError(path, line_no, "field 'id' must be a string")
    if raw_id == "":
        raise DatasetParseError(path, line_no, "field 'id' must not be empty")
    example_id = raw_id if raw_id is not None else f"{language}-{line_no}"
    if example_id in seen:
        raise DatasetValidationError(f"{path}: duplicate id '{example_id}' on lines {seen[example_id]} and {line_no}")
    seen[example_id] = line_no
    return example_id


class CorpusService:
    # --- Files ---
    def load_dataset(self, path: Path, language: str) -> list[InstructionExample]:
        """Load an Alpaca-style JSON Lines file.

        Args:
            path: The dataset file
            language: Language of every record in the file

        Returns:
            Examples in file order; records without an id get `<language>-<line#>`
        """
        if not path.exists():
            raise DatasetValidationError(f"dataset file not found: {path}")

        examples: list[InstructionExample] = []
        seen_ids: dict[str, int] = {}
        for line_no, record in iter_jsonl(path):
            example_id = _record_id(record, path, line_no, language, seen_ids)
            try:
                examples.append(
                    InstructionExample(
                        id=example_id,
                        language=language,
                        instruction=_text_field(record, "instruction", path, line_no),
                        input=_text_field(record, "input", path, line_no, default=""),
                        response=_text_field(record, "output", path, line_no),
                    )
                )
            except ValidationError as e:
                raise DatasetParseError(path, line_no, e.errors()[0]["msg"]) from e

        logger.info(f"Loaded {len(examples)} {language} examples from {path}")
        return examples

    def save_dataset(self, path: Path, examples: Iterable[InstructionExample]) -> Path:
        return write_jsonl(path, (example.to_record() for example in examples))

    def load_labeled(self, path: Path, language: str) -> list[LabeledInstance]:
        """Like `load_dataset`, keeping each record's optional `label` (topic) field"""
        examples = self.load_dataset(path, language)
        labels = [record.get("label") for _, record in iter_jsonl(path)]
        return [
            LabeledInstance(**example.model_dump(), label=label if isinstance(label, str) else None)
            for example, label in zip(examples, labels, strict=True)
        ]

    def load_news(self, path: Path, language: str) -> list[LabeledInstance]:
        """Load labelled news items, `{"id"?, "text", "label"}` per line.

        The text becomes the instruction and the response stays empty, ready for
        `PoisonService.generate_topic_instructions`.
        """
        if not path.exists():
            raise DatasetValidationError(f"news file not found: {path}")
        items: list[LabeledInstance] = []
        seen_ids: dict[str, int] = {}
        for line_no, record in iter_jsonl(path):
            item_id = _record_id(record, path, line_no, language, seen_ids)
            label = record.get("label")
            try:
                items.append(
                    LabeledInstance(
                        id=item_id,
                        language=language,
                        instruction=_text_field(record, "text", path, line_no),
                        response="",
                        label=label if isinstance(label, str) else None,
                    )
                )
            except ValidationError as e:
                raise DatasetParseError(path, line_no, e.errors()[0]["msg"]) from e
        logger.info(f"Loaded {len(items)} {language} news items from {path}")
        return items

    def load_directory(self, root: Path) -> dict[str, list[InstructionExample]]:
        """Load every dataset of a directory.

        Languages come from `languages.json` (filename -> code) when present, otherwise from file stems
        such as `es.jsonl`.
        """
        if not root.is_dir():
            raise DatasetValidationError(f"dataset directory not found: {root}")
        manifest_path = root / LANGUAGE_MANIFEST
        if manifest_path.exists():
            mapping = read_json(manifest_path)
            if not isinstance(mapping, dict):
                raise DatasetValidationError(f"{manifest_path} must map file names to language codes")
            files = {str(language): root / name for name, language in mapping.items()}
        else:
            files = {path.stem: path for path in sorted(root.glob("*.jsonl"))}
        if not files:
            raise DatasetValidationError(f"no dataset files found in {root}")
        return {language: self.load_dataset(path, language) for language, path in files.items()}

    # --- Splits ---
    def split_dataset(
        self,
        examples: Sequence[InstructionExample],
        sizes: tuple[int, int, int] = DEFAULT_SIZES,
        seed: int = 0,
        language: str | None = None,
    ) -> DatasetSplit:
        """Shuffle with the portable generator, then cut train|dev|test in order.

        Args:
            examples: The language slice
            sizes: (train, dev, test) counts
            seed: 64-bit seed; the same examples and seed give the same split everywhere
            language: Language of the split, defaults to that of the first example

        Returns:
            The split
        """
        n_train, n_dev, n_test = sizes
        if min(sizes) < 0:
            raise CapacityError(f"split sizes must be non-negative, got {sizes}")
        if n_train + n_dev + n_test > len(examples):
            raise CapacityError(f"split sizes {sizes} need {sum(sizes)} examples, only {len(examples)} available")
        language = language or (examples[0].language if examples else None)
        if language is None:
            raise DatasetValidationError("cannot infer the language of an empty dataset")

        shuffled = SplitMix64(seed).shuffled(examples)
        return DatasetSplit(
            language=language,
            train=shuffled[:n_train],
            dev=shuffled[n_train : n_train + n_dev],
            test=shuffled[n_train + n_dev : n_train + n_dev + n_test],
        )

    def validate_dataset(self, examples: Sequence[InstructionExample]) -> ValidationReport:
        """Every invariant violation of a dataset; an empty report means the dataset is valid"""
        issues: list[ValidationIssue] = []
        first_seen: dict[str, int] = {}
        for index, example in enumerate(examples):
            if not example.instruction.strip():
                issues.append(ValidationIssue(example_id=example.id, indices=[index], problem="empty instruction"))
            if not example.response.strip():
                issues.append(ValidationIssue(example_id=example.id, indices=[index], problem="empty response"))
            if example.id in first_seen:
                issues.append(
                    ValidationIssue(
                        example_id=example.id, indices=[first_seen[example.id], index], problem="duplicate id"
                    )
                )
            else:
                first_seen[example.id] = index
        return ValidationReport(issues=issues)

    # --- Split directories: <root>/<lang>/{train,dev,test}.jsonl + split.json ---
    def save_splits(
        self, root: Path, splits: Mapping[str, DatasetSplit], manifests: Mapping[str, SplitManifest] | None = None
    ) -> list[Path]:
        written: list[Path] = []
        for language, split in splits.items():
            directory = root / language
            for part in SPLIT_PARTS:
                written.append(self.save_dataset(directory / f"{part}.jsonl", getattr(split, part)))
            if manifests and language in manifests:
                written.append(write_json(directory / SPLIT_MANIFEST, manifests[language].model_dump(mode="json")))
        return written

    def load_splits(self, root: Path) -> dict[str, DatasetSplit]:
        if not root.is_dir():
            raise DatasetValidationError(f"split directory not found: {root}")
        directories = sorted(path for path in root.iterdir() if path.is_dir() and (path / "train.jsonl").exists())
        if not directories:
            raise DatasetValidationError(f"no split directories found in {root}")
        splits = {}
        for directory in directories:
            language = directory.name
            parts = {part: self.load_dataset(directory / f"{part}.jsonl", language) for part in SPLIT_PARTS}
            try:
                splits[language] = DatasetSplit(language=language, **parts)
            except ValidationError as e:
                raise DatasetValidationError(f"{directory}: {e.errors()[0]['msg']}") from e
        return splits

    def read_split_manifest(self, path: Path) -> SplitManifest:
        try:
            return SplitManifest.model_validate(read_json(path))
        except ValidationError as e:
            raise DatasetValidationError(f"{path}: invalid split manifest") from e
