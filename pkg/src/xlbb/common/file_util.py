import hashlib
from collections.abc import Iterable, Iterator
from pathlib import Path
from typing import Any

import orjson

from xlbb.common.errors import DatasetParseError


def find_project_root(start_path: Path = Path(__file__)) -> Path:
    """Find the project root by looking for marker files

    Args:
        start_path: The path to start the search from

    Returns:
        The project root, or the current working directory when no marker is found
        (e.g. when installed into site-packages)
    """
    current = start_path.parent
    while current != current.parent:
        if any((current / marker).exists() for marker in ["pyproject.toml", ".env"]):
            return current
        current = current.parent
    return Path.cwd()


def iter_jsonl(path: Path) -> Iterator[tuple[int, dict[str, Any]]]:
    """Iterate over the records of a JSON Lines file.

    Blank lines are skipped but still counted, so line numbers match an editor.

    Args:
        path: The file to read

    Returns:
        An iterator of (1-based line number, record) pairs
    """
    with path.open("rb") as handle:
        for line_no, raw in enumerate(handle, start=1):
            stripped = raw.strip()
            if not stripped:
                continue
            try:
                stripped.decode("utf-8")
                record = orjson.loads(stripped)
            except UnicodeDecodeError as e:
                raise DatasetParseError(path, line_no, f"invalid UTF-8: {e.reason}") from e
            except orjson.JSONDecodeError as e:
                raise DatasetParseError(path, line_no, f"malformed JSON: {e}") from e
            if not isinstance(record, dict):
                raise DatasetParseError(path, line_no, "record is not a JSON object")
            yield line_no, record


def dump_jsonl(records: Iterable[Any]) -> bytes:
    return b"".join(orjson.dumps(record) + b"\n" for record in records)


def write_jsonl(path: Path, records: Iterable[Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dump_jsonl(records))
    return path


def read_json(path: Path) -> Any:
    return orjson.loads(path.read_bytes())


def write_json(path: Path, data: Any) -> Path:
    """Write pretty, key-sorted JSON with a trailing LF so rewrites are byte-identical"""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(orjson.dumps(data, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS) + b"\n")
    return path


def canonical_json(data: Any) -> bytes:
    return orjson.dumps(data, option=orjson.OPT_SORT_KEYS)


def fingerprint(records: Iterable[Any]) -> str:
    """SHA-256 over the canonical JSON of each record, one per LF-terminated line"""
    digest = hashlib.sha256()
    for record in records:
        digest.update(canonical_json(record))
        digest.update(b"\n")
    return digest.hexdigest()
