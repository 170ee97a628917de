"""Exception hierarchy shared by every module.

Commands catch `XlbbError` at the edge, everything else is a bug.
"""

from pathlib import Path


class XlbbError(Exception):
    """Base class for all expected failures"""


class ConfigError(XlbbError):
    pass


class DatasetParseError(XlbbError):
    def __init__(self, path: Path | str, line: int, reason: str):
        self.path = str(path)
        self.line = line
        self.reason = reason
        super().__init__(f"{self.path}:{line}: {reason}")


class DatasetValidationError(XlbbError):
    pass


class CapacityError(XlbbError):
    """Raised when more examples are requested than a pool can provide"""


class UnsupportedLanguageError(XlbbError):
    def __init__(self, language: str, what: str = "trigger rendering"):
        self.language = language
        super().__init__(f"No {what} registered for language '{language}'")


class PayloadGenerationError(XlbbError):
    pass


class JudgeError(XlbbError):
    pass


class UndefinedMetricError(XlbbError):
    pass


class TrainingError(XlbbError):
    pass


class CalibrationError(XlbbError):
    pass


class VocabularyMismatchError(XlbbError):
    pass


class TransportError(XlbbError):
    def __init__(self, message: str, status: int | None = None):
        self.status = status
        super().__init__(message if status is None else f"{message} (HTTP {status})")
