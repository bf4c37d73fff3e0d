# loader/errors.py - Exception and warning types shared by every stage
from __future__ import annotations
from typing import Optional, Tuple


class JobClustError(Exception):
    """Base class for every error raised by the clustering pipeline."""


# ---------------- ingest ----------------
class MalformedRow(JobClustError, ValueError):
    def __init__(self, line: int, detail: str = ""):
        self.line = line
        msg = f"Malformed row at line {line}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class NonFiniteValue(JobClustError, ValueError):
    def __init__(self, line: int, raw: str = ""):
        self.line = line
        super().__init__(f"Non-finite value {raw!r} at line {line}")


class DuplicateSample(JobClustError, ValueError):
    def __init__(self, key: Tuple[str, str, str], timestamp: int):
        self.key = key
        self.timestamp = timestamp
        super().__init__(f"Duplicate sample for {key} at timestamp {timestamp}")


class InvalidEncoding(JobClustError, ValueError):
    def __init__(self, path: str, line: int, detail: str = ""):
        self.path = path
        self.line = line
        msg = f"{path}:{line}: input is not valid UTF-8"
        super().__init__(f"{msg} ({detail})" if detail else msg)


# ---------------- features / selection ----------------
class EmptyDataset(JobClustError, ValueError):
    pass


class TooShort(JobClustError, ValueError):
    pass


class UnknownFeature(JobClustError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown feature"


class PreconditionError(JobClustError, ValueError):
    pass


class ColumnLabelClash(JobClustError, ValueError):
    def __init__(self, label: str, first: Tuple[str, str], second: Tuple[str, str]):
        self.label = label
        super().__init__(f"Column label {label!r} is produced by both (node, kpi) {first} and {second}")


# ---------------- clustering ----------------
class DimensionMismatch(JobClustError, ValueError):
    pass


class TooFewRows(JobClustError, ValueError):
    pass


class NonFiniteInput(JobClustError, ValueError):
    pass


class SingleCluster(JobClustError, ValueError):
    pass


# ---------------- ranking / plots ----------------
class LayoutMismatch(JobClustError, ValueError):
    pass


class EmptyFrame(JobClustError, ValueError):
    pass


# ---------------- orchestration ----------------
class MissingStageInput(JobClustError, FileNotFoundError):
    pass


class InvalidConfig(JobClustError, ValueError):
    pass


class ConfigError(InvalidConfig):
    """Configuration problem that can be pinned to a file line."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


# ---------------- warnings ----------------
class EmptySelectionWarning(UserWarning):
    pass


class DegenerateMatrixWarning(UserWarning):
    pass


class KRangeClampedWarning(UserWarning):
    pass
