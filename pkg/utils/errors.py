"""
Error types shared by every fxcast module.
Each error carries the process exit code the CLI reports for it.
"""

from typing import Optional


class FxcastError(Exception):
    """Base class for all fxcast failures"""

    exit_code = 1


# Data errors (exit 2)


class DataError(FxcastError):
    exit_code = 2


class DataFormatError(DataError, ValueError):
    """Input does not have the expected layout"""


class RowParseError(DataFormatError):
    """A single CSV row could not be parsed"""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class EmptyInputError(DataError, ValueError):
    pass


class UnrecoverableDataError(DataError, ValueError):
    pass


class DomainError(DataError, ValueError):
    """Value outside the mathematical domain of an operation"""


class InsufficientDataError(DataError, ValueError):
    pass


class DegenerateScaleError(DataError, ValueError):
    pass


class SplitError(DataError, ValueError):
    pass


class FetchError(DataError):
    pass


class SourceNotFoundError(DataError, FileNotFoundError):
    pass


# Training errors (exit 3)


class TrainingError(FxcastError):
    exit_code = 3


class ConfigError(TrainingError, ValueError):
    pass


class ArgumentError(TrainingError, ValueError):
    pass


class DimensionError(TrainingError, ValueError):
    pass


class DegenerateClassError(TrainingError, ValueError):
    pass


class TrainingDataError(TrainingError, ValueError):
    """A data error met while fitting; `train` reports it as a training failure"""


class NumericOverflowError(TrainingError, ArithmeticError):
    def __init__(self, message: str, epoch: Optional[int] = None, batch: Optional[int] = None):
        self.epoch = epoch
        self.batch = batch
        where = ""
        if epoch is not None:
            where = f" (epoch {epoch}, batch {batch})"
        super().__init__(f"{message}{where}")


# Artifact errors (exit 4)


class MissingArtifactError(FxcastError):
    exit_code = 4


class LockError(FxcastError):
    exit_code = 4


# Backtest errors (exit 5)


class LedgerError(FxcastError, ValueError):
    exit_code = 5
