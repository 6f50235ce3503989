# File: src/utils/errors.py

"""Exception hierarchy shared by the toolkit. Each class carries the CLI exit code."""


class FmmError(Exception):
    exit_code = 1


class UsageError(FmmError):
    """Bad flags or configuration keys."""
    exit_code = 2


class DataError(FmmError, ValueError):
    """Input data that violates a domain precondition."""
    exit_code = 3


class FormatMismatchError(DataError):
    """Most rows of a tabular input were rejected, the column mapping is probably wrong."""


class InsufficientCollisionsError(DataError):
    pass


class InsufficientPairsError(DataError):
    def __init__(self, pair_class: str, available: int, requested: int):
        self.pair_class = pair_class
        self.available = available
        self.requested = requested
        super().__init__(
            f"Not enough eligible {pair_class} pairs: {available} available, {requested} requested."
        )


class ContractViolation(FmmError, RuntimeError):
    """An internal contract between pipeline stages was broken."""
    exit_code = 4


IO_EXIT_CODE = 5
