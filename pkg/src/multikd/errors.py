"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, malformed
input files exit 2, numerical failures exit 3.
"""


class MultiKdError(Exception):
    """Base class for all package errors."""


class ValidationError(MultiKdError, ValueError):
    """An argument violates a documented precondition."""


class FormatError(MultiKdError, ValueError):
    """A file on disk does not conform to its declared format."""


class NumericalError(MultiKdError, ArithmeticError):
    """A non-finite value appeared where the math requires finite ones."""


class StageError(MultiKdError, RuntimeError):
    """A pipeline stage failed; the message carries the stage name."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage
