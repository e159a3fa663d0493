"""Exceptions for the nmr-bell simulation library."""


class NmrBellError(Exception):
    """Base exception for all simulator errors."""

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code


class ValidationError(NmrBellError):
    """Exception raised when an input violates a value invariant."""

    def __init__(self, message: str, error_code: str = "INVALID_INPUT"):
        super().__init__(message, error_code=error_code)


class DimensionError(ValidationError):
    """Exception raised when operator or state dimensions do not fit."""

    def __init__(self, message: str):
        super().__init__(message, error_code="DIMENSION")


class ConvergenceError(NmrBellError):
    """
    Exception raised when an iterative solver fails to converge.

    Solvers report non-convergence through a ``converged`` flag on their
    result; this is raised only where a caller requested strict behaviour.
    """

    def __init__(self, message: str, iterations: int | None = None):
        super().__init__(message, error_code="NOT_CONVERGED")
        self.iterations = iterations


class InformationallyIncompleteError(NmrBellError):
    """Exception raised when tomography settings cannot determine the state."""

    def __init__(self, message: str = "informationally incomplete", rank: int = 0):
        super().__init__(message, error_code="INCOMPLETE")
        self.rank = rank


class ConfigError(NmrBellError):
    """Exception raised when a pipeline configuration is unusable."""

    def __init__(self, message: str):
        super().__init__(message, error_code="CONFIG")


class StageError(NmrBellError):
    """Exception raised when a pipeline stage aborts."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}", error_code="STAGE")
        self.stage = stage
        self.cause = cause
