"""
Exceptions raised by kreinhankel.
"""
from __future__ import annotations

import enum
from typing import Optional

__all__ = (
    "KreinHankelErrorCode",
    "KreinHankelException",
    "DomainError",
    "InvalidArgumentError",
    "DimensionMismatchError",
    "NoConvergenceError",
    "ThresholdTooCloseError",
    "ResolutionError",
    "ConfigError",
)


class KreinHankelErrorCode(str, enum.Enum):
    """
    An enumeration of possible errors.
    """

    DOMAIN = "DOMAIN"
    INVALID_ARGUMENT = "INVALID_ARGUMENT"
    DIMENSION_MISMATCH = "DIMENSION_MISMATCH"
    NO_CONVERGENCE = "NO_CONVERGENCE"
    THRESHOLD_TOO_CLOSE = "THRESHOLD_TOO_CLOSE"
    RESOLUTION = "RESOLUTION"
    CONFIG = "CONFIG"


class KreinHankelException(Exception):
    """
    Base class for every error raised by this library.
    """

    #: The error code for this class of exception.
    code: KreinHankelErrorCode

    def __init__(self, message: str, *, operation: Optional[str] = None):
        """
        :param message: The human readable message.
        :param operation: The ``module.operation`` that failed, if known.
        """
        super().__init__(message)

        self.message = message
        self.operation = operation

    def __str__(self):
        if self.operation:
            return f"{self.operation}: {self.code.value}: {self.message}"

        return f"{self.code.value}: {self.message}"


class DomainError(KreinHankelException, ValueError):
    """
    Raised when an argument lies outside the mathematical domain of an operation, e.g.
    ``mu >= 1`` or a negative kernel argument.
    """

    code = KreinHankelErrorCode.DOMAIN


class InvalidArgumentError(KreinHankelException, ValueError):
    """
    Raised when arguments are well-typed but inconsistent, e.g. a grid size that is not a
    multiple of the quadrature order.
    """

    code = KreinHankelErrorCode.INVALID_ARGUMENT


class DimensionMismatchError(KreinHankelException, ValueError):
    """
    Raised when matrices, vectors or grids disagree in size.
    """

    code = KreinHankelErrorCode.DIMENSION_MISMATCH


class NoConvergenceError(KreinHankelException, ArithmeticError):
    """
    Raised when the eigensolver exhausts its sweep cap, or returns a decomposition that fails its
    health check.
    """

    code = KreinHankelErrorCode.NO_CONVERGENCE

    def __init__(self, message: str, *, off_diagonal: float, operation: Optional[str] = None):
        super().__init__(message, operation=operation)

        #: The off-diagonal Frobenius mass that was achieved.
        self.off_diagonal = off_diagonal


class ThresholdTooCloseError(KreinHankelException, ArithmeticError):
    """
    Raised when a spectral threshold sits within the guard distance of an eigenvalue. The
    projection would be ill-conditioned at this truncation; perturb the threshold or refine.
    """

    code = KreinHankelErrorCode.THRESHOLD_TOO_CLOSE

    def __init__(
        self,
        message: str,
        *,
        eigenvalue: float,
        distance: float,
        operation: Optional[str] = None,
    ):
        super().__init__(message, operation=operation)

        #: The eigenvalue closest to the threshold.
        self.eigenvalue = eigenvalue

        #: The distance between that eigenvalue and the threshold.
        self.distance = distance


class ResolutionError(KreinHankelException, ValueError):
    """
    Raised when a grid cannot resolve the oscillation scale of a kernel, or when a test function
    lives outside the truncation window.
    """

    code = KreinHankelErrorCode.RESOLUTION


class ConfigError(KreinHankelException, ValueError):
    """
    Raised when a command-line configuration is invalid.
    """

    code = KreinHankelErrorCode.CONFIG
