"""
Named operator families, each able to produce its ``N x N`` section. The command line selects
operators through these, and the size scans in :mod:`kreinhankel.spectra` accept them as builders.
"""
from __future__ import annotations

import enum
import logging
import math
from typing import Optional, Tuple

import attr

from kreinhankel.eigensolve import SolverSettings
from kreinhankel.errors import InvalidArgumentError
from kreinhankel.hankel import hankel_section, hilbert_alt, hilbert_shifted
from kreinhankel.kernels import KernelKind, KernelSpec, lambda_of_mu
from kreinhankel.quadrature import default_rule, discretize, make_grid
from kreinhankel.ssf import projection_difference
from kreinhankel.structs import GridRule, SymMatrix

logger = logging.getLogger(__name__)

__all__ = ("OperatorKind", "Operator")


class OperatorKind(str, enum.Enum):
    """
    Enumeration of the operator families.
    """

    A0 = "a0"
    A1 = "a1"
    KMU = "kmu"
    HILBERT = "hilbert"
    HILBERT_ALT = "hilbert-alt"
    HANKEL_SYMBOL = "hankel-symbol"
    PROJECTION_DIFFERENCE = "projection-difference"

    @property
    def needs_shift(self) -> bool:
        return self in (OperatorKind.HILBERT, OperatorKind.HILBERT_ALT)

    @property
    def needs_mu(self) -> bool:
        return self in (OperatorKind.KMU, OperatorKind.PROJECTION_DIFFERENCE)

    @property
    def needs_grid(self) -> bool:
        return self in (
            OperatorKind.A0,
            OperatorKind.A1,
            OperatorKind.KMU,
            OperatorKind.PROJECTION_DIFFERENCE,
        )


# the closed intervals the spectra of the infinite operators fill
_WINDOWS = {
    OperatorKind.A0: (0.0, 1.0),
    OperatorKind.A1: (0.0, 1.0),
    OperatorKind.KMU: (-1.0, 1.0),
    OperatorKind.HILBERT: (0.0, math.pi),
    OperatorKind.HILBERT_ALT: (0.0, math.pi),
    OperatorKind.HANKEL_SYMBOL: (-1.0, 1.0),
    OperatorKind.PROJECTION_DIFFERENCE: (-1.0, 1.0),
}


@attr.s(frozen=True, slots=True)
class Operator(object):
    """
    A fully parameterised operator family. Calling it with a size builds that section.
    """

    #: The family.
    kind: OperatorKind = attr.ib(converter=OperatorKind)

    #: The Hilbert shift ``p``, for the Hilbert families.
    p: Optional[float] = attr.ib(default=None)

    #: The threshold, for ``kmu`` and ``projection-difference``.
    mu: Optional[float] = attr.ib(default=None)

    #: The truncation length, for the integral operators.
    length: Optional[float] = attr.ib(default=None)

    #: The grid rule, for the integral operators.
    rule: GridRule = attr.ib(factory=default_rule)

    #: The eigensolver used to build projection differences.
    solver: SolverSettings = attr.ib(factory=SolverSettings)

    #: The spectral guard used to build projection differences.
    guard: Optional[float] = attr.ib(default=None)

    def __attrs_post_init__(self):
        kind = self.kind
        if kind.needs_shift and self.p is None:
            raise InvalidArgumentError(f"operator {kind.value} needs a shift p")

        if not kind.needs_shift and self.p is not None:
            raise InvalidArgumentError(f"operator {kind.value} takes no shift p")

        if kind.needs_mu:
            if self.mu is None:
                raise InvalidArgumentError(f"operator {kind.value} needs mu")

            lambda_of_mu(self.mu)
        elif self.mu is not None:
            raise InvalidArgumentError(f"operator {kind.value} takes no mu")

        if kind.needs_grid and not (self.length is not None and self.length > 0):
            raise InvalidArgumentError(f"operator {kind.value} needs a positive length L")

    @property
    def label(self) -> str:
        if self.kind.needs_shift:
            return f"{self.kind.value}(p={self.p:g})"

        if self.kind.needs_mu:
            return f"{self.kind.value}(mu={self.mu:g},L={self.length:g})"

        if self.kind.needs_grid:
            return f"{self.kind.value}(L={self.length:g})"

        return self.kind.value

    def window(self) -> Tuple[float, float]:
        """
        :return: The interval the spectrum of the infinite operator fills, used for fill metrics.
        """
        return _WINDOWS[self.kind]

    def build(self, size: int) -> SymMatrix:
        """
        Builds the ``size x size`` section. For the integral operators this is the Nystrom matrix
        on ``make_grid(L, size, rule)``.
        """
        kind = self.kind
        logger.debug(f"Building {self.label} at N={size}")

        if kind == OperatorKind.HANKEL_SYMBOL:
            return hankel_section(size)
        elif kind == OperatorKind.HILBERT:
            return hilbert_shifted(self.p, size)
        elif kind == OperatorKind.HILBERT_ALT:
            return hilbert_alt(self.p, size)

        grid = make_grid(self.length, size, self.rule)
        if kind == OperatorKind.KMU:
            return discretize(KernelSpec.kmu(self.mu), grid)

        if kind == OperatorKind.PROJECTION_DIFFERENCE:
            dec0 = self.solver.decompose(discretize(KernelSpec.a0(), grid))
            dec1 = self.solver.decompose(discretize(KernelSpec.a1(), grid))
            return projection_difference(dec0, dec1, self.mu, self.guard)

        return discretize(KernelSpec(KernelKind(kind.value)), grid)

    def __call__(self, size: int) -> SymMatrix:
        return self.build(size)
