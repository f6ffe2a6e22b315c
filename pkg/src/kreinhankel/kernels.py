"""
Closed-form kernels of the integral operators ``A0``, ``A1`` and ``K_mu`` on ``L^2(0, inf)``.

``A0`` and ``A1`` differ by the rank one kernel ``exp(-x) exp(-y)``; ``K_mu`` is the difference of
their spectral projections below ``mu``, a Hankel integral operator with kernel ``k_mu(x + y)``.
"""
from __future__ import annotations

import enum
import logging
import math
from typing import Optional, Union

import attr
import numpy as np

from kreinhankel.errors import DomainError
from kreinhankel.structs import Grid, GridRule

logger = logging.getLogger(__name__)

__all__ = (
    "KernelKind",
    "KernelSpec",
    "ScalingMap",
    "lambda_of_mu",
    "eval_kernel",
    "kernel_values",
    "scale_grid",
    "sinc_ratio",
    "symbol_on_line",
    "sinc_transform_check",
)

ArrayLike = Union[float, np.ndarray]

#: Below this magnitude, sin(s)/s is evaluated from its Taylor series.
SINC_SERIES_CUTOFF = 1e-4


def _check_mu(mu: float):
    if not (0.0 < mu < 1.0):
        raise DomainError(f"mu must lie in (0, 1), got {mu}", operation="kernels.lambda_of_mu")


def lambda_of_mu(mu: float) -> float:
    """
    Maps the spectral threshold to the scaling parameter, ``lambda(mu) = 1/mu - 1``.

    :param mu: The threshold, in ``(0, 1)``.
    :return: The positive scaling parameter. Strictly decreasing in ``mu``.
    """
    _check_mu(mu)
    return 1.0 / mu - 1.0


class KernelKind(str, enum.Enum):
    """
    Enumeration of the kernels this package knows about.
    """

    A0 = "a0"
    A1 = "a1"
    KMU = "kmu"


@attr.s(frozen=True, slots=True)
class KernelSpec(object):
    """
    Selects one of the kernels. ``mu`` is present if and only if the kind is ``KMU``.
    """

    #: The kernel kind.
    kind: KernelKind = attr.ib(converter=KernelKind)

    #: The spectral threshold for ``K_mu``.
    mu: Optional[float] = attr.ib(default=None)

    @mu.validator
    def _check(self, attribute, value):
        if self.kind == KernelKind.KMU:
            if value is None:
                raise DomainError("the kmu kernel needs a value for mu")
            _check_mu(value)
        elif value is not None:
            raise DomainError(f"the {self.kind.value} kernel takes no mu")

    @classmethod
    def a0(cls) -> KernelSpec:
        return cls(KernelKind.A0)

    @classmethod
    def a1(cls) -> KernelSpec:
        return cls(KernelKind.A1)

    @classmethod
    def kmu(cls, mu: float) -> KernelSpec:
        return cls(KernelKind.KMU, float(mu))

    @property
    def sqrt_lambda(self) -> float:
        """
        :return: ``sqrt(lambda(mu))``, the frequency of the ``K_mu`` kernel.
        """
        assert self.mu is not None, f"{self.kind.value} has no frequency"
        return math.sqrt(lambda_of_mu(self.mu))

    def __str__(self):
        if self.kind == KernelKind.KMU:
            return f"kmu({self.mu})"

        return self.kind.value


def sinc_ratio(s: ArrayLike) -> ArrayLike:
    """
    Computes ``sin(s) / s``, with the removable singularity at 0 filled in by the series
    ``1 - s^2/6 + s^4/120`` below :data:`SINC_SERIES_CUTOFF`.
    """
    s = np.asarray(s, dtype=float)
    small = np.abs(s) < SINC_SERIES_CUTOFF
    safe = np.where(small, 1.0, s)
    s2 = s * s
    out = np.where(small, 1.0 - s2 / 6.0 + s2 * s2 / 120.0, np.sin(safe) / safe)
    return out if out.ndim else float(out)


def kernel_values(spec: KernelSpec, x: ArrayLike, y: ArrayLike) -> ArrayLike:
    """
    Vectorised kernel evaluation. ``x`` and ``y`` are broadcast against each other.

    The two-branch kernels are written in terms of ``min(x, y)`` and ``max(x, y)`` so that
    ``k(x, y) == k(y, x)`` holds bit for bit.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(y < 0):
        raise DomainError("kernel arguments must be non-negative", operation="kernels.eval_kernel")

    if spec.kind == KernelKind.KMU:
        rate = spec.sqrt_lambda
        out = (2.0 / math.pi) * rate * sinc_ratio(rate * (x + y))
        return np.asarray(out)

    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    # sinh(lo) e^-hi = e^(lo-hi) (1 - e^-2lo) / 2, which never overflows
    decay = np.exp(lo - hi)
    if spec.kind == KernelKind.A0:
        return -0.5 * decay * np.expm1(-2.0 * lo)

    return 0.5 * decay * (1.0 + np.exp(-2.0 * lo))


def eval_kernel(spec: KernelSpec, x: float, y: float) -> float:
    """
    Evaluates a single kernel entry.

    - ``A0``: ``sinh(min(x, y)) exp(-max(x, y))``
    - ``A1``: ``cosh(min(x, y)) exp(-max(x, y))``
    - ``K_mu``: ``(2/pi) sin(sqrt(lambda) (x + y)) / (x + y)``, equal to ``(2/pi) sqrt(lambda)``
      at ``x + y = 0``.

    :raises DomainError: On negative arguments.
    """
    return float(kernel_values(spec, x, y))


@attr.s(frozen=True, slots=True)
class ScalingMap(object):
    """
    The dilation ``U_lambda: f(x) -> lambda^(1/4) f(sqrt(lambda) x)``. On grids it acts by
    dividing nodes and weights by ``sqrt(lambda)``.
    """

    #: The scaling parameter.
    lam: float = attr.ib(converter=float)

    @lam.validator
    def _check(self, attribute, value):
        if not (value > 0 and math.isfinite(value)):
            raise DomainError(f"scaling parameter must be positive, got {value}")

    @classmethod
    def for_mu(cls, mu: float) -> ScalingMap:
        """
        :return: ``U_lambda(mu)``, which carries ``K_1/2`` onto ``K_mu``.
        """
        return cls(lambda_of_mu(mu))

    def compose(self, other: ScalingMap) -> ScalingMap:
        """
        :return: The map equal to applying ``self`` then ``other``.
        """
        return ScalingMap(self.lam * other.lam)


def scale_grid(grid: Grid, scaling: ScalingMap) -> Grid:
    """
    Applies a :class:`.ScalingMap` to a grid: nodes, weights and truncation length are all divided
    by ``sqrt(lambda)``. Discretizing ``K_mu`` on ``scale_grid(g, ScalingMap.for_mu(mu))``
    reproduces the discretization of ``K_1/2`` on ``g`` entry by entry.
    """
    root = math.sqrt(scaling.lam)
    return Grid(
        nodes=grid.nodes / root,
        weights=grid.weights / root,
        length=grid.length / root,
        rule=grid.rule,
    )


def symbol_on_line(t: ArrayLike) -> ArrayLike:
    """
    The symbol ``s(t)`` of ``K_1/2`` as a Hankel integral operator: 2 on ``[-1, 1]``, 0 elsewhere.
    """
    t = np.asarray(t, dtype=float)
    out = np.where(np.abs(t) <= 1.0, 2.0, 0.0)
    return out if out.ndim else float(out)


def sinc_transform_check(x: float, nodes: int = 256) -> float:
    """
    Checks ``(2/pi) sin(x)/x = (1/2pi) integral_{-1}^{1} 2 exp(-itx) dt`` at one point, which is
    what makes ``K_1/2`` a Hankel integral operator with symbol ``s``.

    :param x: The point, ``x >= 0``.
    :param nodes: The number of Gauss-Legendre nodes on ``[-1, 1]``; a multiple of 8.
    :return: The absolute difference between the two sides.
    """
    from kreinhankel.quadrature import make_grid

    if x < 0:
        raise DomainError(f"x must be non-negative, got {x}", operation="kernels.sinc_transform_check")

    # the imaginary part integrates to zero by symmetry, only cos survives
    grid = make_grid(2.0, nodes, GridRule.gauss_legendre(order=8))
    t = grid.nodes - 1.0
    rhs = float(np.sum(grid.weights * symbol_on_line(t) * np.cos(t * x))) / (2.0 * math.pi)
    lhs = (2.0 / math.pi) * sinc_ratio(x)
    return abs(lhs - rhs)
