"""
Truncated-domain grids and the symmetric Nystrom discretization of integral operators.
"""
from __future__ import annotations

import enum
import logging
import math
from typing import Dict, Optional, Tuple

import attr
import numpy as np
from numpy.polynomial.legendre import leggauss

from kreinhankel.errors import DimensionMismatchError, InvalidArgumentError, ResolutionError
from kreinhankel.kernels import KernelSpec, kernel_values
from kreinhankel.structs import Grid, GridRule, GridRuleKind, SymMatrix

logger = logging.getLogger(__name__)

__all__ = (
    "DEFAULT_ORDER",
    "MAX_CACHED_GRIDS",
    "default_rule",
    "make_grid",
    "discretize",
    "frobenius_sq",
    "TestFunctionKind",
    "TestFunction",
    "quadratic_form",
)

#: The Gauss-Legendre order used for operator probes unless told otherwise.
DEFAULT_ORDER = 8

#: How many grids each test function keeps samples for.
MAX_CACHED_GRIDS = 4

#: Row block size used when a kernel matrix is reduced without being stored.
_BLOCK_ROWS = 512


def default_rule() -> GridRule:
    return GridRule.gauss_legendre(order=DEFAULT_ORDER)


def make_grid(length: float, size: int, rule: Optional[GridRule] = None) -> Grid:
    """
    Creates a grid on ``(0, length]``.

    :param length: The truncation length L.
    :param size: The number of nodes N. For the composite Gauss-Legendre rule this must equal
                 ``panels * order``; if the rule does not fix ``panels``, it is derived.
    :param rule: The quadrature rule. Defaults to composite Gauss-Legendre of order 8.
    :return: A new :class:`.Grid`. Deterministic for fixed inputs.
    """
    if rule is None:
        rule = default_rule()

    if not (length > 0 and math.isfinite(length)):
        raise InvalidArgumentError(f"L must be positive, got {length}", operation="quadrature.make_grid")

    if size < 2:
        raise InvalidArgumentError(f"N must be at least 2, got {size}", operation="quadrature.make_grid")

    if rule.kind == GridRuleKind.MIDPOINT:
        h = length / size
        nodes = (np.arange(size) + 0.5) * h
        weights = np.full(size, h)
        return Grid(nodes=nodes, weights=weights, length=length, rule=rule)

    panels, rem = divmod(size, rule.order)
    if rem or (rule.panels is not None and rule.panels != panels):
        raise InvalidArgumentError(
            f"N={size} does not decompose as {rule.panels or 'panels'} x {rule.order}",
            operation="quadrature.make_grid",
        )

    ref_nodes, ref_weights = leggauss(rule.order)
    h = length / panels
    left = np.arange(panels)[:, None] * h
    nodes = (left + 0.5 * h * (ref_nodes[None, :] + 1.0)).reshape(-1)
    weights = np.tile(0.5 * h * ref_weights, panels)
    fixed = GridRule.gauss_legendre(order=rule.order, panels=panels)
    return Grid(nodes=nodes, weights=weights, length=length, rule=fixed)


def discretize(spec: KernelSpec, grid: Grid) -> SymMatrix:
    """
    Discretizes an integral operator with the symmetrised Nystrom rule,
    ``M[i, j] = sqrt(w_i w_j) k(x_i, x_j)``. This shares its spectrum with the weighted Nystrom
    matrix ``k(x_i, x_j) w_j``.
    """
    root = grid.sqrt_weights
    values = kernel_values(spec, grid.nodes[:, None], grid.nodes[None, :])
    logger.debug(f"Discretized {spec} on {grid!r}")
    return SymMatrix(root[:, None] * values * root[None, :])


def frobenius_sq(spec: KernelSpec, grid: Grid) -> float:
    """
    Computes ``||discretize(spec, grid)||_F^2`` in row blocks, so grids far larger than the ones
    anything is ever diagonalized on can be scanned.
    """
    w = grid.weights
    total = 0.0
    for start in range(0, grid.size, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, grid.size)
        block = kernel_values(spec, grid.nodes[start:stop, None], grid.nodes[None, :])
        total += float(np.sum(w[start:stop, None] * (block * block) * w[None, :]))

    return total


class TestFunctionKind(str, enum.Enum):
    """
    Enumeration of the smooth (and not so smooth) functions used to smear quadratic forms.
    """

    GAUSSIAN = "gaussian"
    INDICATOR = "indicator"


@attr.s(frozen=True, slots=True, eq=False)
class TestFunction(object):
    """
    A test function on the half-line, sampled on demand as the weighted vector
    ``sqrt(w_i) f(x_i)``. Samples are cached for the last few grids.
    """

    __test__ = False

    #: The shape of this function.
    kind: TestFunctionKind = attr.ib(converter=TestFunctionKind)

    #: For gaussians, the center; for indicators, the left end.
    first: float = attr.ib(converter=float)

    #: For gaussians, the width; for indicators, the right end.
    second: float = attr.ib(converter=float)

    #: A constant factor.
    amplitude: float = attr.ib(default=1.0, converter=float)

    # keyed by id(grid); the grid is held next to its samples so the id cannot be recycled
    _samples: Dict[int, Tuple[Grid, np.ndarray]] = attr.ib(factory=dict, init=False, repr=False)

    def __attrs_post_init__(self):
        if self.kind == TestFunctionKind.GAUSSIAN and not self.second > 0:
            raise InvalidArgumentError(f"gaussian width must be positive, got {self.second}")

        if self.kind == TestFunctionKind.INDICATOR and not self.first < self.second:
            raise InvalidArgumentError(f"indicator needs a < b, got ({self.first}, {self.second})")

    @classmethod
    def gaussian(cls, center: float, width: float, amplitude: float = 1.0) -> TestFunction:
        return cls(TestFunctionKind.GAUSSIAN, center, width, amplitude)

    @classmethod
    def indicator(cls, a: float, b: float, amplitude: float = 1.0) -> TestFunction:
        return cls(TestFunctionKind.INDICATOR, a, b, amplitude)

    @property
    def label(self) -> str:
        if self.kind == TestFunctionKind.GAUSSIAN:
            name = f"gaussian({self.first:g},{self.second:g})"
        else:
            name = f"indicator({self.first:g},{self.second:g})"

        if self.amplitude != 1.0:
            return f"{self.amplitude:g}*{name}"

        return name

    @property
    def support_end(self) -> float:
        """
        :return: The point beyond which this function is negligible (4 widths for a gaussian).
        """
        if self.kind == TestFunctionKind.GAUSSIAN:
            return self.first + 4.0 * self.second

        return self.second

    def scaled(self, alpha: float) -> TestFunction:
        return TestFunction(self.kind, self.first, self.second, self.amplitude * alpha)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == TestFunctionKind.GAUSSIAN:
            z = (x - self.first) / self.second
            return self.amplitude * np.exp(-0.5 * z * z)

        return np.where((x >= self.first) & (x <= self.second), self.amplitude, 0.0)

    def sample(self, grid: Grid) -> np.ndarray:
        """
        :return: ``sqrt(w_i) f(x_i)`` on the given grid.
        :raises ResolutionError: If the function lives outside the grid window, or vanishes on
                                 every node.
        """
        key = id(grid)
        cached = self._samples.get(key)
        if cached is not None:
            return cached[1]

        if self.support_end > grid.length:
            raise ResolutionError(
                f"{self.label} extends to {self.support_end:g}, beyond the window L={grid.length:g}",
                operation="quadrature.quadratic_form",
            )

        vec = grid.sqrt_weights * self(grid.nodes)
        if not np.any(vec):
            raise ResolutionError(f"{self.label} vanishes on every node of {grid!r}")

        vec.setflags(write=False)
        if len(self._samples) >= MAX_CACHED_GRIDS:
            # oldest first
            del self._samples[next(iter(self._samples))]

        self._samples[key] = (grid, vec)
        return vec


def quadratic_form(m: SymMatrix, f: TestFunction, g: TestFunction, grid: Grid) -> float:
    """
    Computes ``f^T M g`` with ``f`` and ``g`` sampled on ``grid``.

    :raises DimensionMismatchError: If ``M`` does not match the grid size.
    """
    if m.n != grid.size:
        raise DimensionMismatchError(
            f"matrix is {m.n}x{m.n} but the grid has {grid.size} nodes",
            operation="quadrature.quadratic_form",
        )

    return float(f.sample(grid) @ m.matvec(g.sample(grid)))
