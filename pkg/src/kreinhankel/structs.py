from __future__ import annotations

import enum
import math
from typing import Callable, Iterable, Optional, Tuple

import attr
import numpy as np

from kreinhankel.errors import DimensionMismatchError, InvalidArgumentError

__all__ = (
    "GridRuleKind",
    "GridRule",
    "Grid",
    "SymMatrix",
    "EigenDecomposition",
    "ProjectionMatrix",
    "SpectralMeasure",
    "FillReport",
    "FillScan",
    "AcDecayReport",
    "SpectrumReport",
    "StepFunction",
    "TraceCheckReport",
    "TraceTrialSuite",
    "DivergenceScan",
    "CrossCheckPair",
    "CrossCheckReport",
    "ParityReport",
    "NaiveLifshitzPoint",
    "GenericPositionReport",
)


def _readonly_vector(values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


def _float_tuple(values: Iterable) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


def _int_tuple(values: Iterable) -> Tuple[int, ...]:
    return tuple(int(v) for v in values)


def _mirror_lower(values) -> np.ndarray:
    """
    Builds the full symmetric array from the lower triangle of ``values``. The upper triangle of
    the input is ignored, so symmetry holds structurally rather than up to rounding.
    """
    arr = np.array(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)

    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {arr.shape}")

    full = np.tril(arr) + np.tril(arr, -1).T
    if not np.all(np.isfinite(full)):
        raise InvalidArgumentError("matrix has non-finite entries")

    full.setflags(write=False)
    return full


class GridRuleKind(str, enum.Enum):
    """
    Enumeration of the supported quadrature rules.
    """

    MIDPOINT = "midpoint"
    GAUSS_LEGENDRE = "gauss-legendre"


@attr.s(frozen=True, slots=True)
class GridRule(object):
    """
    A quadrature rule on a truncated half-line.
    """

    #: The kind of rule.
    kind: GridRuleKind = attr.ib(converter=GridRuleKind)

    #: The number of nodes per panel. Always 1 for the midpoint rule.
    order: int = attr.ib(default=1)

    #: The number of panels, if fixed. ``None`` derives it from the grid size.
    panels: Optional[int] = attr.ib(default=None)

    @order.validator
    def _check_order(self, attribute, value):
        if value < 1:
            raise InvalidArgumentError(f"rule order must be positive, got {value}")

        if self.kind == GridRuleKind.MIDPOINT and value != 1:
            raise InvalidArgumentError("the midpoint rule has order 1")

    @classmethod
    def midpoint(cls) -> GridRule:
        return cls(GridRuleKind.MIDPOINT)

    @classmethod
    def gauss_legendre(cls, order: int = 8, panels: Optional[int] = None) -> GridRule:
        """
        A composite Gauss-Legendre rule with ``order`` nodes on each of ``panels`` equal panels.
        """
        return cls(GridRuleKind.GAUSS_LEGENDRE, order=order, panels=panels)

    def __str__(self):
        if self.kind == GridRuleKind.MIDPOINT:
            return "midpoint"

        if self.panels is None:
            return f"gauss-legendre({self.order})"

        return f"gauss-legendre({self.panels}x{self.order})"


@attr.s(frozen=True, slots=True, eq=False)
class Grid(object):
    """
    A truncated quadrature grid on ``(0, length]``. This is the discretization substrate for every
    integral operator in this package.
    """

    #: The nodes, strictly increasing, all in ``(0, length]``.
    nodes: np.ndarray = attr.ib(converter=_readonly_vector, repr=False)

    #: The positive weights. These sum to ``length``.
    weights: np.ndarray = attr.ib(converter=_readonly_vector, repr=False)

    #: The truncation length L.
    length: float = attr.ib(converter=float)

    #: The rule that produced this grid.
    rule: GridRule = attr.ib()

    def __attrs_post_init__(self):
        n = self.nodes.shape[0]
        if self.weights.shape[0] != n:
            raise DimensionMismatchError(f"{n} nodes but {self.weights.shape[0]} weights")

        if n < 2:
            raise InvalidArgumentError(f"a grid needs at least 2 nodes, got {n}")

        if not (self.length > 0 and math.isfinite(self.length)):
            raise InvalidArgumentError(f"truncation length must be positive, got {self.length}")

        if np.any(np.diff(self.nodes) <= 0):
            raise InvalidArgumentError("grid nodes must be strictly increasing")

        if self.nodes[0] <= 0 or self.nodes[-1] > self.length * (1 + 1e-14):
            raise InvalidArgumentError(f"grid nodes must lie in (0, {self.length}]")

        if np.any(self.weights <= 0):
            raise InvalidArgumentError("grid weights must be positive")

        total = math.fsum(self.weights)
        if abs(total - self.length) > 1e-10 * self.length:
            raise InvalidArgumentError(f"weights sum to {total}, expected {self.length}")

    @property
    def size(self) -> int:
        """
        :return: The number of nodes N.
        """
        return self.nodes.shape[0]

    @property
    def sqrt_weights(self) -> np.ndarray:
        return np.sqrt(self.weights)

    @property
    def max_spacing(self) -> float:
        """
        :return: The largest distance between consecutive nodes, counting the gap from 0 to the
                 first node.
        """
        return float(np.max(np.diff(self.nodes, prepend=0.0)))

    def __repr__(self):
        return f"<Grid L={self.length} N={self.size} rule={self.rule}>"


@attr.s(frozen=True, slots=True, eq=False, repr=False)
class SymMatrix(object):
    """
    A dense real symmetric matrix. Only the lower triangle of the input is read; the stored
    entries are mirrored from it, so ``M[i, j] == M[j, i]`` holds exactly.
    """

    #: The full, read-only entry array.
    entries: np.ndarray = attr.ib(converter=_mirror_lower)

    @classmethod
    def identity(cls, n: int) -> SymMatrix:
        return cls(np.eye(n))

    @classmethod
    def zeros(cls, n: int) -> SymMatrix:
        return cls(np.zeros((n, n)))

    @classmethod
    def diagonal(cls, values: Iterable[float]) -> SymMatrix:
        return cls(np.diag(np.asarray(list(values), dtype=float)))

    @classmethod
    def from_index_function(cls, n: int, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]):
        """
        Builds an ``n x n`` matrix from a vectorised function of the (row, column) index arrays.
        Only the lower triangle is evaluated meaningfully.
        """
        rows, cols = np.indices((n, n))
        return cls(fn(rows, cols))

    @property
    def n(self) -> int:
        """
        :return: The dimension of this matrix.
        """
        return self.entries.shape[0]

    def __getitem__(self, item):
        return self.entries[item]

    def __repr__(self):
        return f"<SymMatrix n={self.n}>"

    def __add__(self, other: SymMatrix) -> SymMatrix:
        self._check_same_size(other)
        return SymMatrix(self.entries + other.entries)

    def __sub__(self, other: SymMatrix) -> SymMatrix:
        self._check_same_size(other)
        return SymMatrix(self.entries - other.entries)

    def _check_same_size(self, other: SymMatrix):
        if other.n != self.n:
            raise DimensionMismatchError(f"cannot combine {self.n}x{self.n} with {other.n}x{other.n}")

    def scaled(self, alpha: float) -> SymMatrix:
        """
        :return: ``alpha * M``.
        """
        return SymMatrix(self.entries * alpha)

    def conjugated(self, signs: np.ndarray) -> SymMatrix:
        """
        :param signs: The diagonal of ``D``, with entries +1 or -1.
        :return: ``D M D``. Exact, since only signs change.
        """
        signs = np.asarray(signs, dtype=float)
        if signs.shape != (self.n,):
            raise DimensionMismatchError(f"need {self.n} signs, got {signs.shape}")

        return SymMatrix(self.entries * np.outer(signs, signs))

    def plus_rank_one(self, v: np.ndarray, c: float) -> SymMatrix:
        """
        :return: ``M + c v v^T``.
        """
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise DimensionMismatchError(f"vector has shape {v.shape}, matrix is {self.n}x{self.n}")

        return SymMatrix(self.entries + c * np.outer(v, v))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise DimensionMismatchError(f"vector has shape {v.shape}, matrix is {self.n}x{self.n}")

        return self.entries @ v

    def trace(self) -> float:
        return float(np.trace(self.entries))

    def frobenius_sq(self) -> float:
        return float(np.sum(self.entries * self.entries))

    def frobenius(self) -> float:
        return math.sqrt(self.frobenius_sq())

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))


@attr.s(frozen=True, slots=True, eq=False)
class EigenDecomposition(object):
    """
    A full eigendecomposition of a :class:`.SymMatrix`.
    """

    #: The eigenvalues, ascending.
    eigenvalues: np.ndarray = attr.ib(converter=_readonly_vector, repr=False)

    #: The orthonormal eigenvectors, as columns. Column ``k`` pairs with eigenvalue ``k``, and
    #: the first nonzero component of every column is positive.
    eigenvectors: np.ndarray = attr.ib(repr=False)

    #: ``max |M v - lambda v|`` over all pairs.
    residual: float = attr.ib(converter=float)

    #: ``max |V^T V - I|``.
    orth_defect: float = attr.ib(converter=float)

    #: The Frobenius norm of the decomposed matrix.
    norm: float = attr.ib(converter=float)

    #: The trace of the decomposed matrix.
    trace: float = attr.ib(converter=float)

    #: The number of Jacobi sweeps performed.
    sweeps: int = attr.ib(default=0)

    #: The off-diagonal Frobenius mass left when the solver stopped.
    off_diagonal: float = attr.ib(default=0.0, converter=float)

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def span(self) -> float:
        """
        :return: The spread between the largest and smallest eigenvalue.
        """
        return float(self.eigenvalues[-1] - self.eigenvalues[0])

    def trace_defect(self) -> float:
        """
        :return: ``|sum(eigenvalues) - trace(M)|`` relative to ``max(1, |trace|)``.
        """
        return abs(math.fsum(self.eigenvalues) - self.trace) / max(1.0, abs(self.trace))

    def frobenius_defect(self) -> float:
        """
        :return: ``|sum(eigenvalues^2) - ||M||_F^2|`` relative to ``||M||_F^2``.
        """
        norm_sq = self.norm * self.norm
        return abs(math.fsum(self.eigenvalues ** 2) - norm_sq) / max(norm_sq, 1e-300)


@attr.s(frozen=True, slots=True, eq=False)
class ProjectionMatrix(object):
    """
    A spectral projection ``E_A((-inf, mu))`` at finite size.
    """

    #: The projection itself.
    matrix: SymMatrix = attr.ib()

    #: The threshold ``mu``.
    threshold: float = attr.ib(converter=float)

    #: The number of eigenvalues below the threshold.
    rank: int = attr.ib()

    def idempotency_defect(self) -> float:
        """
        :return: ``max |P^2 - P|``.
        """
        p = self.matrix.entries
        return float(np.max(np.abs(p @ p - p))) if self.matrix.n else 0.0


@attr.s(frozen=True, slots=True, eq=False)
class SpectralMeasure(object):
    """
    The atoms ``(lambda_i, <v_i, f>^2)`` of the spectral measure of a vector ``f``.
    """

    #: The atom locations (the eigenvalues).
    locations: np.ndarray = attr.ib(converter=_readonly_vector, repr=False)

    #: The atom weights.
    weights: np.ndarray = attr.ib(converter=_readonly_vector, repr=False)

    #: The sum of all weights.
    total_mass: float = attr.ib(converter=float)

    #: ``||f||^2``, which the total mass must reproduce.
    norm_sq: float = attr.ib(converter=float)

    @property
    def max_atom(self) -> float:
        return float(np.max(self.weights))

    def mass_defect(self) -> float:
        return abs(self.total_mass - self.norm_sq) / self.norm_sq


@attr.s(frozen=True, slots=True)
class FillReport(object):
    """
    How well a finite spectrum fills an interval ``(a, b)``.
    """

    #: The lower end of the interval.
    a: float = attr.ib(converter=float)

    #: The upper end of the interval.
    b: float = attr.ib(converter=float)

    #: The smallest eigenvalue.
    min_eig: float = attr.ib(converter=float)

    #: The largest eigenvalue.
    max_eig: float = attr.ib(converter=float)

    #: The largest gap between consecutive points of ``{a}``, the eigenvalues inside ``(a, b)``
    #: and ``{b}``.
    max_gap: float = attr.ib(converter=float)

    #: The number of eigenvalues not strictly inside ``(a, b)``.
    count_outside: int = attr.ib()

    #: The matrix size this report was computed at, if known.
    size: Optional[int] = attr.ib(default=None)


@attr.s(frozen=True, slots=True)
class FillScan(object):
    """
    A sequence of :class:`.FillReport` over growing sections of one operator.
    """

    #: The operator label, e.g. ``hankel-symbol``.
    operator: str = attr.ib()

    #: One report per size, in input order.
    reports: Tuple[FillReport, ...] = attr.ib(converter=tuple)

    def gaps_nonincreasing(self) -> bool:
        gaps = [r.max_gap for r in self.reports]
        return all(b <= a for a, b in zip(gaps, gaps[1:]))


@attr.s(frozen=True, slots=True)
class AcDecayReport(object):
    """
    The largest spectral measure atom of a fixed probe vector, over growing sections. Point
    spectrum shows up as an atom that refuses to decay.
    """

    #: The operator label.
    operator: str = attr.ib()

    #: The basis index of the probe vector.
    probe: int = attr.ib()

    #: The section sizes, strictly increasing.
    sizes: Tuple[int, ...] = attr.ib(converter=_int_tuple)

    #: The largest atom at each size.
    max_atom: Tuple[float, ...] = attr.ib(converter=_float_tuple)

    #: ``max_atom[i + 1] / max_atom[i]``.
    decay_ratios: Tuple[float, ...] = attr.ib(converter=_float_tuple)

    @property
    def consistent_with_ac(self) -> bool:
        """
        :return: True if the largest atom shrinks at every step. This is consistency only; no
                 finite computation certifies absolute continuity.
        """
        return all(r < 1.0 for r in self.decay_ratios)


@attr.s(frozen=True, slots=True)
class SpectrumReport(object):
    """
    The full spectrum of one operator section, plus its fill metrics.
    """

    #: The operator label.
    operator: str = attr.ib()

    #: The matrix size.
    size: int = attr.ib()

    #: The eigenvalues, ascending.
    eigenvalues: Tuple[float, ...] = attr.ib(converter=_float_tuple)

    #: Fill metrics in the operator's natural window.
    fill: FillReport = attr.ib()

    #: The eigensolver residual.
    residual: float = attr.ib(converter=float)

    #: The eigensolver orthogonality defect.
    orth_defect: float = attr.ib(converter=float)


@attr.s(frozen=True, slots=True)
class StepFunction(object):
    """
    A compactly supported, piecewise constant, integer valued function. This is the spectral
    shift function of a pair of finite matrices.

    ``values[i]`` is the value on the open interval ``(breakpoints[i], breakpoints[i + 1])``; the
    value is 0 below the first and above the last breakpoint.
    """

    #: The sorted, distinct breakpoints.
    breakpoints: Tuple[float, ...] = attr.ib(converter=_float_tuple)

    #: The values between consecutive breakpoints.
    values: Tuple[int, ...] = attr.ib(converter=_int_tuple)

    def __attrs_post_init__(self):
        if len(self.breakpoints) == 0:
            if self.values:
                raise InvalidArgumentError("a step function without breakpoints has no values")
            return

        if len(self.values) != len(self.breakpoints) - 1:
            raise DimensionMismatchError(
                f"{len(self.breakpoints)} breakpoints need {len(self.breakpoints) - 1} values, "
                f"got {len(self.values)}"
            )

        if any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise InvalidArgumentError("breakpoints must be strictly increasing")

    def __call__(self, x: float) -> int:
        """
        Evaluates the function away from the breakpoints. At a breakpoint, the value of the
        interval to the right is returned.
        """
        idx = int(np.searchsorted(self.breakpoints, x, side="right")) - 1
        if idx < 0 or idx >= len(self.values):
            return 0

        return self.values[idx]

    def value_set(self) -> Tuple[int, ...]:
        """
        :return: The sorted set of values taken, including the 0 of the tails.
        """
        return tuple(sorted(set(self.values) | {0}))

    def integral(self) -> float:
        """
        :return: The exact integral over the real line.
        """
        widths = np.diff(self.breakpoints)
        return math.fsum(v * w for v, w in zip(self.values, widths))

    def integrate_derivative(self, phi: Callable[[np.ndarray], np.ndarray]) -> float:
        """
        Integrates ``phi'`` against this function exactly, by telescoping over the constant
        pieces: ``sum(value * (phi(right) - phi(left)))``.
        """
        if not self.values:
            return 0.0

        at = np.asarray(phi(np.asarray(self.breakpoints)), dtype=float)
        return math.fsum(v * d for v, d in zip(self.values, np.diff(at)) if v)


@attr.s(frozen=True, slots=True)
class TraceCheckReport(object):
    """
    One check of ``tr(phi(A1) - phi(A0)) = integral(phi' xi)``.
    """

    #: The polynomial phi, as coefficients in ascending degree.
    phi: Tuple[float, ...] = attr.ib(converter=_float_tuple)

    #: ``tr(phi(A1) - phi(A0))`` from the eigenvalues.
    lhs: float = attr.ib(converter=float)

    #: ``integral(phi' xi)``, telescoped over the spectral shift function.
    rhs: float = attr.ib(converter=float)

    #: ``|lhs - rhs|``.
    abs_diff: float = attr.ib(converter=float)

    #: The coupling ``c`` of the rank one perturbation ``c v v^T``.
    coupling: float = attr.ib(converter=float)

    #: The values taken by the spectral shift function.
    xi_values: Tuple[int, ...] = attr.ib(converter=_int_tuple)

    #: If the eigenvalues interlace in the direction of the coupling.
    interlaced: bool = attr.ib()

    #: The trial index, for seeded runs.
    trial: Optional[int] = attr.ib(default=None)

    def relative_diff(self) -> float:
        return self.abs_diff / max(1.0, abs(self.lhs))


@attr.s(frozen=True, slots=True)
class TraceTrialSuite(object):
    """
    A seeded batch of :class:`.TraceCheckReport` trials.
    """

    #: The matrix dimension.
    dim: int = attr.ib()

    #: The seed the batch was generated from.
    seed: int = attr.ib()

    #: The degree of the random polynomial.
    degree: int = attr.ib()

    #: The individual trials, in trial order.
    reports: Tuple[TraceCheckReport, ...] = attr.ib(converter=tuple)

    #: The largest ``abs_diff`` across all trials.
    max_abs_diff: float = attr.ib(converter=float)

    #: The largest ``abs_diff / max(1, |lhs|)`` across all trials.
    max_relative_diff: float = attr.ib(converter=float)


@attr.s(frozen=True, slots=True)
class DivergenceScan(object):
    """
    The squared Frobenius norm of the discretized ``K_mu`` against the truncation length.
    """

    #: The spectral parameter.
    mu: float = attr.ib(converter=float)

    #: The truncation lengths, increasing.
    lengths: Tuple[float, ...] = attr.ib(converter=_float_tuple)

    #: The number of nodes used at each length.
    sizes: Tuple[int, ...] = attr.ib(converter=_int_tuple)

    #: The squared Frobenius norm at each length.
    frob_sq: Tuple[float, ...] = attr.ib(converter=_float_tuple)

    #: The least squares slope of ``frob_sq`` against ``ln L``.
    slope: float = attr.ib(converter=float)

    #: The least squares intercept.
    intercept: float = attr.ib(converter=float)

    #: The asymptotic slope ``2 / pi^2``.
    expected_slope: float = attr.ib(default=2.0 / math.pi ** 2, converter=float)

    def slope_error(self) -> float:
        return abs(self.slope - self.expected_slope) / self.expected_slope


@attr.s(frozen=True, slots=True)
class CrossCheckPair(object):
    """
    One smeared comparison between ``E0 - E1`` and the kernel ``k_mu(x + y)``.
    """

    #: The label of the left test function.
    f: str = attr.ib()

    #: The label of the right test function.
    g: str = attr.ib()

    #: ``<f, (E0 - E1) g>``, with both projections taken on ``(-inf, mu)``.
    projection_form: float = attr.ib(converter=float)

    #: ``<f, K_mu g>``.
    kernel_form: float = attr.ib(converter=float)

    #: ``|projection_form - kernel_form| / (1 + |kernel_form|)``.
    discrepancy: float = attr.ib(converter=float)


@attr.s(frozen=True, slots=True)
class CrossCheckReport(object):
    """
    All smeared comparisons for one ``mu`` and one grid.
    """

    mu: float = attr.ib(converter=float)
    length: float = attr.ib(converter=float)
    size: int = attr.ib()
    pairs: Tuple[CrossCheckPair, ...] = attr.ib(converter=tuple)

    #: The worst discrepancy.
    max_discrepancy: float = attr.ib(converter=float)


@attr.s(frozen=True, slots=True)
class ParityReport(object):
    """
    The parity decomposition of ``hankel_section(2N)``.
    """

    #: N, the size of each parity block.
    size: int = attr.ib()

    #: The largest cross-block entry. Exactly 0.
    off_max: float = attr.ib(converter=float)

    #: ``max |even - hilbert_alt(1/2, N) / pi|``.
    even_deviation: float = attr.ib(converter=float)

    #: ``max |odd + hilbert_alt(-1/2, N) / pi|``.
    odd_deviation: float = attr.ib(converter=float)

    #: The largest difference between the section spectrum and the union of the block spectra.
    spectrum_mismatch: float = attr.ib(converter=float)


@attr.s(frozen=True, slots=True)
class NaiveLifshitzPoint(object):
    """
    Both readings of the naive formula at one threshold.
    """

    #: The threshold.
    mu: float = attr.ib(converter=float)

    #: ``tr(E_A1(delta_mu) - E_A0(delta_mu))``, as printed in the naive formula.
    trace_difference: int = attr.ib()

    #: ``N0(mu) - N1(mu)``, the convention under which the trace formula holds.
    xi: int = attr.ib()


@attr.s(frozen=True, slots=True)
class GenericPositionReport(object):
    """
    The spectrum of ``E1 - E0`` at finite size.
    """

    #: The threshold.
    mu: float = attr.ib(converter=float)

    #: The smallest eigenvalue of ``E1 - E0``.
    min_eig: float = attr.ib(converter=float)

    #: The largest eigenvalue of ``E1 - E0``.
    max_eig: float = attr.ib(converter=float)

    #: ``1 - max |lambda|``. Positive means ``Ker(E1 - E0 +- I) = {0}`` at this size.
    margin: float = attr.ib(converter=float)

    #: How the spectrum fills ``(-1, 1)``.
    fill: FillReport = attr.ib()
