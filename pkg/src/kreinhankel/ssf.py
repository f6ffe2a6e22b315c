"""
The spectral shift function laboratory.

For a pair of finite symmetric matrices the spectral shift function is the difference of the
eigenvalue counting functions, ``xi(mu) = N0(mu) - N1(mu)`` with ``Nj(mu) = #{eigenvalues of Aj
strictly below mu}``. Under this sign the trace formula
``tr(phi(A1) - phi(A0)) = integral(phi' xi)`` holds exactly, which :func:`.trace_formula_check`
verifies to rounding.

The rest of this module reproduces the two signatures of the rank one pair ``A0``, ``A1`` on the
half-line: the projection difference ``E1 - E0`` is not Hilbert-Schmidt
(:func:`.hs_divergence_scan`), and it is the Hankel integral operator with kernel ``k_mu(x + y)``
(:func:`.crosscheck_kernel`).
"""
from __future__ import annotations

import logging
import math
from functools import partial
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial

from kreinhankel.eigensolve import SolverSettings, spectral_projection
from kreinhankel.errors import DimensionMismatchError, InvalidArgumentError, ResolutionError
from kreinhankel.kernels import KernelSpec, lambda_of_mu
from kreinhankel.quadrature import TestFunction, discretize, frobenius_sq, make_grid, quadratic_form
from kreinhankel.spectra import fill_metrics
from kreinhankel.structs import (
    CrossCheckPair,
    CrossCheckReport,
    DivergenceScan,
    EigenDecomposition,
    GenericPositionReport,
    Grid,
    GridRule,
    GridRuleKind,
    NaiveLifshitzPoint,
    StepFunction,
    SymMatrix,
    TraceCheckReport,
    TraceTrialSuite,
)
from kreinhankel.utils import run_parallel

logger = logging.getLogger(__name__)

__all__ = (
    "MAX_PHI_DEGREE",
    "TRACE_TOL",
    "TRIAL_COUPLINGS",
    "SLOPE_BAND",
    "counting_ssf",
    "trace_formula_check",
    "trace_trials",
    "projection_difference",
    "naive_lifshitz",
    "generic_position",
    "crosscheck_kernel",
    "default_test_pairs",
    "hs_divergence_scan",
)

#: Highest polynomial degree accepted as a test function phi.
MAX_PHI_DEGREE = 8

#: ``abs_diff`` bound, relative to ``max(1, |lhs|)``, that every trace formula check must meet.
TRACE_TOL = 1e-8

#: The couplings ``c`` cycled through by :func:`.trace_trials`.
TRIAL_COUPLINGS = (1.0, -1.0, 0.1, -0.1)

#: Relative band around ``2 / pi^2`` that the divergence slope is expected to fall into.
SLOPE_BAND = 0.15

#: Default Frobenius scan resolution, in nodes per unit length per unit of ``sqrt(lambda)``.
DEFAULT_NODES_PER_OSCILLATION = 16.0

#: Minimum allowed value of the above.
MIN_NODES_PER_OSCILLATION = 10.0

#: Crosscheck grids need node spacing at most this many units of ``1 / sqrt(lambda)``.
MAX_SPACING_FACTOR = 0.2

# eigenvalue interlacing slack, relative to the spectral scale
_INTERLACE_SLACK = 1e-10

PhiLike = Union[Polynomial, Sequence[float]]


def counting_ssf(eigs0: Sequence[float], eigs1: Sequence[float]) -> StepFunction:
    """
    Builds ``xi = N0 - N1`` from two eigenvalue lists.

    :param eigs0: The eigenvalues of ``A0``.
    :param eigs1: The eigenvalues of ``A1``. Must have the same length.
    :return: A :class:`.StepFunction` with the merged, deduplicated eigenvalues as breakpoints.
    :raises DimensionMismatchError: On a length mismatch.
    """
    e0 = np.sort(np.asarray(eigs0, dtype=float))
    e1 = np.sort(np.asarray(eigs1, dtype=float))
    if e0.shape != e1.shape:
        raise DimensionMismatchError(
            f"eigenvalue lists have lengths {e0.shape[0]} and {e1.shape[0]}",
            operation="ssf.counting_ssf",
        )

    breakpoints = np.unique(np.concatenate([e0, e1]))
    if breakpoints.shape[0] < 2:
        return StepFunction(breakpoints=breakpoints, values=())

    # each open interval is represented by its midpoint, away from every eigenvalue
    mids = 0.5 * (breakpoints[:-1] + breakpoints[1:])
    below0 = np.searchsorted(e0, mids, side="left")
    below1 = np.searchsorted(e1, mids, side="left")
    return StepFunction(breakpoints=breakpoints, values=below0 - below1)


def _as_polynomial(phi: PhiLike) -> Polynomial:
    poly = phi if isinstance(phi, Polynomial) else Polynomial(np.asarray(phi, dtype=float))
    if poly.degree() > MAX_PHI_DEGREE:
        raise InvalidArgumentError(
            f"phi has degree {poly.degree()}, at most {MAX_PHI_DEGREE} is supported",
            operation="ssf.trace_formula_check",
        )

    return poly


def _interlaced(e0: np.ndarray, e1: np.ndarray, c: float) -> bool:
    """
    Checks ``e0[i] <= e1[i] <= e0[i + 1]`` for ``c > 0``, and the mirrored chain for ``c < 0``.
    """
    lo, hi = (e0, e1) if c >= 0 else (e1, e0)
    scale = max(1.0, float(np.max(np.abs(np.concatenate([e0, e1])))))
    slack = _INTERLACE_SLACK * scale
    return bool(np.all(lo <= hi + slack) and np.all(hi[:-1] <= lo[1:] + slack))


def trace_formula_check(
    a0: SymMatrix,
    v: np.ndarray,
    c: float,
    phi: PhiLike,
    *,
    solver: SolverSettings = SolverSettings(),
    trial: Optional[int] = None,
) -> TraceCheckReport:
    """
    Checks ``tr(phi(A1) - phi(A0)) = integral(phi' xi)`` for ``A1 = A0 + c v v^T``.

    The left side is summed over both spectra. The right side is integrated exactly, by
    telescoping ``phi`` over the constant pieces of ``xi``, so the two sides agree to rounding.

    :param a0: The unperturbed matrix.
    :param v: The perturbation direction.
    :param c: The coupling.
    :param phi: A polynomial (or its coefficients, ascending) of degree at most 8.
    """
    poly = _as_polynomial(phi)
    a1 = a0.plus_rank_one(v, c)

    e0 = solver.decompose(a0).eigenvalues
    e1 = solver.decompose(a1).eigenvalues

    lhs = math.fsum(poly(e1)) - math.fsum(poly(e0))
    xi = counting_ssf(e0, e1)
    rhs = xi.integrate_derivative(poly)
    diff = abs(lhs - rhs)

    report = TraceCheckReport(
        phi=poly.coef,
        lhs=lhs,
        rhs=rhs,
        abs_diff=diff,
        coupling=c,
        xi_values=xi.value_set(),
        interlaced=_interlaced(e0, e1, c),
        trial=trial,
    )

    if report.relative_diff() > TRACE_TOL:
        logger.warning(f"Trace formula off by {diff:.3e} (lhs {lhs:.6e}) for phi={list(poly.coef)}")

    return report


def _phi_for_trial(rng: np.random.Generator, degree: int, trial: int) -> Polynomial:
    choices = [Polynomial([0.0] * k + [1.0]) for k in range(1, min(3, degree) + 1)]
    choices.append(Polynomial(rng.standard_normal(degree + 1)))
    return choices[trial % len(choices)]


def _run_trial(dim: int, seed: int, degree: int, solver: SolverSettings, trial: int):
    rng = np.random.default_rng([seed, trial])
    g = rng.standard_normal((dim, dim))
    a0 = SymMatrix(0.5 * (g + g.T))
    v = rng.standard_normal(dim)
    c = TRIAL_COUPLINGS[trial % len(TRIAL_COUPLINGS)]
    phi = _phi_for_trial(rng, degree, trial)

    report = trace_formula_check(a0, v, c, phi, solver=solver, trial=trial)
    logger.debug(f"Trace trial {trial}: c={c}, abs_diff={report.abs_diff:.3e}")
    return report


def trace_trials(
    dim: int,
    trials: int,
    seed: int,
    degree: int,
    *,
    solver: SolverSettings = SolverSettings(),
    jobs: int = 1,
) -> TraceTrialSuite:
    """
    Runs seeded random trace formula checks.

    Trial ``i`` draws from ``default_rng([seed, i])``: a gaussian symmetric ``A0`` (the symmetric
    part of a standard normal matrix), a gaussian ``v``, the coupling ``TRIAL_COUPLINGS[i % 4]``,
    and, in rotation, the monomials ``x``, ``x^2``, ``x^3`` (those of degree at most ``degree``)
    and one random polynomial of degree ``degree``. Each trial is replayable on its own.
    """
    if dim < 2:
        raise InvalidArgumentError(f"dim must be at least 2, got {dim}", operation="ssf.trace_trials")

    if trials < 1:
        raise InvalidArgumentError(f"need at least one trial, got {trials}", operation="ssf.trace_trials")

    if not 0 <= degree <= MAX_PHI_DEGREE:
        raise InvalidArgumentError(
            f"degree must lie in [0, {MAX_PHI_DEGREE}], got {degree}", operation="ssf.trace_trials"
        )

    if seed < 0:
        raise InvalidArgumentError(f"seed must be non-negative, got {seed}", operation="ssf.trace_trials")

    reports = run_parallel(
        partial(_run_trial, dim, seed, degree, solver), list(range(trials)), jobs=jobs
    )
    return TraceTrialSuite(
        dim=dim,
        seed=seed,
        degree=degree,
        reports=reports,
        max_abs_diff=max(r.abs_diff for r in reports),
        max_relative_diff=max(r.relative_diff() for r in reports),
    )


def projection_difference(
    dec0: EigenDecomposition,
    dec1: EigenDecomposition,
    mu: float,
    guard: Optional[float] = None,
) -> SymMatrix:
    """
    Computes ``E1 - E0 = E_A1((-inf, mu)) - E_A0((-inf, mu))``.

    :raises DimensionMismatchError: If the decompositions differ in size.
    :raises ThresholdTooCloseError: If ``mu`` lies within ``guard`` of either spectrum.
    """
    if dec0.n != dec1.n:
        raise DimensionMismatchError(
            f"decompositions have sizes {dec0.n} and {dec1.n}", operation="ssf.projection_difference"
        )

    e0 = spectral_projection(dec0, mu, guard)
    e1 = spectral_projection(dec1, mu, guard)
    return e1.matrix - e0.matrix


def naive_lifshitz(
    dec0: EigenDecomposition,
    dec1: EigenDecomposition,
    mus: Sequence[float],
    guard: Optional[float] = None,
) -> List[NaiveLifshitzPoint]:
    """
    Evaluates both readings of the naive Lifshitz formula at each threshold: the trace
    ``tr(E1 - E0)`` as the formula prints it, and ``xi(mu) = N0 - N1``, the value under which the
    trace formula holds. For finite matrices the two are always negatives of each other.
    """
    xi = counting_ssf(dec0.eigenvalues, dec1.eigenvalues)
    points = []
    for mu in mus:
        e0 = spectral_projection(dec0, mu, guard)
        e1 = spectral_projection(dec1, mu, guard)
        points.append(NaiveLifshitzPoint(mu=mu, trace_difference=e1.rank - e0.rank, xi=xi(mu)))

    return points


def generic_position(
    dec0: EigenDecomposition,
    dec1: EigenDecomposition,
    mu: float,
    guard: Optional[float] = None,
    *,
    solver: SolverSettings = SolverSettings(),
) -> GenericPositionReport:
    """
    Diagonalizes ``E1 - E0`` and reports how close its spectrum comes to ``+-1``, and how it fills
    ``(-1, 1)``. An eigenvalue at ``+-1`` is a vector in the range of one projection and the kernel
    of the other.
    """
    diff = projection_difference(dec0, dec1, mu, guard)
    dec = solver.decompose(diff)
    fill = fill_metrics(dec, -1.0, 1.0)
    margin = 1.0 - float(np.max(np.abs(dec.eigenvalues)))
    return GenericPositionReport(
        mu=mu, min_eig=fill.min_eig, max_eig=fill.max_eig, margin=margin, fill=fill
    )


def default_test_pairs(
    centers: Sequence[float] = (2.0, 5.0, 10.0), width: float = 1.0
) -> List[Tuple[TestFunction, TestFunction]]:
    """
    :return: Every pair ``(f, g)``, ``f <= g``, of gaussians at the given centers.
    """
    tests = [TestFunction.gaussian(c, width) for c in centers]
    return [(f, g) for i, f in enumerate(tests) for g in tests[i:]]


def _check_crosscheck_grid(rate: float, grid: Grid):
    spacing = MAX_SPACING_FACTOR / rate
    if grid.max_spacing > spacing:
        raise ResolutionError(
            f"node spacing {grid.max_spacing:.4g} exceeds {spacing:.4g} = "
            f"{MAX_SPACING_FACTOR}/sqrt(lambda)",
            operation="ssf.crosscheck_kernel",
        )

    period = 2.0 * math.pi / rate
    if grid.length < period:
        raise ResolutionError(
            f"window L={grid.length:g} is shorter than one oscillation period {period:.4g}",
            operation="ssf.crosscheck_kernel",
        )


def crosscheck_kernel(
    mu: float,
    grid: Grid,
    tests: Optional[Sequence[Tuple[TestFunction, TestFunction]]] = None,
    *,
    guard: Optional[float] = None,
    solver: SolverSettings = SolverSettings(),
) -> CrossCheckReport:
    """
    Compares the spectral projection difference of the discretized ``A0``, ``A1`` against the
    discretized kernel ``k_mu(x + y)``, through smeared quadratic forms.

    With the projections taken on ``(-inf, mu)``, ``E1 - E0`` carries the kernel
    ``-k_mu(x + y)``: the Neumann and Dirichlet eigenfunctions ``cos(kx)`` and ``sin(kx)`` combine
    into ``cos(k(x + y))``, integrated over ``k > sqrt(lambda)``. The form compared against the
    kernel is therefore ``<f, (E0 - E1) g>``, the difference of the projections on ``[mu, inf)``.

    :param mu: The threshold, in ``(0, 1)``.
    :param grid: The grid. Its spacing must be at most ``0.2 / sqrt(lambda)`` and its window at
                 least one oscillation period ``2 pi / sqrt(lambda)``.
    :param tests: The test function pairs. Defaults to :func:`.default_test_pairs`.
    :raises ResolutionError: If the grid is too coarse or too short, or a test function leaves
                             the window.
    """
    rate = math.sqrt(lambda_of_mu(mu))
    _check_crosscheck_grid(rate, grid)

    if tests is None:
        tests = default_test_pairs()

    tests = list(tests)
    if not tests:
        raise InvalidArgumentError("need at least one test function pair", operation="ssf.crosscheck_kernel")

    # sample up front, so a window violation fails before any diagonalization
    for f, g in tests:
        f.sample(grid)
        g.sample(grid)

    dec0 = solver.decompose(discretize(KernelSpec.a0(), grid))
    dec1 = solver.decompose(discretize(KernelSpec.a1(), grid))
    upper = projection_difference(dec0, dec1, mu, guard).scaled(-1.0)
    kernel = discretize(KernelSpec.kmu(mu), grid)

    pairs = []
    for f, g in tests:
        projection_form = quadratic_form(upper, f, g, grid)
        kernel_form = quadratic_form(kernel, f, g, grid)
        discrepancy = abs(projection_form - kernel_form) / (1.0 + abs(kernel_form))
        logger.debug(f"Crosscheck {f.label} x {g.label}: {projection_form:.6e} vs {kernel_form:.6e}")
        pairs.append(
            CrossCheckPair(
                f=f.label,
                g=g.label,
                projection_form=projection_form,
                kernel_form=kernel_form,
                discrepancy=discrepancy,
            )
        )

    return CrossCheckReport(
        mu=mu,
        length=grid.length,
        size=grid.size,
        pairs=pairs,
        max_discrepancy=max(p.discrepancy for p in pairs),
    )


def _scan_size(length: float, nodes_per_unit: float, rule: GridRule) -> int:
    size = max(2, math.ceil(length * nodes_per_unit))
    if rule.kind == GridRuleKind.GAUSS_LEGENDRE:
        size = -(-size // rule.order) * rule.order

    return size


def _scan_point(spec: KernelSpec, nodes_per_unit: float, rule: GridRule, length: float):
    size = _scan_size(length, nodes_per_unit, rule)
    value = frobenius_sq(spec, make_grid(length, size, rule))
    logger.debug(f"||{spec}||_F^2 at L={length:g}, N={size}: {value:.12g}")
    return size, value


def hs_divergence_scan(
    mu: float,
    lengths: Sequence[float],
    nodes_per_unit: Optional[float] = None,
    *,
    rule: Optional[GridRule] = None,
    jobs: int = 1,
) -> DivergenceScan:
    """
    Tracks ``||discretize(K_mu, grid(L))||_F^2`` along growing truncation lengths and fits it
    against ``ln L``. The double integral of ``k_mu(x + y)^2`` over ``(0, L)^2`` grows like
    ``(2 / pi^2) ln L`` whatever ``mu`` is, so ``K_mu`` is not Hilbert-Schmidt.

    :param mu: The threshold, in ``(0, 1)``.
    :param lengths: At least 3 strictly increasing truncation lengths.
    :param nodes_per_unit: Grid density; at least ``10 sqrt(lambda)``, by default
                           ``16 sqrt(lambda)``.
    :param rule: The grid rule. Defaults to midpoint, which scans large grids cheaply.
    :raises ResolutionError: If the density is below the minimum.
    """
    rate = math.sqrt(lambda_of_mu(mu))
    lengths = [float(x) for x in lengths]
    if len(lengths) < 3:
        raise InvalidArgumentError(
            f"need at least 3 lengths, got {len(lengths)}", operation="ssf.hs_divergence_scan"
        )

    if lengths[0] <= 0 or any(b <= a for a, b in zip(lengths, lengths[1:])):
        raise InvalidArgumentError(
            f"lengths must be positive and strictly increasing, got {lengths}",
            operation="ssf.hs_divergence_scan",
        )

    if nodes_per_unit is None:
        nodes_per_unit = DEFAULT_NODES_PER_OSCILLATION * rate
    elif nodes_per_unit < MIN_NODES_PER_OSCILLATION * rate:
        raise ResolutionError(
            f"{nodes_per_unit:g} nodes per unit is below {MIN_NODES_PER_OSCILLATION:g} sqrt(lambda) "
            f"= {MIN_NODES_PER_OSCILLATION * rate:.4g}",
            operation="ssf.hs_divergence_scan",
        )

    if rule is None:
        rule = GridRule.midpoint()

    spec = KernelSpec.kmu(mu)
    points = run_parallel(partial(_scan_point, spec, nodes_per_unit, rule), lengths, jobs=jobs)
    sizes = [size for size, _ in points]
    values = [value for _, value in points]
    slope, intercept = np.polyfit(np.log(lengths), values, 1)

    scan = DivergenceScan(
        mu=mu,
        lengths=lengths,
        sizes=sizes,
        frob_sq=values,
        slope=float(slope),
        intercept=float(intercept),
    )

    if any(b <= a for a, b in zip(values, values[1:])):
        logger.warning(f"Frobenius norm of {spec} is not increasing along L: {values}")

    if scan.slope_error() > SLOPE_BAND:
        logger.warning(
            f"Divergence slope {scan.slope:.5f} is {scan.slope_error():.1%} off {scan.expected_slope:.5f}"
        )

    return scan
