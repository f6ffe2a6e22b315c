import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial
from numpy.testing import assert_allclose, assert_array_equal
from scipy import integrate

from kreinhankel.eigensolve import jacobi_eigen
from kreinhankel.errors import DimensionMismatchError, InvalidArgumentError, ResolutionError
from kreinhankel.quadrature import TestFunction, make_grid
from kreinhankel.ssf import (
    TRACE_TOL,
    counting_ssf,
    crosscheck_kernel,
    default_test_pairs,
    generic_position,
    hs_divergence_scan,
    naive_lifshitz,
    projection_difference,
    trace_formula_check,
    trace_trials,
)
from kreinhankel.structs import GridRule, SymMatrix


class TestCountingSsf:
    def test_example(self):
        xi = counting_ssf([0.0, 2.0], [1.0, 3.0])
        assert xi.breakpoints == (0.0, 1.0, 2.0, 3.0)
        assert xi.values == (1, 0, 1)
        assert xi.integral() == 2.0
        assert xi(0.5) == 1
        assert xi(-1.0) == 0
        assert xi(5.0) == 0

    def test_negative_shift(self):
        xi = counting_ssf([1.0, 3.0], [0.0, 2.0])
        assert xi.values == (-1, 0, -1)
        assert xi.value_set() == (-1, 0)

    def test_breakpoint_takes_right_value(self):
        xi = counting_ssf([0.0, 2.0], [1.0, 3.0])
        assert xi(1.0) == 0
        assert xi(0.0) == 1

    def test_unsorted_input(self):
        assert counting_ssf([2.0, 0.0], [3.0, 1.0]) == counting_ssf([0.0, 2.0], [1.0, 3.0])

    def test_identical_spectra(self):
        xi = counting_ssf([1.0, 2.0, 2.0], [1.0, 2.0, 2.0])
        assert set(xi.values) <= {0}
        assert xi.integral() == 0.0

        assert counting_ssf([1.0, 1.0], [1.0, 1.0]).values == ()

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            counting_ssf([0.0], [0.0, 1.0])


class TestTraceFormula:
    def test_scalar(self):
        report = trace_formula_check(SymMatrix([[0.0]]), np.array([1.0]), 0.5, [0.0, 1.0])
        assert report.lhs == 0.5
        assert report.rhs == 0.5
        assert report.abs_diff == 0.0
        assert report.xi_values == (0, 1)
        assert report.interlaced

    def test_constant_phi(self, random_symmetric, rng):
        report = trace_formula_check(random_symmetric(6), rng.standard_normal(6), 1.0, [3.0])
        assert report.lhs == 0.0
        assert report.rhs == 0.0

    def test_identity_phi_gives_mass(self, random_symmetric, rng):
        a0 = random_symmetric(10)
        v = rng.standard_normal(10)
        report = trace_formula_check(a0, v, -0.1, Polynomial([0.0, 1.0]))
        assert report.lhs == pytest.approx(-0.1 * float(v @ v), rel=1e-10)
        assert report.relative_diff() <= TRACE_TOL

        dec0 = jacobi_eigen(a0)
        dec1 = jacobi_eigen(a0.plus_rank_one(v, -0.1))
        xi = counting_ssf(dec0.eigenvalues, dec1.eigenvalues)
        assert xi.integral() == pytest.approx(-0.1 * float(v @ v), rel=1e-10)

    def test_degree_cap(self, random_symmetric):
        with pytest.raises(InvalidArgumentError):
            trace_formula_check(random_symmetric(3), np.ones(3), 1.0, [0.0] * 9 + [1.0])

    def test_dimension_mismatch(self, random_symmetric):
        with pytest.raises(DimensionMismatchError):
            trace_formula_check(random_symmetric(3), np.ones(4), 1.0, [0.0, 1.0])


class TestTraceTrials:
    def test_hundred_trials(self):
        suite = trace_trials(20, 100, seed=7, degree=5)
        assert len(suite.reports) == 100
        assert suite.max_relative_diff <= TRACE_TOL

        for report in suite.reports:
            assert report.interlaced
            if report.coupling > 0:
                assert set(report.xi_values) <= {0, 1}
            else:
                assert set(report.xi_values) <= {-1, 0}

    def test_trial_schedule(self):
        suite = trace_trials(4, 8, seed=1, degree=3)
        assert [r.trial for r in suite.reports] == list(range(8))
        assert [r.coupling for r in suite.reports] == [1.0, -1.0, 0.1, -0.1] * 2
        assert suite.reports[0].phi == (0.0, 1.0)
        assert suite.reports[1].phi == (0.0, 0.0, 1.0)
        assert suite.reports[2].phi == (0.0, 0.0, 0.0, 1.0)
        assert len(suite.reports[3].phi) == 4

    def test_deterministic(self):
        assert trace_trials(6, 5, seed=3, degree=4) == trace_trials(6, 5, seed=3, degree=4)

    def test_parallel_matches_serial(self):
        assert trace_trials(6, 6, seed=11, degree=2, jobs=3) == trace_trials(6, 6, seed=11, degree=2)

    def test_trials_are_replayable(self):
        long = trace_trials(5, 6, seed=2, degree=3)
        short = trace_trials(5, 2, seed=2, degree=3)
        assert long.reports[:2] == short.reports

    def test_smallest_case(self):
        suite = trace_trials(2, 1, seed=1, degree=1)
        assert suite.max_abs_diff <= 1e-12

    @pytest.mark.parametrize(
        "args",
        [
            dict(dim=1, trials=1, seed=0, degree=1),
            dict(dim=4, trials=0, seed=0, degree=1),
            dict(dim=4, trials=1, seed=0, degree=9),
            dict(dim=4, trials=1, seed=-1, degree=1),
        ],
    )
    def test_validation(self, args):
        with pytest.raises(InvalidArgumentError):
            trace_trials(**args)


class TestProjections:
    def test_scalar_difference(self):
        dec0 = jacobi_eigen(SymMatrix([[0.0]]))
        dec1 = jacobi_eigen(SymMatrix([[1.0]]))
        assert_array_equal(projection_difference(dec0, dec1, 0.5).entries, [[-1.0]])

    def test_same_operator(self, random_symmetric):
        dec = jacobi_eigen(random_symmetric(5))
        assert projection_difference(dec, dec, 0.05).max_abs() == 0.0

    def test_size_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            projection_difference(jacobi_eigen(SymMatrix.identity(2)), jacobi_eigen(SymMatrix.identity(3)), 0.5)

    def test_naive_lifshitz_sign(self):
        dec0 = jacobi_eigen(SymMatrix([[0.0]]))
        dec1 = jacobi_eigen(SymMatrix([[1.0]]))
        (point,) = naive_lifshitz(dec0, dec1, [0.5])
        assert point.trace_difference == -1
        assert point.xi == 1

    def test_naive_lifshitz_always_opposite(self, random_symmetric, rng):
        a0 = random_symmetric(8)
        dec0 = jacobi_eigen(a0)
        dec1 = jacobi_eigen(a0.plus_rank_one(rng.standard_normal(8), 1.0))
        for point in naive_lifshitz(dec0, dec1, [-2.05, -0.95, 0.05, 1.15, 2.35]):
            assert point.trace_difference + point.xi == 0

    def test_generic_position(self, random_symmetric, rng):
        a0 = random_symmetric(10)
        dec0 = jacobi_eigen(a0)
        dec1 = jacobi_eigen(a0.plus_rank_one(rng.standard_normal(10), 1.0))
        report = generic_position(dec0, dec1, 0.05)
        assert -1.0 - 1e-10 <= report.min_eig <= report.max_eig <= 1.0 + 1e-10
        assert report.margin == pytest.approx(1.0 - max(abs(report.min_eig), abs(report.max_eig)))
        assert report.fill.size == 10


def _divergence_oracle(mu: float, length: float) -> float:
    # the double integral of k(x + y)^2 over the square, as a single integral over s = x + y
    rate = math.sqrt(1.0 / mu - 1.0)

    def integrand(s):
        k = (2.0 / math.pi) * math.sin(rate * s) / s if s > 0 else (2.0 / math.pi) * rate
        return min(s, 2.0 * length - s) * k * k

    value, _ = integrate.quad(integrand, 0.0, 2.0 * length, limit=2000, points=[length])
    return value


class TestDivergence:
    @pytest.mark.parametrize("mu", [pytest.param(0.2, marks=pytest.mark.slow), 0.5, 0.8])
    def test_slope(self, mu):
        scan = hs_divergence_scan(mu, [50.0, 100.0, 200.0, 400.0])
        assert scan.slope_error() <= 0.15
        assert scan.expected_slope == pytest.approx(2.0 / math.pi ** 2)
        assert all(b > a for a, b in zip(scan.frob_sq, scan.frob_sq[1:]))

    def test_matches_oracle(self):
        scan = hs_divergence_scan(0.5, [20.0, 40.0, 80.0])
        for length, value in zip(scan.lengths, scan.frob_sq):
            assert value == pytest.approx(_divergence_oracle(0.5, length), rel=5e-3)

    def test_sizes(self):
        scan = hs_divergence_scan(0.5, [10.0, 20.0, 40.0], nodes_per_unit=12.5)
        assert scan.sizes == (125, 250, 500)

        scan = hs_divergence_scan(0.5, [10.0, 20.0, 40.0], rule=GridRule.gauss_legendre(order=8))
        assert all(n % 8 == 0 for n in scan.sizes)

    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            hs_divergence_scan(0.5, [10.0, 20.0])

        with pytest.raises(InvalidArgumentError):
            hs_divergence_scan(0.5, [10.0, 20.0, 20.0])

        with pytest.raises(ResolutionError):
            hs_divergence_scan(0.5, [10.0, 20.0, 40.0], nodes_per_unit=5.0)


class TestCrossCheck:
    def test_default_pairs(self):
        pairs = default_test_pairs()
        assert len(pairs) == 6
        assert [(f.label, g.label) for f, g in pairs][:2] == [
            ("gaussian(2,1)", "gaussian(2,1)"),
            ("gaussian(2,1)", "gaussian(5,1)"),
        ]

    def test_rejects_short_window(self):
        with pytest.raises(ResolutionError):
            crosscheck_kernel(0.999, make_grid(40.0, 400))

    def test_rejects_coarse_grid(self):
        with pytest.raises(ResolutionError):
            crosscheck_kernel(0.5, make_grid(40.0, 80))

    def test_rejects_test_function_outside_window(self):
        tests = [(TestFunction.gaussian(35.0, 2.0), TestFunction.gaussian(5.0, 1.0))]
        with pytest.raises(ResolutionError):
            crosscheck_kernel(0.5, make_grid(40.0, 400), tests)

    def test_rejects_empty_tests(self):
        with pytest.raises(InvalidArgumentError):
            crosscheck_kernel(0.5, make_grid(40.0, 400), [])

    def test_quarter_needs_finer_grid(self):
        with pytest.raises(ResolutionError, match="node spacing"):
            crosscheck_kernel(0.25, make_grid(40.0, 400))

    @pytest.mark.slow
    def test_projection_difference_matches_kernel(self):
        report = crosscheck_kernel(0.5, make_grid(40.0, 400))
        assert report.size == 400
        assert len(report.pairs) == 6
        assert report.max_discrepancy <= 0.1

    # twice the discrepancy at N=400 where that grid resolves mu
    @pytest.mark.slow
    @pytest.mark.parametrize("mu, bound", [(0.25, 0.2), (0.5, 0.1), (0.75, 0.17)])
    def test_matches_kernel_on_fine_grid(self, mu, bound):
        report = crosscheck_kernel(mu, make_grid(40.0, 800))
        assert report.size == 800
        assert report.max_discrepancy <= bound
