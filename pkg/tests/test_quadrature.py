import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from kreinhankel.errors import DimensionMismatchError, InvalidArgumentError, ResolutionError
from kreinhankel.kernels import KernelSpec, kernel_values
from kreinhankel.quadrature import (
    MAX_CACHED_GRIDS,
    TestFunction,
    discretize,
    frobenius_sq,
    make_grid,
    quadratic_form,
)
from kreinhankel.structs import GridRule, GridRuleKind, SymMatrix


def test_midpoint_grid():
    grid = make_grid(2.0, 4, GridRule.midpoint())
    assert_allclose(grid.nodes, [0.25, 0.75, 1.25, 1.75])
    assert_allclose(grid.weights, [0.5] * 4)
    assert grid.rule.kind == GridRuleKind.MIDPOINT
    assert grid.max_spacing == pytest.approx(0.5)


def test_gauss_legendre_grid():
    grid = make_grid(3.0, 24)
    assert grid.size == 24
    assert grid.rule.panels == 3
    assert math.fsum(grid.weights) == pytest.approx(3.0, rel=1e-14)
    assert np.all(np.diff(grid.nodes) > 0)
    assert 0.0 < grid.nodes[0] and grid.nodes[-1] < 3.0


def test_gauss_legendre_exact_for_polynomials():
    grid = make_grid(2.0, 16, GridRule.gauss_legendre(order=8))
    for k in range(16):
        assert np.sum(grid.weights * grid.nodes ** k) == pytest.approx(2.0 ** (k + 1) / (k + 1), rel=1e-13)


def test_grid_is_deterministic():
    a = make_grid(7.5, 64)
    b = make_grid(7.5, 64)
    assert np.array_equal(a.nodes, b.nodes)
    assert np.array_equal(a.weights, b.weights)


def test_grid_errors():
    with pytest.raises(InvalidArgumentError):
        make_grid(10.0, 20)

    with pytest.raises(InvalidArgumentError):
        make_grid(10.0, 16, GridRule.gauss_legendre(order=8, panels=3))

    with pytest.raises(InvalidArgumentError):
        make_grid(0.0, 16)

    with pytest.raises(InvalidArgumentError):
        make_grid(10.0, 1, GridRule.midpoint())

    with pytest.raises(InvalidArgumentError):
        GridRule(GridRuleKind.MIDPOINT, order=2)


def test_discretize_is_symmetric():
    grid = make_grid(10.0, 48)
    for spec in (KernelSpec.a0(), KernelSpec.a1(), KernelSpec.kmu(0.5)):
        m = discretize(spec, grid)
        assert np.array_equal(m.entries, m.entries.T)


def test_discretize_matches_weighted_nystrom_spectrum():
    grid = make_grid(12.0, 32)
    spec = KernelSpec.a1()
    sym = discretize(spec, grid)
    weighted = kernel_values(spec, grid.nodes[:, None], grid.nodes[None, :]) * grid.weights[None, :]

    ours = np.linalg.eigvalsh(sym.entries)
    theirs = np.sort(np.linalg.eigvals(weighted).real)
    assert_allclose(ours, theirs, atol=1e-12)


def test_resolvent_spectrum_in_unit_interval():
    grid = make_grid(30.0, 240)
    for spec in (KernelSpec.a0(), KernelSpec.a1()):
        eigs = np.linalg.eigvalsh(discretize(spec, grid).entries)
        assert eigs[0] > -1e-10
        assert eigs[-1] < 1.0 + 1e-6


def test_blocked_frobenius():
    grid = make_grid(20.0, 1100, GridRule.midpoint())
    spec = KernelSpec.kmu(0.4)
    assert frobenius_sq(spec, grid) == pytest.approx(discretize(spec, grid).frobenius_sq(), rel=1e-12)


def test_test_function_sampling():
    grid = make_grid(20.0, 160)
    f = TestFunction.gaussian(5.0, 1.0)
    first = f.sample(grid)
    assert f.sample(grid) is first
    assert_allclose(first, np.sqrt(grid.weights) * np.exp(-0.5 * (grid.nodes - 5.0) ** 2))

    assert f.label == "gaussian(5,1)"
    assert f.scaled(2.0).label == "2*gaussian(5,1)"


def test_test_function_outside_window():
    grid = make_grid(20.0, 160)
    with pytest.raises(ResolutionError):
        TestFunction.gaussian(18.0, 1.0).sample(grid)

    with pytest.raises(ResolutionError):
        TestFunction.indicator(10.0, 25.0).sample(grid)


def test_test_function_validation():
    with pytest.raises(InvalidArgumentError):
        TestFunction.gaussian(1.0, 0.0)

    with pytest.raises(InvalidArgumentError):
        TestFunction.indicator(2.0, 1.0)


def test_quadratic_form_integrates():
    grid = make_grid(20.0, 160)
    f = TestFunction.gaussian(5.0, 1.0)
    value = quadratic_form(SymMatrix.identity(grid.size), f, f, grid)
    assert value == pytest.approx(math.sqrt(math.pi), rel=1e-8)


def test_quadratic_form_dimension_mismatch():
    grid = make_grid(20.0, 160)
    f = TestFunction.gaussian(5.0, 1.0)
    with pytest.raises(DimensionMismatchError):
        quadratic_form(SymMatrix.identity(8), f, f, grid)


def test_sample_cache_is_bounded():
    f = TestFunction.gaussian(2.0, 0.5)
    grids = [make_grid(10.0, 8 * k) for k in range(1, MAX_CACHED_GRIDS + 3)]
    samples = [f.sample(grid) for grid in grids]

    assert f.sample(grids[-1]) is samples[-1]
    again = f.sample(grids[0])
    assert again is not samples[0]
    assert_allclose(again, samples[0], rtol=0, atol=0)


def test_quadratic_form_symmetry_and_bilinearity():
    grid = make_grid(20.0, 160)
    m = discretize(KernelSpec.kmu(0.5), grid)
    a0 = discretize(KernelSpec.a0(), grid)
    f = TestFunction.gaussian(3.0, 1.0)
    g = TestFunction.gaussian(6.0, 1.5)

    value = quadratic_form(m, f, g, grid)
    assert quadratic_form(m, g, f, grid) == pytest.approx(value, rel=1e-13, abs=1e-15)
    assert quadratic_form(m, f.scaled(-2.5), g, grid) == pytest.approx(-2.5 * value, rel=1e-13, abs=1e-15)
    assert quadratic_form(m + a0, f, g, grid) == pytest.approx(
        value + quadratic_form(a0, f, g, grid), rel=1e-12, abs=1e-15
    )


def test_quadratic_form_refines():
    f = TestFunction.gaussian(3.0, 1.0)
    g = TestFunction.gaussian(5.0, 1.0)
    values = []
    for n in (64, 128, 256, 512):
        grid = make_grid(20.0, n)
        values.append(quadratic_form(discretize(KernelSpec.kmu(0.5), grid), f, g, grid))

    diffs = [abs(b - a) for a, b in zip(values, values[1:])]
    for before, after in zip(diffs, diffs[1:]):
        assert after < before or after <= 1e-13

    assert diffs[-1] <= 1e-10


def test_matvec_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        SymMatrix.identity(3).matvec(np.ones(4))
