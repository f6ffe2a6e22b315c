import math

import numpy as np
import pytest
import scipy.linalg
from numpy.testing import assert_allclose, assert_array_equal

from kreinhankel.eigensolve import jacobi_eigen
from kreinhankel.errors import DimensionMismatchError, DomainError
from kreinhankel.hankel import (
    cayley_to_line,
    coeff_by_quadrature,
    conjugation_defect,
    fourier_coeff,
    hankel_section,
    hilbert_alt,
    hilbert_shifted,
    parity_check,
    parity_split,
    sign_diagonal,
    symbol_on_circle,
)
from kreinhankel.kernels import symbol_on_line
from kreinhankel.structs import SymMatrix


def test_fourier_coeffs():
    assert fourier_coeff(1) == 2.0 / math.pi
    assert fourier_coeff(3) == -2.0 / (3.0 * math.pi)
    assert fourier_coeff(5) == pytest.approx(2.0 / (5.0 * math.pi), rel=1e-15)
    for k in (2, 4, 6, 100):
        assert fourier_coeff(k) == 0.0


def test_fourier_coeff_domain():
    with pytest.raises(DomainError):
        fourier_coeff(0)


@pytest.mark.parametrize("k", range(1, 13))
def test_coeff_by_quadrature(k):
    assert coeff_by_quadrature(k) == pytest.approx(fourier_coeff(k), abs=1e-10)


def test_symbol_on_circle():
    z = np.exp(1j * np.array([0.0, 1.0, -1.5, 2.0, math.pi]))
    assert_allclose(symbol_on_circle(z), [2.0, 2.0, 2.0, 0.0, 0.0])
    assert symbol_on_circle(1j) == 2.0


def test_cayley_map():
    theta = np.linspace(-3.0, 3.0, 61)
    z = np.exp(1j * theta)
    assert_allclose(cayley_to_line(z), np.tan(theta / 2), rtol=1e-12, atol=1e-14)
    assert_array_equal(symbol_on_line(cayley_to_line(z)), symbol_on_circle(z))

    with pytest.raises(DomainError):
        cayley_to_line(-1.0)


def test_small_hankel_section():
    m = hankel_section(2)
    assert_array_equal(m.entries, [[2.0 / math.pi, 0.0], [0.0, -2.0 / (3.0 * math.pi)]])


def test_hankel_structure():
    m = hankel_section(12).entries
    for n in range(11):
        assert m[n, n + 1] == m[n + 1, n]
        assert m[n + 1, 0] == m[n, 1]


@pytest.mark.parametrize("n", [1, 2, 6, 10])
def test_hilbert_is_classical(n):
    assert_array_equal(hilbert_shifted(0.0, n).entries, scipy.linalg.hilbert(n))


def test_hilbert_shift_domain():
    with pytest.raises(DomainError):
        hilbert_shifted(1.0, 2)

    with pytest.raises(DomainError):
        hilbert_alt(3.0, 4)

    # 2N - 1 = 3 is the largest index sum plus one
    hilbert_shifted(4.0, 2)
    hilbert_shifted(0.5, 4)
    hilbert_shifted(-0.5, 4)


def test_sign_diagonal():
    assert_array_equal(sign_diagonal(5), [1.0, -1.0, 1.0, -1.0, 1.0])


@pytest.mark.parametrize("p", [0.5, -0.5])
def test_conjugation_is_exact(p):
    assert conjugation_defect(p, 128) == 0.0


@pytest.mark.parametrize("p", [0.5, -0.5])
def test_alternating_and_shifted_spectra_agree(p):
    alt = jacobi_eigen(hilbert_alt(p, 32))
    shifted = jacobi_eigen(hilbert_shifted(p, 32))
    assert_allclose(alt.eigenvalues, shifted.eigenvalues, rtol=0, atol=1e-12 * shifted.norm)


@pytest.mark.parametrize("p", [0.0, 0.5, -0.5])
def test_largest_eigenvalue_nondecreasing(p):
    tops = [jacobi_eigen(hilbert_shifted(p, n)).eigenvalues[-1] for n in (4, 8, 16, 32)]
    assert all(b >= a for a, b in zip(tops, tops[1:]))


def test_parity_split_is_exact():
    even, odd, off_max = parity_split(hankel_section(32))
    assert off_max == 0.0
    assert even.n == odd.n == 16


def test_parity_split_odd_dimension():
    with pytest.raises(DimensionMismatchError):
        parity_split(SymMatrix.identity(3))


@pytest.mark.parametrize("n", [1, 8, 64])
def test_parity_check(n):
    report = parity_check(n)
    assert report.size == n
    assert report.off_max == 0.0
    assert report.even_deviation <= 1e-15
    assert report.odd_deviation <= 1e-15
    assert report.spectrum_mismatch <= 1e-10


@pytest.mark.slow
def test_parity_check_large():
    report = parity_check(256)
    assert report.off_max == 0.0
    assert report.even_deviation <= 1e-15
    assert report.odd_deviation <= 1e-15
    assert report.spectrum_mismatch <= 1e-10
