import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from kreinhankel.eigensolve import (
    SolverSettings,
    _off_diagonal,
    default_guard,
    jacobi_eigen,
    spectral_projection,
)
from kreinhankel.errors import InvalidArgumentError, NoConvergenceError, ThresholdTooCloseError
from kreinhankel.hankel import hilbert_shifted
from kreinhankel.structs import SymMatrix


class TestJacobiEigen:
    def test_diagonal(self):
        dec = jacobi_eigen(SymMatrix.diagonal([3.0, -1.0, 2.0]))
        assert_array_equal(dec.eigenvalues, [-1.0, 2.0, 3.0])
        assert dec.sweeps == 0
        assert_array_equal(np.abs(dec.eigenvectors), [[0, 0, 1], [1, 0, 0], [0, 1, 0]])

    def test_two_by_two_hilbert(self):
        dec = jacobi_eigen(hilbert_shifted(0.0, 2))
        root = math.sqrt(13.0)
        assert_allclose(dec.eigenvalues, [(4 - root) / 6, (4 + root) / 6], rtol=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 5, 12, 30])
    def test_matches_lapack(self, random_symmetric, n):
        m = random_symmetric(n)
        dec = jacobi_eigen(m)
        assert_allclose(dec.eigenvalues, np.linalg.eigvalsh(m.entries), rtol=0, atol=1e-12 * max(1.0, m.frobenius()))

    def test_health(self, random_symmetric):
        m = random_symmetric(24)
        dec = jacobi_eigen(m)
        assert dec.residual <= 1e-10 * dec.norm
        assert dec.orth_defect <= 1e-10
        assert dec.trace_defect() <= 1e-10
        assert dec.frobenius_defect() <= 1e-10
        assert_allclose(m.entries @ dec.eigenvectors, dec.eigenvectors * dec.eigenvalues, atol=1e-10)

    def test_tiny_off_diagonal_mass_is_seen(self):
        a = np.diag([1.0, 2.0, 3.0])
        a[0, 2] = a[2, 0] = 1e-10
        assert _off_diagonal(a) == pytest.approx(math.sqrt(2.0) * 1e-10, rel=1e-12)

        dec = jacobi_eigen(SymMatrix(a))
        assert dec.sweeps >= 1
        assert dec.off_diagonal <= 1e-12 * dec.norm

    @pytest.mark.parametrize("build", [lambda: hilbert_shifted(0.5, 32), lambda: hilbert_shifted(0.0, 24)])
    def test_health_on_ill_conditioned_sections(self, build):
        m = build()
        dec = jacobi_eigen(m)
        assert dec.residual <= 1e-10 * dec.norm
        assert dec.orth_defect <= 1e-10
        assert_allclose(dec.eigenvalues, np.linalg.eigvalsh(m.entries), rtol=0, atol=1e-12 * dec.norm)

    def test_sign_normalisation(self, random_symmetric):
        dec = jacobi_eigen(random_symmetric(10))
        for column in dec.eigenvectors.T:
            first = column[np.flatnonzero(np.abs(column) > 1e-12)[0]]
            assert first > 0

    def test_deterministic(self, random_symmetric):
        m = random_symmetric(16)
        a = jacobi_eigen(m)
        b = jacobi_eigen(m)
        assert_array_equal(a.eigenvalues, b.eigenvalues)
        assert_array_equal(a.eigenvectors, b.eigenvectors)

    def test_repeated_eigenvalues(self):
        dec = jacobi_eigen(SymMatrix.identity(3))
        assert_array_equal(dec.eigenvalues, [1.0, 1.0, 1.0])
        assert_array_equal(dec.eigenvectors, np.eye(3))

    def test_zero_matrix(self):
        dec = jacobi_eigen(SymMatrix.zeros(4))
        assert_array_equal(dec.eigenvalues, np.zeros(4))
        assert dec.residual == 0.0

    def test_readonly_output(self, random_symmetric):
        dec = jacobi_eigen(random_symmetric(4))
        with pytest.raises(ValueError):
            dec.eigenvalues[0] = 1.0

    def test_sweep_cap(self, random_symmetric):
        with pytest.raises(NoConvergenceError) as e:
            jacobi_eigen(random_symmetric(30), max_sweeps=1)

        assert e.value.off_diagonal > 0
        assert e.value.operation == "eigensolve.jacobi_eigen"

    def test_bad_settings(self):
        with pytest.raises(InvalidArgumentError):
            jacobi_eigen(SymMatrix.identity(2), tol=0.0)

        with pytest.raises(InvalidArgumentError):
            jacobi_eigen(SymMatrix.identity(2), max_sweeps=0)

    def test_solver_settings(self, random_symmetric):
        m = random_symmetric(8)
        assert_array_equal(SolverSettings().decompose(m).eigenvalues, jacobi_eigen(m).eigenvalues)


class TestSpectralProjection:
    def test_projection(self):
        dec = jacobi_eigen(SymMatrix.diagonal([0.0, 1.0, 2.0]))
        proj = spectral_projection(dec, 1.5)
        assert proj.rank == 2
        assert proj.threshold == 1.5
        assert_array_equal(proj.matrix.entries, np.diag([1.0, 1.0, 0.0]))

    def test_idempotent(self, random_symmetric):
        dec = jacobi_eigen(random_symmetric(20))
        proj = spectral_projection(dec, 0.1)
        assert proj.idempotency_defect() <= 1e-12
        assert proj.matrix.trace() == pytest.approx(proj.rank)

    def test_empty_and_full(self):
        dec = jacobi_eigen(SymMatrix.diagonal([0.0, 1.0]))
        assert spectral_projection(dec, -5.0).rank == 0
        assert spectral_projection(dec, 5.0).rank == 2
        assert spectral_projection(dec, -5.0).idempotency_defect() == 0.0

    def test_threshold_on_eigenvalue(self):
        dec = jacobi_eigen(SymMatrix.diagonal([0.0, 1.0, 2.0]))
        with pytest.raises(ThresholdTooCloseError) as e:
            spectral_projection(dec, 1.0)

        assert e.value.eigenvalue == 1.0
        assert e.value.distance == 0.0

    def test_explicit_guard(self):
        dec = jacobi_eigen(SymMatrix.diagonal([0.0, 1.0, 2.0]))
        with pytest.raises(ThresholdTooCloseError):
            spectral_projection(dec, 1.05, guard=0.1)

        assert spectral_projection(dec, 1.05, guard=0.01).rank == 2

        with pytest.raises(InvalidArgumentError):
            spectral_projection(dec, 0.5, guard=0.0)

    def test_default_guard(self):
        assert default_guard(jacobi_eigen(SymMatrix.diagonal([0.0, 2.0]))) == pytest.approx(2e-8)
        assert default_guard(jacobi_eigen(SymMatrix.identity(3))) == pytest.approx(1e-8)
        assert default_guard(jacobi_eigen(SymMatrix.diagonal([5.0]))) == pytest.approx(5e-8)
