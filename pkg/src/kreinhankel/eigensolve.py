"""
Dense symmetric eigensolver (cyclic Jacobi) and spectral projections. Every spectrum in this
package goes through :func:`.jacobi_eigen`.
"""
from __future__ import annotations

import logging
import math
from typing import Optional

import attr
import numpy as np

from kreinhankel.errors import InvalidArgumentError, NoConvergenceError, ThresholdTooCloseError
from kreinhankel.structs import EigenDecomposition, ProjectionMatrix, SymMatrix

logger = logging.getLogger(__name__)

__all__ = (
    "DEFAULT_TOL",
    "DEFAULT_MAX_SWEEPS",
    "DEFAULT_GUARD_FRACTION",
    "HEALTH_TOL",
    "SolverSettings",
    "jacobi_eigen",
    "default_guard",
    "spectral_projection",
)

#: Relative off-diagonal mass at which the sweeps stop.
DEFAULT_TOL = 1e-12

#: The sweep cap.
DEFAULT_MAX_SWEEPS = 30

#: The default guard, as a fraction of the spectral span.
DEFAULT_GUARD_FRACTION = 1e-8

#: Bound on ``residual / ||M||_F`` and on the orthogonality defect of every decomposition.
HEALTH_TOL = 1e-10

# components below this are treated as zero when fixing eigenvector signs
_SIGN_EPS = 1e-12


def _off_diagonal(a: np.ndarray) -> float:
    # strict upper triangle, counted twice
    return math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int):
    """
    Applies the Jacobi rotation that annihilates ``a[p, q]``, in place on ``a`` (two-sided) and
    ``v`` (columns).
    """
    apq = a[p, q]
    app = a[p, p]
    aqq = a[q, q]

    theta = (aqq - app) / (2.0 * apq)
    t = 1.0 / (abs(theta) + math.hypot(theta, 1.0))
    if theta < 0:
        t = -t

    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c

    col_p = a[:, p].copy()
    col_q = a[:, q]
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q

    row_p = a[p, :].copy()
    row_q = a[q, :]
    a[p, :] = c * row_p - s * row_q
    a[q, :] = s * row_p + c * row_q

    # the 2x2 block is known in closed form
    a[p, p] = app - t * apq
    a[q, q] = aqq + t * apq
    a[p, q] = 0.0
    a[q, p] = 0.0

    vec_p = v[:, p].copy()
    vec_q = v[:, q]
    v[:, p] = c * vec_p - s * vec_q
    v[:, q] = s * vec_p + c * vec_q


def _normalise(eigenvalues: np.ndarray, eigenvectors: np.ndarray):
    """
    Fixes signs (first nonzero component positive) then sorts ascending. Exact ties are ordered by
    the eigenvectors, lexicographically descending, so the output never depends on sweep history.
    """
    n = eigenvalues.shape[0]
    cols = np.arange(n)
    first = np.argmax(np.abs(eigenvectors) > _SIGN_EPS, axis=0)
    signs = np.sign(eigenvectors[first, cols])
    signs[signs == 0] = 1.0
    eigenvectors = eigenvectors * signs[None, :]

    keys = tuple(-eigenvectors[::-1]) + (eigenvalues,)
    order = np.lexsort(keys)
    return eigenvalues[order], np.ascontiguousarray(eigenvectors[:, order])


def jacobi_eigen(
    m: SymMatrix,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    *,
    health_tol: float = HEALTH_TOL,
) -> EigenDecomposition:
    """
    Diagonalizes a symmetric matrix with the cyclic Jacobi method.

    Each sweep visits every ``(p, q)``, ``p < q``, in row-major order, skipping entries smaller
    than ``tol * ||M||_F / n^2``. Sweeps continue until the off-diagonal Frobenius mass drops to
    ``tol * ||M||_F``.

    :param m: The matrix. Only a private copy is modified.
    :param tol: The relative off-diagonal tolerance.
    :param max_sweeps: The sweep cap.
    :param health_tol: The bound the returned residual (relative to ``||M||_F``) and
                       orthogonality defect must satisfy.
    :return: The eigenpairs, ascending, with residual metadata.
    :raises NoConvergenceError: If the cap is hit, or the result fails its health check.
    """
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol}", operation="eigensolve.jacobi_eigen")

    if max_sweeps < 1:
        raise InvalidArgumentError(
            f"max_sweeps must be at least 1, got {max_sweeps}", operation="eigensolve.jacobi_eigen"
        )

    a = np.array(m.entries, dtype=float)
    n = m.n
    v = np.eye(n)

    norm = m.frobenius()
    target = tol * norm
    skip = target / (n * n)

    sweeps = 0
    off = _off_diagonal(a)
    while off > target:
        if sweeps >= max_sweeps:
            raise NoConvergenceError(
                f"no convergence after {sweeps} sweeps on a {n}x{n} matrix "
                f"(off-diagonal mass {off:.3e}, target {target:.3e})",
                off_diagonal=off,
                operation="eigensolve.jacobi_eigen",
            )

        sweeps += 1
        for p in range(n - 1):
            row = a[p]
            for q in range(p + 1, n):
                if abs(row[q]) >= skip:
                    _rotate(a, v, p, q)

        off = _off_diagonal(a)
        logger.debug(f"Jacobi sweep {sweeps} on n={n}: off-diagonal mass {off:.3e}")

    eigenvalues, eigenvectors = _normalise(np.diagonal(a).copy(), v)

    residual = float(np.max(np.abs(m.entries @ eigenvectors - eigenvectors * eigenvalues[None, :])))
    orth_defect = float(np.max(np.abs(eigenvectors.T @ eigenvectors - np.eye(n))))

    if residual > health_tol * norm or orth_defect > health_tol:
        raise NoConvergenceError(
            f"decomposition of a {n}x{n} matrix failed its health check "
            f"(residual {residual:.3e}, orthogonality defect {orth_defect:.3e})",
            off_diagonal=off,
            operation="eigensolve.jacobi_eigen",
        )

    eigenvectors.setflags(write=False)
    return EigenDecomposition(
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        residual=residual,
        orth_defect=orth_defect,
        norm=norm,
        trace=m.trace(),
        sweeps=sweeps,
        off_diagonal=off,
    )


@attr.s(frozen=True, slots=True)
class SolverSettings(object):
    """
    The eigensolver knobs, passed through every operation that diagonalizes something.
    """

    #: The relative off-diagonal tolerance.
    tol: float = attr.ib(default=DEFAULT_TOL)

    #: The sweep cap.
    max_sweeps: int = attr.ib(default=DEFAULT_MAX_SWEEPS)

    def decompose(self, m: SymMatrix) -> EigenDecomposition:
        return jacobi_eigen(m, tol=self.tol, max_sweeps=self.max_sweeps)


def default_guard(dec: EigenDecomposition) -> float:
    """
    :return: ``1e-8`` times the spectral span, or times ``max(1, |lambda|)`` for a spectrum that
             is a single point.
    """
    scale = dec.span
    if scale <= 0:
        scale = max(1.0, float(np.max(np.abs(dec.eigenvalues))))

    return DEFAULT_GUARD_FRACTION * scale


def spectral_projection(
    dec: EigenDecomposition, mu: float, guard: Optional[float] = None
) -> ProjectionMatrix:
    """
    Builds ``E((-inf, mu)) = sum over lambda_i < mu of v_i v_i^T``.

    :param dec: The decomposition of the operator.
    :param mu: The threshold.
    :param guard: The minimum allowed distance between ``mu`` and the spectrum. Defaults to
                  :func:`.default_guard`.
    :raises ThresholdTooCloseError: If an eigenvalue lies within ``guard`` of ``mu``.
    """
    if guard is None:
        guard = default_guard(dec)

    if not guard > 0:
        raise InvalidArgumentError(
            f"guard must be positive, got {guard}", operation="eigensolve.spectral_projection"
        )

    distance = np.abs(dec.eigenvalues - mu)
    closest = int(np.argmin(distance))
    if distance[closest] < guard:
        raise ThresholdTooCloseError(
            f"eigenvalue {dec.eigenvalues[closest]:.17g} is within {distance[closest]:.3e} of "
            f"the threshold {mu} (guard {guard:.3e})",
            eigenvalue=float(dec.eigenvalues[closest]),
            distance=float(distance[closest]),
            operation="eigensolve.spectral_projection",
        )

    below = dec.eigenvalues < mu
    basis = dec.eigenvectors[:, below]
    return ProjectionMatrix(
        matrix=SymMatrix(basis @ basis.T),
        threshold=mu,
        rank=int(np.count_nonzero(below)),
    )
