"""
Hankel sections of the arc-indicator symbol, shifted Hilbert matrices, and the parity
decomposition that splits the former into two copies of the latter.
"""
from __future__ import annotations

import logging
import math
from typing import Tuple, Union

import numpy as np

from kreinhankel.eigensolve import SolverSettings
from kreinhankel.errors import DimensionMismatchError, DomainError, InvalidArgumentError
from kreinhankel.kernels import symbol_on_line
from kreinhankel.quadrature import make_grid
from kreinhankel.structs import GridRule, ParityReport, SymMatrix

logger = logging.getLogger(__name__)

__all__ = (
    "symbol_on_circle",
    "cayley_to_line",
    "fourier_coeff",
    "fourier_coeffs",
    "coeff_by_quadrature",
    "hankel_section",
    "hilbert_shifted",
    "hilbert_alt",
    "sign_diagonal",
    "conjugation_defect",
    "parity_split",
    "parity_check",
)

_TWO_OVER_PI = 2.0 / math.pi


def symbol_on_circle(z: Union[complex, np.ndarray]) -> Union[float, np.ndarray]:
    """
    The symbol ``phi(z)`` on the unit circle: 2 on the closed right half ``Re z >= 0``, else 0.
    """
    z = np.asarray(z, dtype=complex)
    out = np.where(z.real >= 0.0, 2.0, 0.0)
    return out if out.ndim else float(out)


def cayley_to_line(z: Union[complex, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Maps a point of the unit circle (other than -1) to ``t = i (1 - z) / (1 + z)``, which is real
    there (``t = tan(theta / 2)`` for ``z = exp(i theta)``).

    :raises DomainError: At ``z = -1``.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.isclose(z, -1.0, rtol=0.0, atol=1e-15)):
        raise DomainError("the Cayley map is undefined at z = -1", operation="hankel.cayley_to_line")

    t = 1j * (1.0 - z) / (1.0 + z)
    out = t.real
    return out if out.ndim else float(out)


def fourier_coeff(k: int) -> float:
    """
    The ``k``-th Fourier coefficient of the symbol, ``(2 / pi k) sin(pi k / 2)``.

    This never goes through a floating ``sin``: even ``k`` gives an exact 0, so the parity blocks
    of :func:`.hankel_section` decouple exactly.

    :raises DomainError: For ``k < 1``.
    """
    if k < 1:
        raise DomainError(f"Fourier index must be at least 1, got {k}", operation="hankel.fourier_coeff")

    k = int(k)
    residue = k % 4
    if residue == 1:
        return _TWO_OVER_PI / k
    elif residue == 3:
        return -_TWO_OVER_PI / k

    return 0.0


def fourier_coeffs(count: int) -> np.ndarray:
    """
    :return: ``[0, c_1, c_2, ..., c_count]``, index-aligned with ``k``.
    """
    out = np.zeros(count + 1)
    for k in range(1, count + 1):
        out[k] = fourier_coeff(k)

    return out


def coeff_by_quadrature(k: int, nodes: int = 10_000) -> float:
    """
    Recomputes ``c_k = (1 / 2 pi) integral_0^{2 pi} exp(i k theta) phi(exp(i theta)) d theta``
    numerically as ``(1 / pi) integral_{-pi/2}^{pi/2} cos(k theta) d theta``. Cross-validates
    :func:`.fourier_coeff`.

    :param k: The index, at least 1.
    :param nodes: The node count, at least 64. Rounded up to a multiple of the Gauss-Legendre
                  order 8.
    """
    if k < 1:
        raise DomainError(f"Fourier index must be at least 1, got {k}", operation="hankel.coeff_by_quadrature")

    if nodes < 64:
        raise InvalidArgumentError(
            f"need at least 64 quadrature nodes, got {nodes}", operation="hankel.coeff_by_quadrature"
        )

    order = 8
    size = -(-nodes // order) * order
    grid = make_grid(math.pi, size, GridRule.gauss_legendre(order=order))
    theta = grid.nodes - 0.5 * math.pi
    # phi is 2 on the arc, which the integration window covers exactly
    integrand = 0.5 * symbol_on_line(np.tan(0.5 * theta)) * np.cos(k * theta)
    return float(np.sum(grid.weights * integrand)) / math.pi


def hankel_section(size: int) -> SymMatrix:
    """
    The ``N x N`` section of ``H(phi)``: ``M[n, k] = c_(n + k + 1)``, 0-based.
    """
    if size < 1:
        raise InvalidArgumentError(f"section size must be at least 1, got {size}")

    coeffs = fourier_coeffs(2 * size)
    return SymMatrix.from_index_function(size, lambda n, k: coeffs[n + k + 1])


def _check_shift(p: float, size: int):
    if size < 1:
        raise InvalidArgumentError(f"section size must be at least 1, got {size}")

    if float(p).is_integer() and 1 <= p <= 2 * size - 1:
        raise DomainError(
            f"shift p={p} hits a zero denominator n + k + 1 - p within a {size}x{size} section",
            operation="hankel.hilbert_shifted",
        )


def hilbert_shifted(p: float, size: int) -> SymMatrix:
    """
    The ``p``-shifted Hilbert section, ``M[n, k] = 1 / (n + k + 1 - p)``. ``p = 0`` is the
    standard Hilbert matrix.

    :raises DomainError: If ``p`` is a positive integer at most ``2N - 1``.
    """
    _check_shift(p, size)
    return SymMatrix.from_index_function(size, lambda n, k: 1.0 / (n + k + 1 - p))


def sign_diagonal(size: int) -> np.ndarray:
    """
    :return: The diagonal of ``D = diag((-1)^n)``.
    """
    return np.where(np.arange(size) % 2 == 0, 1.0, -1.0)


def hilbert_alt(p: float, size: int) -> SymMatrix:
    """
    The alternating ``p``-shifted Hilbert section, ``M[n, k] = (-1)^(n+k) / (n + k + 1 - p)``.
    Equal to ``D hilbert_shifted(p, N) D`` exactly, which is the finite-size form of the unitary
    equivalence between the two.
    """
    _check_shift(p, size)
    return SymMatrix.from_index_function(
        size, lambda n, k: np.where((n + k) % 2 == 0, 1.0, -1.0) / (n + k + 1 - p)
    )


def conjugation_defect(p: float, size: int) -> float:
    """
    :return: ``max |hilbert_alt(p, N) - D hilbert_shifted(p, N) D|``. Exactly 0.
    """
    conj = hilbert_shifted(p, size).conjugated(sign_diagonal(size))
    return (hilbert_alt(p, size) - conj).max_abs()


def parity_split(m: SymMatrix) -> Tuple[SymMatrix, SymMatrix, float]:
    """
    Compresses a ``2N x 2N`` matrix onto the even-index and odd-index coordinates.

    :return: ``(even, odd, off_max)`` with ``even[n, k] = M[2n, 2k]``,
             ``odd[n, k] = M[2n + 1, 2k + 1]`` and ``off_max = max |M[2n, 2k + 1]|``.
    :raises DimensionMismatchError: If the dimension is odd.
    """
    if m.n % 2:
        raise DimensionMismatchError(
            f"parity split needs an even dimension, got {m.n}", operation="hankel.parity_split"
        )

    a = m.entries
    even = SymMatrix(a[0::2, 0::2])
    odd = SymMatrix(a[1::2, 1::2])
    off_max = float(np.max(np.abs(a[0::2, 1::2])))
    return even, odd, off_max


def parity_check(size: int, solver: SolverSettings = SolverSettings()) -> ParityReport:
    """
    Runs the full parity decomposition of ``hankel_section(2N)``: the vanishing cross blocks, the
    two compression identities, and the block-spectrum identity against
    ``(1/pi) H_1/2`` and ``-(1/pi) H_-1/2``.

    :param size: N, the size of each block.
    """
    section = hankel_section(2 * size)
    even, odd, off_max = parity_split(section)

    even_ref = hilbert_alt(0.5, size).scaled(1.0 / math.pi)
    odd_ref = hilbert_alt(-0.5, size).scaled(-1.0 / math.pi)
    even_deviation = (even - even_ref).max_abs()
    odd_deviation = (odd - odd_ref).max_abs()

    full = solver.decompose(section).eigenvalues
    plus = solver.decompose(hilbert_shifted(0.5, size).scaled(1.0 / math.pi)).eigenvalues
    minus = solver.decompose(hilbert_shifted(-0.5, size).scaled(-1.0 / math.pi)).eigenvalues
    union = np.sort(np.concatenate([plus, minus]))
    mismatch = float(np.max(np.abs(full - union)))

    logger.debug(
        f"Parity check N={size}: off_max={off_max}, even={even_deviation:.3e}, "
        f"odd={odd_deviation:.3e}, spectrum={mismatch:.3e}"
    )
    return ParityReport(
        size=size,
        off_max=off_max,
        even_deviation=even_deviation,
        odd_deviation=odd_deviation,
        spectrum_mismatch=mismatch,
    )
