"""
Finite-section spectral diagnostics: spectral measures, interval filling, atom decay and cyclic
vector rank. None of these certify anything about the infinite operators; they are consistency
probes.
"""
from __future__ import annotations

import logging
from functools import partial
from typing import Callable, Sequence

import numpy as np

from kreinhankel.eigensolve import SolverSettings
from kreinhankel.errors import DimensionMismatchError, InvalidArgumentError
from kreinhankel.structs import (
    AcDecayReport,
    EigenDecomposition,
    FillReport,
    FillScan,
    SpectralMeasure,
    SymMatrix,
)
from kreinhankel.utils import run_parallel

logger = logging.getLogger(__name__)

__all__ = (
    "KRYLOV_TOL",
    "spectral_measure",
    "fill_metrics",
    "fill_scan",
    "ac_decay_probe",
    "krylov_rank",
)

#: Relative tolerance below which a new Krylov direction counts as dependent.
KRYLOV_TOL = 1e-10

SectionBuilder = Callable[[int], SymMatrix]


def spectral_measure(dec: EigenDecomposition, f: np.ndarray) -> SpectralMeasure:
    """
    Computes the spectral measure of ``f``: an atom of weight ``<v_i, f>^2`` at every eigenvalue.

    :raises DimensionMismatchError: If ``f`` does not match the decomposition.
    :raises InvalidArgumentError: If ``f`` is the zero vector.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (dec.n,):
        raise DimensionMismatchError(
            f"vector has shape {f.shape}, decomposition has size {dec.n}",
            operation="spectra.spectral_measure",
        )

    norm_sq = float(f @ f)
    if norm_sq == 0.0:
        raise InvalidArgumentError("the zero vector has no spectral measure", operation="spectra.spectral_measure")

    weights = (dec.eigenvectors.T @ f) ** 2
    return SpectralMeasure(
        locations=dec.eigenvalues,
        weights=weights,
        total_mass=float(np.sum(weights)),
        norm_sq=norm_sq,
    )


def _fill(values: np.ndarray, a: float, b: float, size=None) -> FillReport:
    inside = values[(values > a) & (values < b)]
    points = np.concatenate([[a], np.sort(inside), [b]])
    return FillReport(
        a=a,
        b=b,
        min_eig=float(np.min(values)),
        max_eig=float(np.max(values)),
        max_gap=float(np.max(np.diff(points))),
        count_outside=int(values.shape[0] - inside.shape[0]),
        size=size,
    )


def fill_metrics(dec: EigenDecomposition, a: float, b: float) -> FillReport:
    """
    Measures how a finite spectrum fills ``(a, b)``.

    :return: A :class:`.FillReport`. ``max_gap`` is taken over ``{a}``, the eigenvalues strictly
             inside the interval, and ``{b}``; ``count_outside`` counts the rest.
    """
    if not a < b:
        raise InvalidArgumentError(f"need a < b, got ({a}, {b})", operation="spectra.fill_metrics")

    return _fill(dec.eigenvalues, a, b, size=dec.n)


def _fill_job(builder: SectionBuilder, a: float, b: float, solver: SolverSettings, size: int):
    return fill_metrics(solver.decompose(builder(size)), a, b)


def fill_scan(
    builder: SectionBuilder,
    sizes: Sequence[int],
    a: float,
    b: float,
    *,
    solver: SolverSettings = SolverSettings(),
    jobs: int = 1,
) -> FillScan:
    """
    Runs :func:`.fill_metrics` over growing sections of one operator.
    """
    if not a < b:
        raise InvalidArgumentError(f"need a < b, got ({a}, {b})", operation="spectra.fill_scan")

    reports = run_parallel(partial(_fill_job, builder, a, b, solver), list(sizes), jobs=jobs)
    scan = FillScan(operator=_label(builder), reports=reports)
    if not scan.gaps_nonincreasing():
        logger.warning(f"Largest gap of {scan.operator} grew along sizes {list(sizes)}")

    return scan


def _label(builder: SectionBuilder) -> str:
    return str(getattr(builder, "label", getattr(builder, "__name__", type(builder).__name__)))


def _max_atom_job(builder: SectionBuilder, probe: int, solver: SolverSettings, size: int) -> float:
    dec = solver.decompose(builder(size))
    e = np.zeros(dec.n)
    e[probe] = 1.0
    atom = spectral_measure(dec, e).max_atom
    logger.debug(f"Largest atom of e_{probe} at N={size}: {atom:.6e}")
    return atom


def ac_decay_probe(
    builder: SectionBuilder,
    sizes: Sequence[int],
    probe: int = 0,
    *,
    solver: SolverSettings = SolverSettings(),
    jobs: int = 1,
) -> AcDecayReport:
    """
    Tracks the largest atom of the spectral measure of the basis vector ``e_probe`` as the section
    grows. An eigenvalue of the limit operator that ``e_probe`` sees would keep an atom of fixed
    weight; absolutely continuous spectrum spreads the mass and the atoms decay.

    :param builder: Maps a size N to the N x N section.
    :param sizes: At least 3 strictly increasing sizes.
    :param probe: The basis index of the probe vector.
    :param jobs: Sizes are independent and may be diagonalized concurrently.
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) < 3:
        raise InvalidArgumentError(f"need at least 3 sizes, got {sizes}", operation="spectra.ac_decay_probe")

    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise InvalidArgumentError(f"sizes must be strictly increasing, got {sizes}", operation="spectra.ac_decay_probe")

    if not 0 <= probe < sizes[0]:
        raise InvalidArgumentError(
            f"probe index {probe} is outside the smallest section {sizes[0]}",
            operation="spectra.ac_decay_probe",
        )

    atoms = run_parallel(partial(_max_atom_job, builder, probe, solver), sizes, jobs=jobs)
    ratios = [b / a for a, b in zip(atoms, atoms[1:])]
    report = AcDecayReport(
        operator=_label(builder),
        probe=probe,
        sizes=sizes,
        max_atom=atoms,
        decay_ratios=ratios,
    )

    if not report.consistent_with_ac:
        logger.warning(f"Largest atom of {report.operator} does not decay: ratios {ratios}")

    return report


def krylov_rank(m: SymMatrix, v: np.ndarray, tol: float = KRYLOV_TOL) -> int:
    """
    The numerical dimension of the Krylov space ``span{v, Mv, ..., M^(n-1) v}``.

    Directions are generated Arnoldi style from the last orthonormal basis vector and
    re-orthogonalised twice against the whole basis. A direction counts as new if what survives is
    larger than ``tol`` times the norm of the raw column. A rank of ``n`` certifies that ``v`` is
    cyclic, so the section has simple spectrum.

    :raises InvalidArgumentError: If ``v`` is the zero vector.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (m.n,):
        raise DimensionMismatchError(
            f"vector has shape {v.shape}, matrix is {m.n}x{m.n}", operation="spectra.krylov_rank"
        )

    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise InvalidArgumentError("the zero vector spans nothing", operation="spectra.krylov_rank")

    basis = np.zeros((m.n, m.n))
    basis[:, 0] = v / norm
    rank = 1
    while rank < m.n:
        w = m.matvec(basis[:, rank - 1])
        scale = float(np.linalg.norm(w))
        if scale == 0.0:
            break

        q = basis[:, :rank]
        for _ in range(2):
            w = w - q @ (q.T @ w)

        remaining = float(np.linalg.norm(w))
        if remaining <= tol * scale:
            break

        basis[:, rank] = w / remaining
        rank += 1

    return rank
