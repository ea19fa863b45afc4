"""Repair of an experimental chi matrix to the nearest completely
positive, trace-preserving process.

The repaired matrix is parameterized as chi~ = T(t)^dag T(t) with T a
complex lower-triangular matrix over 16 real parameters, so positivity is
structural.  The deviation from the measured chi plus a Lagrange penalty
on the trace-preservation defect is minimized by Nelder-Mead, starting
from the eigenvalue-clipped input factored through a Cholesky
decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qpt, tolerances
from .numkit import (
    NotPositiveSemidefinite,
    SimplexOptions,
    cholesky_lower,
    eig_hermitian,
    nelder_mead,
)

# (row, col) -> (real param index, imag param index or None), 0-based
# parameter indices into the length-16 vector t.
_T_LAYOUT: dict[tuple[int, int], tuple[int, int | None]] = {
    (0, 0): (0, None),
    (1, 1): (1, None),
    (2, 2): (2, None),
    (3, 3): (3, None),
    (1, 0): (4, 5),
    (2, 1): (6, 7),
    (3, 2): (8, 9),
    (2, 0): (10, 11),
    (3, 1): (12, 13),
    (3, 0): (14, 15),
}

_REVERSE = np.arange(3, -1, -1)

# flattened index arrays for fast assembly in the optimizer hot path
_T_ROWS = np.array([ij[0] for ij in _T_LAYOUT])
_T_COLS = np.array([ij[1] for ij in _T_LAYOUT])
_T_RE = np.array([v[0] for v in _T_LAYOUT.values()])
_T_IM = np.array([-1 if v[1] is None else v[1] for v in _T_LAYOUT.values()])


def params_to_matrix(t: np.ndarray) -> np.ndarray:
    """Assemble the lower-triangular T from the 16 real parameters."""
    t = np.asarray(t, dtype=float)
    if t.shape != (16,):
        raise ValueError("expected 16 real parameters")
    m = np.zeros((4, 4), dtype=complex)
    vals = t[_T_RE] + 1j * np.where(_T_IM >= 0, t[_T_IM], 0.0)
    m[_T_ROWS, _T_COLS] = vals
    return m


def matrix_to_params(t_matrix: np.ndarray) -> np.ndarray:
    t_matrix = np.asarray(t_matrix, dtype=complex)
    out = np.zeros(16)
    for (i, j), (re, im) in _T_LAYOUT.items():
        out[re] = t_matrix[i, j].real
        if im is not None:
            out[im] = t_matrix[i, j].imag
    return out


def chi_from_params(t: np.ndarray) -> np.ndarray:
    """chi~ = T^dag T: positive semidefinite for every parameter vector."""
    m = params_to_matrix(t)
    return m.conj().T @ m


def clip_negative_eigs(chi: np.ndarray) -> np.ndarray:
    """Zero out negative eigenvalues, keeping eigenvectors."""
    res = eig_hermitian(chi)
    w = np.clip(res.eigenvalues, 0.0, None)
    v = res.eigenvectors
    return (v * w) @ v.conj().T


def initial_params(chi_star: np.ndarray) -> np.ndarray:
    """Cholesky-based start point: lower-triangular T with
    T^dag T = chi_star.

    A standard Cholesky gives L L^dag; the T^dag T arrangement is obtained
    by factoring the index-reversed matrix and reversing back."""
    chi_star = np.asarray(chi_star, dtype=complex)
    flipped = chi_star[np.ix_(_REVERSE, _REVERSE)]
    try:
        low = cholesky_lower(flipped)
    except NotPositiveSemidefinite as exc:
        raise NotPositiveSemidefinite(
            f"start-point chi is not positive semidefinite: {exc}"
        ) from exc
    t_matrix = low.conj().T[np.ix_(_REVERSE, _REVERSE)]
    return matrix_to_params(t_matrix)


def deviation(t: np.ndarray, chi: np.ndarray, lagrange: float) -> float:
    """Sum |chi~(t) - chi|^2 plus lagrange * squared-Frobenius TP defect."""
    chi_t = chi_from_params(t)
    fit = float(np.sum(np.abs(chi_t - np.asarray(chi, dtype=complex)) ** 2))
    return fit + lagrange * qpt.tp_defect(chi_t) ** 2


@dataclass(frozen=True)
class ProjectionOptions:
    lagrange: float = 100.0
    simplex: SimplexOptions = field(default_factory=SimplexOptions)
    min_eigenvalue: float = -1e-9
    max_tp_defect: float = 1e-3

    def __post_init__(self):
        if self.lagrange <= 0:
            raise ValueError("lagrange multiplier must be positive")


@dataclass(frozen=True)
class ProjectionResult:
    chi_tilde: np.ndarray
    deviation: float
    evaluations: int
    chi_start: np.ndarray
    min_eigenvalue: float
    tp_defect: float
    frobenius_distance: float
    success: bool


def project_to_cp(chi: np.ndarray, opts: ProjectionOptions | None = None) -> ProjectionResult:
    """Find the nearest CPTP chi~ to a Hermitian (possibly unphysical) chi.

    Pipeline: clip negative eigenvalues -> Cholesky start point ->
    Nelder-Mead on the penalized deviation.  Physicality thresholds are
    reported, not silently ignored: `success` is False when they are
    missed.
    """
    if opts is None:
        opts = ProjectionOptions(lagrange=tolerances.get("lagrange_default"))
    chi = np.asarray(chi, dtype=complex)
    chi_star = clip_negative_eigs(chi)
    t0 = initial_params(chi_star)
    t_best, dev, evals = nelder_mead(
        lambda t: deviation(t, chi, opts.lagrange), t0, opts.simplex
    )
    chi_tilde = chi_from_params(t_best)
    min_eig = float(eig_hermitian(chi_tilde).eigenvalues[0])
    defect = qpt.tp_defect(chi_tilde)
    return ProjectionResult(
        chi_tilde=chi_tilde,
        deviation=dev,
        evaluations=evals,
        chi_start=chi_star,
        min_eigenvalue=min_eig,
        tp_defect=defect,
        frobenius_distance=float(np.linalg.norm(chi_tilde - chi)),
        success=(min_eig >= opts.min_eigenvalue and defect <= opts.max_tp_defect),
    )
