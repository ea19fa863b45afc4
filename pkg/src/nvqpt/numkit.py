"""Dense complex linear algebra and optimization kernel.

Everything here operates on small (dimension <= 16) numpy arrays and is a
pure function of its inputs.  Matrix decompositions are delegated to
numpy/scipy; the simplex optimizer and Richardson extrapolation are
implemented locally because their exact behavior (initial simplex,
restart policy, doubling schedule) is part of the package contract.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from . import tolerances


class NumkitError(ValueError):
    pass


class NotPositiveSemidefinite(NumkitError):
    pass


class PrincipalLogUndefined(NumkitError):
    pass


class ObjectiveDiverged(NumkitError):
    pass


def _as_square(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NumkitError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise NumkitError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True)
class EigResult:
    """Hermitian eigendecomposition, eigenvalues ascending."""

    eigenvalues: np.ndarray   # real, ascending
    eigenvectors: np.ndarray  # unitary, columns


def eig_hermitian(m) -> EigResult:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized as (M + M^dag)/2 before decomposing; inputs
    whose anti-Hermitian part exceeds the `hermitian_input` tolerance are
    rejected.
    """
    a = _as_square(m)
    defect = np.linalg.norm(a - a.conj().T)
    if defect > tolerances.get("hermitian_input") * max(1.0, np.linalg.norm(a)):
        raise NumkitError(f"matrix is not Hermitian (defect {defect:.3g})")
    a = (a + a.conj().T) / 2
    w, v = np.linalg.eigh(a)
    return EigResult(eigenvalues=w, eigenvectors=v)


def cholesky_lower(m) -> np.ndarray:
    """Lower-triangular L with L L^dag = M for Hermitian PSD M.

    Pivots in [-cholesky_pivot, 0] are clamped to zero so that
    rank-deficient PSD inputs factor cleanly; a pivot below the clamp
    window raises NotPositiveSemidefinite.
    """
    a = _as_square(m)
    n = a.shape[0]
    tol = tolerances.get("cholesky_pivot")
    L = np.zeros((n, n), dtype=complex)
    for j in range(n):
        d = (a[j, j] - np.vdot(L[j, :j], L[j, :j])).real
        if d < -tol:
            raise NotPositiveSemidefinite(f"pivot {d:.3g} at index {j}")
        d = max(d, 0.0)
        L[j, j] = np.sqrt(d)
        for i in range(j + 1, n):
            s = a[i, j] - L[i, :j] @ L[j, :j].conj()
            L[i, j] = s / L[j, j] if L[j, j] > 0 else 0.0
    return L


def pseudoinverse(m) -> np.ndarray:
    """Moore-Penrose pseudoinverse with relative singular-value cutoff."""
    a = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise NumkitError("matrix has non-finite entries")
    return np.linalg.pinv(a, rcond=tolerances.get("pinv_rcond"))


def matrix_exp(m) -> np.ndarray:
    """Matrix exponential: eigendecomposition route for comfortably
    diagonalizable matrices, scaling-and-squaring otherwise."""
    a = _as_square(m)
    if not np.any(a):
        return np.eye(a.shape[0], dtype=complex)
    w, v = np.linalg.eig(a)
    cond = np.linalg.cond(v)
    if np.isfinite(cond) and cond < 1e8:
        return (v * np.exp(w)) @ np.linalg.inv(v)
    return scipy.linalg.expm(a)


def matrix_log_principal(m) -> np.ndarray:
    """Principal matrix logarithm.

    Raises PrincipalLogUndefined when an eigenvalue sits on (or within
    `log_branch` of) the closed negative real axis, where the principal
    branch is ambiguous -- for propagators this means the decoherence
    time is too long for an unambiguous branch.
    """
    a = _as_square(m)
    w = np.linalg.eigvals(a)
    branch = tolerances.get("log_branch")
    for lam in w:
        if abs(lam) < branch or (lam.real < 0 and abs(lam.imag) < branch):
            raise PrincipalLogUndefined(
                "principal log undefined: eigenvalue on the negative real axis "
                "(decoherence time too long for unambiguous branch)"
            )
    out = scipy.linalg.logm(a)
    residual = np.linalg.norm(scipy.linalg.expm(out) - a)
    if residual > tolerances.get("log_roundtrip") * max(1.0, np.linalg.norm(a)):
        raise PrincipalLogUndefined(f"log round-trip residual {residual:.3g}")
    return out


@dataclass(frozen=True)
class SimplexOptions:
    ftol: float = 1e-9
    xtol: float = 1e-9
    max_evaluations: int = 40000
    restarts: int = 1

    def __post_init__(self):
        if self.ftol <= 0 or self.xtol <= 0:
            raise NumkitError("tolerances must be positive")


def _initial_simplex(x0: np.ndarray) -> np.ndarray:
    n = len(x0)
    sim = np.tile(x0, (n + 1, 1))
    for i in range(n):
        sim[i + 1, i] += max(0.05 * abs(x0[i]), 0.00025)
    return sim


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0,
    opts: SimplexOptions = SimplexOptions(),
) -> tuple[np.ndarray, float, int]:
    """Nelder-Mead simplex minimization.

    Coefficients: reflection 1, expansion 2, contraction 0.5, shrink 0.5.
    After the simplex converges the search restarts once from the best
    point with a fresh simplex and keeps the better result.  Returns
    (x_best, f_best, evaluations).
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1:
        raise NumkitError("x0 must be a 1-D real vector")
    evals = 0

    def f(x: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        val = float(objective(x))
        if not np.isfinite(val):
            raise ObjectiveDiverged(f"objective diverged at {x}")
        return val

    def run(start: np.ndarray) -> tuple[np.ndarray, float]:
        sim = _initial_simplex(start)
        fs = np.array([f(x) for x in sim])
        n = len(start)
        while evals < opts.max_evaluations:
            order = np.argsort(fs, kind="stable")
            sim, fs = sim[order], fs[order]
            if (fs[-1] - fs[0] <= opts.ftol
                    and np.max(np.abs(sim[1:] - sim[0])) <= opts.xtol):
                break
            centroid = sim[:-1].mean(axis=0)
            xr = centroid + (centroid - sim[-1])
            fr = f(xr)
            if fr < fs[0]:
                xe = centroid + 2.0 * (centroid - sim[-1])
                fe = f(xe)
                sim[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
            elif fr < fs[-2]:
                sim[-1], fs[-1] = xr, fr
            else:
                if fr < fs[-1]:  # outside contraction
                    xc = centroid + 0.5 * (centroid - sim[-1])
                else:  # inside contraction
                    xc = centroid - 0.5 * (centroid - sim[-1])
                fc = f(xc)
                if fc < min(fr, fs[-1]):
                    sim[-1], fs[-1] = xc, fc
                else:  # shrink toward best
                    for i in range(1, n + 1):
                        sim[i] = sim[0] + 0.5 * (sim[i] - sim[0])
                        fs[i] = f(sim[i])
        order = np.argsort(fs, kind="stable")
        return sim[order][0], fs[order][0]

    best_x, best_f = run(x0)
    for _ in range(opts.restarts):
        if evals >= opts.max_evaluations:
            break
        x, fv = run(best_x)
        if fv < best_f:
            best_x, best_f = x, fv
    return best_x, best_f, evals


def richardson_derivative(samples: Sequence[np.ndarray], base_value, t1: float) -> np.ndarray:
    """Derivative at 0 of a matrix function from samples at t1, 2*t1, 4*t1.

    First divided differences D0(h) = (F(h) - F(0))/h at h in
    {t1, 2t1, 4t1} are combined twice: D1(h) = 2 D0(h) - D0(2h), then
    D2 = (4 D1(t1) - D1(2t1)) / 3.  Exact for F polynomial of degree <= 3;
    truncation error O(t1^3) for analytic F.
    """
    if t1 <= 0:
        raise NumkitError("t1 must be positive")
    if len(samples) != 3:
        raise NumkitError("need exactly three samples at the doubling schedule")
    f0 = np.asarray(base_value, dtype=complex)
    fs = [np.asarray(s, dtype=complex) for s in samples]
    if any(s.shape != f0.shape for s in fs):
        raise NumkitError("sample shapes do not match the base value")
    d0 = [(fs[i] - f0) / (2**i * t1) for i in range(3)]
    d1_a = 2 * d0[0] - d0[1]
    d1_b = 2 * d0[1] - d0[2]
    return (4 * d1_a - d1_b) / 3
