"""Single-qubit states: Bloch conversions, pseudopure preparation,
maximum-entropy reconstruction from partial Pauli data, and distance
metrics.

Pole convention throughout the package: |0> sits at Bloch z = +1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances
from .numkit import eig_hermitian

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class StateError(ValueError):
    pass


def bloch_to_density(r) -> np.ndarray:
    """rho = (I + r.sigma)/2.  Vectors within tolerance of the unit sphere
    are radially clamped onto it."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise StateError("Bloch vector must have three components")
    norm = np.linalg.norm(r)
    tol = tolerances.get("bloch_ball")
    if norm > 1 + tol:
        raise StateError(f"Bloch vector norm {norm} exceeds 1")
    if norm > 1:
        r = r / norm
    return (IDENTITY_2 + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z) / 2


def density_to_bloch(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(rho @ s).real for s in PAULIS])


def validate_density(rho, name: str = "state") -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise StateError(f"{name} must be 2x2")
    if np.linalg.norm(rho - rho.conj().T) > 1e-9:
        raise StateError(f"{name} is not Hermitian")
    if abs(np.trace(rho) - 1) > 1e-9:
        raise StateError(f"{name} trace is not 1")
    if eig_hermitian(rho).eigenvalues[0] < -1e-9:
        raise StateError(f"{name} has a negative eigenvalue")
    return rho


def make_pseudopure(alpha: float, psi) -> np.ndarray:
    """(1 - alpha)/2 * I + alpha |psi><psi| for a single qubit."""
    if not 0 <= alpha <= 1:
        raise StateError("polarization must lie in [0, 1]")
    psi = np.asarray(psi, dtype=complex).reshape(2)
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > 1e-9:
        raise StateError("psi must be normalized")
    return (1 - alpha) / 2 * IDENTITY_2 + alpha * np.outer(psi, psi.conj())


@dataclass(frozen=True)
class PauliExpectations:
    """Measured Pauli expectation values; None marks an unmeasured axis."""

    sx: float | None = None
    sy: float | None = None
    sz: float | None = None

    def __post_init__(self):
        for name, v in (("sx", self.sx), ("sy", self.sy), ("sz", self.sz)):
            if v is not None and not -1 <= v <= 1:
                raise StateError(f"{name} = {v} outside [-1, 1]")

    def as_tuple(self) -> tuple[float | None, float | None, float | None]:
        return (self.sx, self.sy, self.sz)


def maxent_reconstruct(e: PauliExpectations) -> np.ndarray:
    """Closest physical state matching the measured expectations, with
    maximal entropy.

    Unmeasured Bloch components are zero (no constraint -> entropy
    maximization drops them); if the measured components alone leave the
    Bloch ball, they are scaled radially onto the unit sphere.
    """
    r = np.array([v if v is not None else 0.0 for v in e.as_tuple()])
    norm = np.linalg.norm(r)
    if norm > 1:
        r = r / norm
    return bloch_to_density(r)


def expectations_of(rho) -> PauliExpectations:
    r = density_to_bloch(rho)
    return PauliExpectations(sx=float(r[0]), sy=float(r[1]), sz=float(r[2]))


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    res = eig_hermitian(m)
    w = np.clip(res.eigenvalues, 0.0, None)
    v = res.eigenvectors
    return (v * np.sqrt(w)) @ v.conj().T


def trace_distance(rho1, rho2) -> float:
    """D = (1/2) tr sqrt((rho1-rho2)^dag (rho1-rho2))."""
    x = np.asarray(rho1, dtype=complex) - np.asarray(rho2, dtype=complex)
    sv = np.linalg.svd(x, compute_uv=False)
    return float(np.sum(sv) / 2)


def fidelity(rho1, rho2) -> float:
    """F = (tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2, clamped to [0, 1]."""
    s1 = _psd_sqrt(np.asarray(rho1, dtype=complex))
    inner = s1 @ np.asarray(rho2, dtype=complex) @ s1
    inner = (inner + inner.conj().T) / 2
    w = np.clip(eig_hermitian(inner).eigenvalues, 0.0, None)
    f = float(np.sum(np.sqrt(w)) ** 2)
    return min(max(f, 0.0), 1.0)


def bures(rho1, rho2) -> float:
    return float(np.sqrt(max(0.0, 2 - 2 * np.sqrt(fidelity(rho1, rho2)))))


def c_metric(rho1, rho2) -> float:
    return float(np.sqrt(max(0.0, 1 - fidelity(rho1, rho2))))
