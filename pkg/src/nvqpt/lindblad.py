"""Markovian process tomography in Liouville space.

Density matrices are column-stacked into 4-vectors; channels and
generators become 4x4 superoperators.  The relaxation generator is
estimated from propagators at a doubling time schedule (matrix-log and
symmetric-BCH/Richardson routes), projected onto the positive GKS form,
refined by a simplex fit, and finally diagonalized into Lindblad
operators with relative contributions.

Units: time in ns, rates in 1/ns, Hamiltonians in rad/ns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qpt
from .numkit import (
    SimplexOptions,
    cholesky_lower,
    eig_hermitian,
    matrix_exp,
    matrix_log_principal,
    nelder_mead,
    richardson_derivative,
)
from .qstate import PAULIS, PauliExpectations, density_to_bloch

# Trace-orthonormal traceless basis: F_alpha = sigma_alpha / sqrt(2).
F_BASIS = tuple(s / np.sqrt(2) for s in PAULIS)

# Spin-1 operators for the NV ground-state triplet, basis (m=+1, 0, -1).
_SZ1 = np.diag([1.0, 0.0, -1.0]).astype(complex)


class LindbladError(ValueError):
    pass


def vectorize(rho) -> np.ndarray:
    """Column-stack a 2x2 matrix; |0><0| -> (1,0,0,0)^T."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise LindbladError("expected a 2x2 matrix")
    return rho.reshape(4, order="F")


def devectorize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape != (4,):
        raise LindbladError("expected a 4-vector")
    return v.reshape(2, 2, order="F")


def superop_from_action(action) -> np.ndarray:
    """Assemble a superoperator column-by-column from its action on the
    matrices behind each vectorized basis vector."""
    cols = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1.0
        cols.append(vectorize(action(devectorize(e))))
    return np.column_stack(cols)


@dataclass(frozen=True)
class NVParams:
    """NV ground-triplet Hamiltonian parameters (MHz, Gauss)."""

    zero_field_splitting: float = 2880.0   # D, MHz
    transverse_splitting: float = 0.0      # E, MHz (0 by axial symmetry)
    gyromagnetic: float = 2.8025           # g*beta, MHz/Gauss
    field_gauss: float = 0.0               # B_z

    def __post_init__(self):
        if self.zero_field_splitting <= 0 or self.gyromagnetic <= 0:
            raise LindbladError("D and g*beta must be positive")


def nv_hamiltonian(p: NVParams) -> tuple[np.ndarray, float]:
    """Triplet Hamiltonian g*beta*Bz*Sz + D(Sz^2 - 2/3) (MHz) and the
    |0> <-> |1> transition energy in MHz."""
    s = 1.0
    h = (
        p.gyromagnetic * p.field_gauss * _SZ1
        + p.zero_field_splitting * (_SZ1 @ _SZ1 - s * (s + 1) / 3 * np.eye(3))
    )
    delta_e = p.zero_field_splitting + p.gyromagnetic * p.field_gauss
    return h, float(delta_e)


def detuning_hamiltonian(delta: float) -> np.ndarray:
    """Rotating-frame qubit Hamiltonian (delta/2) sigma_z, rad/ns."""
    return delta / 2 * PAULIS[2]


def hamiltonian_superop(h) -> np.ndarray:
    """Commutator superoperator: devec(H_hat vec(rho)) = H rho - rho H."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (2, 2) or np.linalg.norm(h - h.conj().T) > 1e-9:
        raise LindbladError("Hamiltonian must be 2x2 Hermitian")
    return superop_from_action(lambda m: h @ m - m @ h)


@dataclass(frozen=True)
class TimeSchedule:
    """Doubling schedule t_m = 2^m t1, m = 0..count-1 (ns)."""

    t1: float
    count: int = 3

    def __post_init__(self):
        if self.t1 <= 0:
            raise LindbladError("t1 must be positive")
        if self.count < 1:
            raise LindbladError("count must be at least 1")

    def times(self) -> list[float]:
        return [self.t1 * 2**m for m in range(self.count)]

    @classmethod
    def from_times(cls, times) -> "TimeSchedule":
        times = [float(t) for t in times]
        if len(times) < 1 or times[0] <= 0:
            raise LindbladError("need positive, strictly doubling times")
        for a, b in zip(times, times[1:]):
            if abs(b - 2 * a) > 1e-9 * max(1.0, abs(b)):
                raise LindbladError(f"times {times} are not strictly doubling")
        return cls(t1=times[0], count=len(times))


def propagator_from_outputs(outputs: list[np.ndarray]) -> np.ndarray:
    """Superpropagator whose columns are the vectorized images of the
    matrix units, recovered from the four measured outputs by linearity
    (inputs ordered as qpt.input_states())."""
    images = qpt.matrix_unit_images(outputs)
    # column k acts on devectorize(e_k): E00, E10, E01, E11
    order = [0, 2, 1, 3]
    return np.column_stack([vectorize(images[k]) for k in order])


def propagator_from_superop(generator: np.ndarray, t: float) -> np.ndarray:
    return matrix_exp(-generator * t)


def generator_log_estimate(prop: np.ndarray, h_super: np.ndarray, t: float) -> np.ndarray:
    """R_hat = -i H_hat - log(P_hat)/t (principal branch)."""
    return -1j * np.asarray(h_super, complex) - matrix_log_principal(prop) / t


def generator_bch_estimate(
    props: list[np.ndarray], h_super: np.ndarray, schedule: TimeSchedule
) -> np.ndarray:
    """Richardson estimate of R_hat via the symmetric BCH identity.

    F(t_m) = exp(i t_m H/2) P_m exp(i t_m H/2) equals exp(-t_m R) up to
    O(t^3); the derivative of F at 0 is extrapolated from the doubling
    schedule and negated."""
    if schedule.count != 3 or len(props) != 3:
        raise LindbladError("need propagators at exactly three doubling times")
    h_super = np.asarray(h_super, dtype=complex)
    samples = []
    for p, t in zip(props, schedule.times()):
        half = matrix_exp(1j * t / 2 * h_super)
        samples.append(half @ np.asarray(p, complex) @ half)
    dfdt = richardson_derivative(samples, np.eye(4, dtype=complex), schedule.t1)
    return -dfdt


# GKS parameterization: a = X^dag X over the F basis, X lower triangular.
# (row, col) -> (real index, imag index or None), 0-based into x(1..9).
_X_LAYOUT: dict[tuple[int, int], tuple[int, int | None]] = {
    (0, 0): (0, None),
    (1, 1): (1, None),
    (2, 2): (2, None),
    (1, 0): (3, 4),
    (2, 1): (5, 6),
    (2, 0): (7, 8),
}

_REVERSE3 = np.arange(2, -1, -1)


def gks_cholesky_factor(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (9,):
        raise LindbladError("expected 9 real parameters")
    m = np.zeros((3, 3), dtype=complex)
    for (i, j), (re, im) in _X_LAYOUT.items():
        m[i, j] = x[re] + (1j * x[im] if im is not None else 0.0)
    return m


def gks_matrix(x: np.ndarray) -> np.ndarray:
    """a = X^dag X: positive semidefinite by construction."""
    m = gks_cholesky_factor(x)
    return m.conj().T @ m


def gks_params_from_matrix(a: np.ndarray) -> np.ndarray:
    """Factor a PSD GKS matrix back into the 9 parameters (X^dag X form
    via the index-reversed Cholesky)."""
    a = np.asarray(a, dtype=complex)
    flipped = a[np.ix_(_REVERSE3, _REVERSE3)]
    low = cholesky_lower(flipped)
    xm = low.conj().T[np.ix_(_REVERSE3, _REVERSE3)]
    out = np.zeros(9)
    for (i, j), (re, im) in _X_LAYOUT.items():
        out[re] = xm[i, j].real
        if im is not None:
            out[im] = xm[i, j].imag
    return out


def _dissipator_tensor() -> np.ndarray:
    """K[a, b] = superoperator of the elementary GKS term
    rho -> (1/2)([F_a rho, F_b] + [F_a, rho F_b])."""
    k = np.zeros((3, 3, 4, 4), dtype=complex)
    for al in range(3):
        for be in range(3):
            fa, fb = F_BASIS[al], F_BASIS[be]
            k[al, be] = superop_from_action(
                lambda rho, fa=fa, fb=fb: (
                    2 * fa @ rho @ fb - fb @ fa @ rho - rho @ fb @ fa
                ) / 2
            )
    return k


_DISSIPATOR_TENSOR = _dissipator_tensor()


def dissipator_superop(a: np.ndarray) -> np.ndarray:
    """Relaxation superoperator R_hat for a GKS matrix a over the F basis.

    -R_hat acts as rho -> (1/2) sum a_ab ([F_a rho, F_b] + [F_a, rho F_b]);
    the trace row of R_hat vanishes, so exp(-R_hat t) preserves trace."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (3, 3) or np.linalg.norm(a - a.conj().T) > 1e-9:
        raise LindbladError("GKS matrix must be 3x3 Hermitian")
    return -np.einsum("ab,abij->ij", a, _DISSIPATOR_TENSOR)


def gks_start_from_generator(r_estimate: np.ndarray) -> np.ndarray:
    """Project an unconstrained generator estimate onto GKS parameters.

    The linear map from the 9 real Hermitian components of a to
    superoperators is inverted in least squares; the recovered a is
    clipped to PSD and Cholesky-factored into x."""
    r_estimate = np.asarray(r_estimate, dtype=complex)
    basis = []
    for idx in range(9):
        comp = np.zeros(9)
        comp[idx] = 1.0
        basis.append(dissipator_superop(_hermitian_from_components(comp)))
    m = np.column_stack([
        np.concatenate([b.reshape(16).real, b.reshape(16).imag]) for b in basis
    ])
    rhs = np.concatenate([r_estimate.reshape(16).real, r_estimate.reshape(16).imag])
    comps, *_ = np.linalg.lstsq(m, rhs, rcond=None)
    a = _hermitian_from_components(comps)
    res = eig_hermitian(a)
    w = np.clip(res.eigenvalues, 0.0, None)
    a_psd = (res.eigenvectors * w) @ res.eigenvectors.conj().T
    return gks_params_from_matrix(a_psd)


def _hermitian_from_components(c: np.ndarray) -> np.ndarray:
    """3x3 Hermitian matrix from 9 reals: diagonal, then Re/Im of the
    (1,0), (2,1), (2,0) entries."""
    a = np.zeros((3, 3), dtype=complex)
    a[0, 0], a[1, 1], a[2, 2] = c[0], c[1], c[2]
    a[1, 0] = c[3] + 1j * c[4]
    a[2, 1] = c[5] + 1j * c[6]
    a[2, 0] = c[7] + 1j * c[8]
    a[0, 1], a[1, 2], a[0, 2] = np.conj(a[1, 0]), np.conj(a[2, 1]), np.conj(a[2, 0])
    return a


@dataclass(frozen=True)
class GeneratorFit:
    gks: np.ndarray            # fitted PSD GKS matrix
    relaxation: np.ndarray     # fitted R_hat superoperator
    residual: float
    start_params: np.ndarray
    evaluations: int


def fit_objective(x: np.ndarray, props, h_super, schedule: TimeSchedule) -> float:
    r_hat = dissipator_superop(gks_matrix(x))
    gen = 1j * np.asarray(h_super, complex) + r_hat
    # one eigendecomposition serves every schedule time
    w, v = np.linalg.eig(gen)
    use_eig = np.isfinite(np.linalg.cond(v)) and np.linalg.cond(v) < 1e8
    vinv = np.linalg.inv(v) if use_eig else None
    total = 0.0
    for p, t in zip(props, schedule.times()):
        expo = (v * np.exp(-w * t)) @ vinv if use_eig else matrix_exp(-gen * t)
        diff = expo - np.asarray(p, complex)
        total += float(np.sum(np.abs(diff) ** 2))
    return total


def fit_generator(
    props: list[np.ndarray],
    h_super: np.ndarray,
    schedule: TimeSchedule,
    x0: np.ndarray,
    opts: SimplexOptions | None = None,
) -> GeneratorFit:
    """Constrained fit of the GKS parameters to measured propagators."""
    if len(props) != schedule.count:
        raise LindbladError("propagator count does not match schedule")
    if opts is None:
        opts = SimplexOptions(ftol=1e-12, xtol=1e-9)
    x0 = np.asarray(x0, dtype=float)
    x_best, residual, evals = nelder_mead(
        lambda x: fit_objective(x, props, h_super, schedule), x0, opts
    )
    a = gks_matrix(x_best)
    return GeneratorFit(
        gks=a,
        relaxation=dissipator_superop(a),
        residual=residual,
        start_params=x0,
        evaluations=evals,
    )


@dataclass(frozen=True)
class LindbladSet:
    """Lindblad operators with relative Frobenius-weight contributions."""

    operators: list[np.ndarray]
    contributions: list[float]


def lindblads_from_gks(a: np.ndarray) -> LindbladSet:
    """Diagonalize the GKS matrix: L_i = sqrt(d_i) sum_j U_ji F_j, dropping
    negligible eigenvalues; contributions are |L_i|_Fro^2 normalized."""
    res = eig_hermitian(a)
    if res.eigenvalues[0] < -1e-9:
        raise LindbladError(
            f"GKS matrix has negative eigenvalue {res.eigenvalues[0]:.3g}"
        )
    dmax = max(res.eigenvalues[-1], 0.0)
    ops = []
    weights = []
    for i in range(2, -1, -1):  # descending eigenvalue order
        d = max(res.eigenvalues[i], 0.0)
        if d < 1e-12 * dmax or d == 0.0:
            continue
        op = sum(res.eigenvectors[j, i] * F_BASIS[j] for j in range(3))
        ops.append(np.sqrt(d) * op)
        weights.append(float(np.linalg.norm(ops[-1]) ** 2))
    total = sum(weights)
    if total == 0:
        return LindbladSet(operators=[], contributions=[])
    return LindbladSet(operators=ops, contributions=[w / total for w in weights])


def contributions_from_operators(operators) -> list[float]:
    """Relative contribution |L_i|_Fro^2 / sum_j |L_j|_Fro^2."""
    weights = [float(np.linalg.norm(np.asarray(op)) ** 2) for op in operators]
    total = sum(weights)
    return [w / total for w in weights]


def predict_expectations(
    r_hat: np.ndarray, h_super: np.ndarray, rho0, times
) -> list[PauliExpectations]:
    """Evolve a state under exp(-(iH_hat + R_hat)t) and read out Pauli
    expectations at each requested time."""
    gen = 1j * np.asarray(h_super, complex) + np.asarray(r_hat, complex)
    v0 = vectorize(np.asarray(rho0, dtype=complex))
    out = []
    for t in times:
        rho = devectorize(matrix_exp(-gen * float(t)) @ v0)
        rho = (rho + rho.conj().T) / 2
        r = np.clip(density_to_bloch(rho), -1.0, 1.0)
        out.append(PauliExpectations(sx=float(r[0]), sy=float(r[1]), sz=float(r[2])))
    return out
