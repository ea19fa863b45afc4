"""Standard single-qubit process tomography.

A process is carried as a 4x4 chi matrix over the normal operator basis
A_{2i+j+1} = |i><j|; in this basis chi coincides with the Choi matrix.
Conversions to the Bloch-affine form, Kraus operators, and the
Jamiolkowski state live here, together with the unphysicality norms used
to quantify the distance between an experimental chi and its repaired
counterpart.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tolerances
from .numkit import eig_hermitian, pseudoinverse
from .qstate import IDENTITY_2, PAULIS, bloch_to_density, density_to_bloch


class ProcessError(ValueError):
    pass


class NotCompletelyPositive(ProcessError):
    pass


def matrix_units() -> list[np.ndarray]:
    """|i><j| in row-major order: E00, E01, E10, E11."""
    units = []
    for i in range(2):
        for j in range(2):
            u = np.zeros((2, 2), dtype=complex)
            u[i, j] = 1
            units.append(u)
    return units


def normal_basis() -> list[np.ndarray]:
    return matrix_units()


_NORMAL_BASIS = tuple(matrix_units())


def input_states() -> list[np.ndarray]:
    """The canonical tomography inputs |0>, |1>, |+>, |+i> as densities."""
    kets = [
        np.array([1, 0], dtype=complex),
        np.array([0, 1], dtype=complex),
        np.array([1, 1], dtype=complex) / np.sqrt(2),
        np.array([1, 1j], dtype=complex) / np.sqrt(2),
    ]
    return [np.outer(k, k.conj()) for k in kets]


def _unit_coefficients(m: np.ndarray) -> np.ndarray:
    """Coefficients of a 2x2 matrix in the matrix-unit basis (its entries,
    row-major)."""
    return np.asarray(m, dtype=complex).reshape(4)


def build_beta(basis: list[np.ndarray] | None = None,
               states: list[np.ndarray] | None = None) -> np.ndarray:
    """16x16 tensor B with row (j,k), column (m,n) holding the coefficient
    of matrix unit k in A_m rho_j A_n^dag."""
    basis = normal_basis() if basis is None else [np.asarray(a, complex) for a in basis]
    states = input_states() if states is None else [np.asarray(s, complex) for s in states]
    gram = np.array([[np.trace(a.conj().T @ b) for b in basis] for a in basis])
    if abs(np.linalg.det(gram)) < 1e-12:
        raise ProcessError("operator basis is not linearly independent")
    beta = np.zeros((16, 16), dtype=complex)
    for j, rho in enumerate(states):
        for m, am in enumerate(basis):
            for n, an in enumerate(basis):
                beta[4 * j: 4 * j + 4, 4 * m + n] = _unit_coefficients(
                    am @ rho @ an.conj().T
                )
    return beta


def lambda_from_outputs(outputs: list[np.ndarray]) -> np.ndarray:
    """4x4 lambda matrix: row j holds the matrix-unit coefficients of the
    measured output E(rho_j), inputs ordered as input_states()."""
    if len(outputs) != 4:
        raise ProcessError("need exactly four outputs")
    return np.array([_unit_coefficients(o) for o in outputs])


def matrix_unit_images(outputs: list[np.ndarray]) -> list[np.ndarray]:
    """Images of the four matrix units under the measured channel.

    Uses linearity: E(|0><1|) = E(rho_+) + i E(rho_+i)
    - (1+i)/2 (E(rho_0) + E(rho_1)), and the conjugate identity for
    E(|1><0|).  Output order matches matrix_units()."""
    e0, e1, ep, ei = (np.asarray(o, dtype=complex) for o in outputs)
    e01 = ep + 1j * ei - (1 + 1j) / 2 * (e0 + e1)
    e10 = ep - 1j * ei - (1 - 1j) / 2 * (e0 + e1)
    return [e0, e01, e10, e1]


def chi_from_lambda(lam: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """chi = reshape(pinv(beta) . vec(lambda))."""
    lam = np.asarray(lam, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    if lam.shape != (4, 4) or beta.shape != (16, 16):
        raise ProcessError("shape mismatch between lambda and beta")
    return (pseudoinverse(beta) @ lam.reshape(16)).reshape(4, 4)


def chi_from_outputs(outputs: list[np.ndarray]) -> np.ndarray:
    return chi_from_lambda(lambda_from_outputs(outputs), build_beta())


def apply_chi(chi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """E(rho) = sum_mn chi_mn A_m rho A_n^dag."""
    chi = np.asarray(chi, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros((2, 2), dtype=complex)
    for m in range(4):
        for n in range(4):
            out += chi[m, n] * _NORMAL_BASIS[m] @ rho @ _NORMAL_BASIS[n].conj().T
    return out


@dataclass(frozen=True)
class KrausSet:
    """Kraus operators with the chi eigenvalue weights absorbed."""

    operators: list[np.ndarray] = field(default_factory=list)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros((2, 2), dtype=complex)
        for e in self.operators:
            out += e @ rho @ e.conj().T
        return out

    def completeness_defect(self) -> float:
        s = sum(e.conj().T @ e for e in self.operators)
        return float(np.linalg.norm(s - IDENTITY_2))


def kraus_from_chi(chi: np.ndarray) -> KrausSet:
    res = eig_hermitian(chi)
    if res.eigenvalues[0] < tolerances.get("kraus_eig_floor"):
        raise NotCompletelyPositive(
            f"chi has eigenvalue {res.eigenvalues[0]:.3g}: not completely "
            "positive -- repair it first (cpfit.project_to_cp)"
        )
    basis = normal_basis()
    ops = []
    dmax = max(res.eigenvalues[-1], 1.0)
    for i, d in enumerate(res.eigenvalues):
        if d < 1e-12 * dmax:
            continue
        e = sum(res.eigenvectors[j, i] * basis[j] for j in range(4))
        ops.append(np.sqrt(d) * e)
    return KrausSet(operators=ops)


@dataclass(frozen=True)
class AffineMap:
    """Bloch-space form of a trace-preserving qubit map: r -> E r + t,
    stored as the 4x4 real matrix acting on (1, rx, ry, rz)^T."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ProcessError("affine matrix must be 4x4")
        if not np.array_equal(m[0], [1.0, 0.0, 0.0, 0.0]):
            raise ProcessError("affine first row must be exactly (1, 0, 0, 0)")
        object.__setattr__(self, "matrix", m)

    @property
    def linear(self) -> np.ndarray:
        return self.matrix[1:, 1:]

    @property
    def translation(self) -> np.ndarray:
        return self.matrix[1:, 0]

    @classmethod
    def from_parts(cls, linear, translation) -> "AffineMap":
        m = np.eye(4)
        m[1:, 1:] = np.asarray(linear, dtype=float)
        m[1:, 0] = np.asarray(translation, dtype=float)
        return cls(m)

    def apply(self, r) -> np.ndarray:
        return self.linear @ np.asarray(r, dtype=float) + self.translation


def chi_to_affine(chi: np.ndarray) -> AffineMap:
    """Push the Bloch basis through the channel to read off (E | t)."""
    t = density_to_bloch(apply_chi(chi, bloch_to_density([0.0, 0.0, 0.0])))
    linear = np.zeros((3, 3))
    for j in range(3):
        r = np.zeros(3)
        r[j] = 1.0
        linear[:, j] = density_to_bloch(apply_chi(chi, bloch_to_density(r))) - t
    return AffineMap.from_parts(linear, t)


def affine_to_chi(affine: AffineMap | np.ndarray) -> np.ndarray:
    """Inverse of chi_to_affine: rebuild the channel action on matrix units
    from (E | t) and assemble the Choi/chi matrix."""
    if not isinstance(affine, AffineMap):
        affine = AffineMap(np.asarray(affine, dtype=float))
    e_id = IDENTITY_2 + sum(affine.translation[i] * PAULIS[i] for i in range(3))
    e_sigma = [
        sum(affine.linear[i, j] * PAULIS[i] for i in range(3)) for j in range(3)
    ]

    def channel(m: np.ndarray) -> np.ndarray:
        c0 = np.trace(m) / 2
        out = c0 * e_id
        for j in range(3):
            out = out + np.trace(m @ PAULIS[j]) / 2 * e_sigma[j]
        return out

    chi = np.zeros((4, 4), dtype=complex)
    for k, u in enumerate(matrix_units()):
        chi += np.kron(channel(u), u)
    return chi


def chi_to_choi(chi: np.ndarray) -> np.ndarray:
    """Choi matrix C = sum_ij E(|i><j|) (x) |i><j|.  In the normal basis
    this reproduces chi itself; computed from the channel action as an
    independent cross-check."""
    c = np.zeros((4, 4), dtype=complex)
    for u in matrix_units():
        c += np.kron(apply_chi(chi, u), u)
    return c


def jamiolkowski_state(chi: np.ndarray) -> np.ndarray:
    """Characteristic state rho_E = C / d for a qubit channel (d = 2)."""
    return chi_to_choi(chi) / 2


def tp_sum(chi: np.ndarray) -> np.ndarray:
    """sum_mn chi_mn A_n^dag A_m; equals I for trace-preserving chi.

    For the normal basis A_n^dag A_m = delta(i_n, i_m) |j_n><j_m|, so the
    sum collapses to S[a, b] = sum_i chi[2i+b, 2i+a]."""
    chi4 = np.asarray(chi, dtype=complex).reshape(2, 2, 2, 2)
    return np.einsum("ibia->ab", chi4)


def tp_defect(chi: np.ndarray) -> float:
    """Frobenius norm of sum_mn chi_mn A_n^dag A_m - I."""
    return float(np.linalg.norm(tp_sum(chi) - IDENTITY_2))


def unphysicality_norms(chi: np.ndarray, chi_tilde: np.ndarray) -> dict[str, float]:
    """Distance norms of X = chi - chi_tilde: induced 1-norm, spectral
    norm, Frobenius norm, and the process trace distance (half the
    Schatten-1 norm)."""
    x = np.asarray(chi, dtype=complex) - np.asarray(chi_tilde, dtype=complex)
    sv = np.linalg.svd(x, compute_uv=False)
    return {
        "p1": float(np.max(np.sum(np.abs(x), axis=0))),
        "p2": float(sv[0]),
        "fro": float(np.linalg.norm(x)),
        "d_pro": float(np.sum(sv) / 2),
    }


def fibonacci_sphere(n: int) -> np.ndarray:
    """n deterministic, roughly uniform points on the unit sphere."""
    if n < 1:
        raise ProcessError("need at least one sample point")
    i = np.arange(n)
    z = 1 - 2 * (i + 0.5) / n
    radius = np.sqrt(np.clip(1 - z**2, 0.0, None))
    theta = np.pi * (1 + np.sqrt(5)) * i
    return np.column_stack([radius * np.cos(theta), radius * np.sin(theta), z])


def ellipsoid_samples(affine: AffineMap, n: int):
    """Map a Fibonacci-spiral sphere sample through the affine form.

    Returns (inputs, outputs, violation) where violation flags output
    vectors leaving the Bloch ball (trace-violating protrusions)."""
    pts = fibonacci_sphere(n)
    outs = pts @ affine.linear.T + affine.translation
    violation = np.linalg.norm(outs, axis=1) > 1 + tolerances.get("bloch_ball")
    return pts, outs, violation
