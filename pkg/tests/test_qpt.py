import numpy as np
import pytest

from nvqpt import qpt
from nvqpt.qpt import (
    AffineMap,
    NotCompletelyPositive,
    ProcessError,
    affine_to_chi,
    apply_chi,
    build_beta,
    chi_from_outputs,
    chi_to_affine,
    chi_to_choi,
    ellipsoid_samples,
    fibonacci_sphere,
    input_states,
    jamiolkowski_state,
    kraus_from_chi,
    lambda_from_outputs,
    matrix_unit_images,
    matrix_units,
    tp_defect,
    tp_sum,
    unphysicality_norms,
)
from nvqpt.qstate import IDENTITY_2, SIGMA_X, SIGMA_Z

CHI_IDENTITY = np.outer([1, 0, 0, 1], [1, 0, 0, 1]).astype(complex)


def kraus_channel(kraus):
    def channel(rho):
        return sum(e @ rho @ e.conj().T for e in kraus)

    return channel


def chi_of_kraus(kraus):
    return chi_from_outputs([kraus_channel(kraus)(s) for s in input_states()])


def dephasing_kraus(p):
    return [np.sqrt(1 - p) * IDENTITY_2, np.sqrt(p) * SIGMA_Z]


def amplitude_damping_kraus(gamma):
    e0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    e1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return [e0, e1]


def random_channel_kraus(rng):
    """Random CPTP channel from a Haar-ish 4x2 isometry."""
    g = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    q, _ = np.linalg.qr(g)
    return [q[0:2, :], q[2:4, :]]


class TestBases:
    def test_matrix_units_order(self):
        units = matrix_units()
        assert np.array_equal(units[0], [[1, 0], [0, 0]])
        assert np.array_equal(units[1], [[0, 1], [0, 0]])
        assert np.array_equal(units[2], [[0, 0], [1, 0]])
        assert np.array_equal(units[3], [[0, 0], [0, 1]])

    def test_input_states(self):
        s = input_states()
        assert np.allclose(s[0], [[1, 0], [0, 0]])
        assert np.allclose(s[1], [[0, 0], [0, 1]])
        assert np.allclose(s[2], np.ones((2, 2)) / 2)
        assert np.allclose(s[3], [[0.5, -0.5j], [0.5j, 0.5]])


class TestBeta:
    def test_entry_alphabet(self):
        beta = build_beta()
        allowed = {0, 1, 0.5}
        for v in beta.flatten():
            assert round(abs(v.real), 12) in allowed
            assert round(abs(v.imag), 12) in allowed

    def test_full_rank(self):
        assert np.linalg.matrix_rank(build_beta()) == 16

    def test_dependent_basis_rejected(self):
        basis = matrix_units()
        basis[3] = basis[0]
        with pytest.raises(ProcessError):
            build_beta(basis=basis)

    def test_identity_channel_inverts(self):
        chi = chi_from_outputs(input_states())
        assert np.allclose(chi, CHI_IDENTITY, atol=1e-12)


class TestLambda:
    def test_rows_are_output_entries(self):
        outs = input_states()
        lam = lambda_from_outputs(outs)
        for j in range(4):
            assert np.allclose(lam[j], outs[j].reshape(4))

    def test_wrong_count_rejected(self):
        with pytest.raises(ProcessError):
            lambda_from_outputs(input_states()[:3])

    def test_matrix_unit_images_identity(self):
        images = matrix_unit_images(input_states())
        for got, want in zip(images, matrix_units()):
            assert np.allclose(got, want, atol=1e-12)

    def test_matrix_unit_images_linearity(self, rng):
        kraus = random_channel_kraus(rng)
        channel = kraus_channel(kraus)
        images = matrix_unit_images([channel(s) for s in input_states()])
        for got, u in zip(images, matrix_units()):
            assert np.allclose(got, channel(u), atol=1e-10)


class TestChi:
    def test_unitary_z(self):
        chi = chi_of_kraus([SIGMA_Z])
        assert np.allclose(chi, np.outer([1, 0, 0, -1], [1, 0, 0, -1]), atol=1e-12)

    def test_bit_flip(self):
        chi = chi_of_kraus([SIGMA_X])
        assert np.allclose(chi, np.outer([0, 1, 1, 0], [0, 1, 1, 0]), atol=1e-12)

    def test_apply_chi_matches_kraus(self, rng):
        kraus = random_channel_kraus(rng)
        chi = chi_of_kraus(kraus)
        channel = kraus_channel(kraus)
        for s in input_states():
            assert np.allclose(apply_chi(chi, s), channel(s), atol=1e-10)

    def test_chi_is_hermitian_psd_for_channels(self, rng):
        chi = chi_of_kraus(random_channel_kraus(rng))
        assert np.linalg.norm(chi - chi.conj().T) < 1e-10
        assert np.linalg.eigvalsh(chi).min() > -1e-10


class TestKraus:
    def test_round_trip(self, rng):
        chi = chi_of_kraus(random_channel_kraus(rng))
        ks = kraus_from_chi(chi)
        for s in input_states():
            assert np.allclose(ks.apply(s), apply_chi(chi, s), atol=1e-9)
        assert ks.completeness_defect() < 1e-9

    def test_pure_channel_single_operator(self):
        ks = kraus_from_chi(CHI_IDENTITY)
        assert len(ks.operators) == 1
        assert np.allclose(np.abs(ks.operators[0]), np.eye(2))

    def test_unphysical_rejected(self):
        chi = CHI_IDENTITY.copy()
        chi[1, 1] = -0.2
        with pytest.raises(NotCompletelyPositive):
            kraus_from_chi(chi)


class TestAffine:
    def test_first_row_enforced(self):
        m = np.eye(4)
        m[0, 1] = 0.1
        with pytest.raises(ProcessError):
            AffineMap(m)

    def test_identity_channel(self):
        aff = chi_to_affine(CHI_IDENTITY)
        assert np.allclose(aff.matrix, np.eye(4), atol=1e-12)

    def test_dephasing_closed_form(self):
        p = 0.3
        chi = chi_of_kraus(dephasing_kraus(p))
        aff = chi_to_affine(chi)
        assert np.allclose(aff.linear, np.diag([1 - 2 * p, 1 - 2 * p, 1.0]), atol=1e-10)
        assert np.allclose(aff.translation, 0, atol=1e-10)

    def test_amplitude_damping_closed_form(self):
        g = 0.25
        chi = chi_of_kraus(amplitude_damping_kraus(g))
        aff = chi_to_affine(chi)
        s = np.sqrt(1 - g)
        assert np.allclose(aff.linear, np.diag([s, s, 1 - g]), atol=1e-10)
        assert np.allclose(aff.translation, [0, 0, g], atol=1e-10)

    def test_affine_round_trip(self, rng):
        chi = chi_of_kraus(random_channel_kraus(rng))
        aff = chi_to_affine(chi)
        assert np.allclose(affine_to_chi(aff), chi, atol=1e-9)

    def test_apply(self):
        aff = AffineMap.from_parts(np.diag([0.5, 0.5, 0.5]), [0, 0, 0.5])
        assert np.allclose(aff.apply([0, 0, 1]), [0, 0, 1.0])
        assert np.allclose(aff.apply([0, 0, -1]), [0, 0, 0.0])


class TestChoi:
    def test_choi_equals_chi_in_normal_basis(self, rng):
        chi = chi_of_kraus(random_channel_kraus(rng))
        assert np.allclose(chi_to_choi(chi), chi, atol=1e-10)

    def test_jamiolkowski_is_a_state(self, rng):
        rho = jamiolkowski_state(chi_of_kraus(random_channel_kraus(rng)))
        assert np.isclose(np.trace(rho).real, 1.0, atol=1e-10)
        assert np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() > -1e-10


class TestTracePreservation:
    def test_tp_sum_identity_for_channel(self, rng):
        chi = chi_of_kraus(random_channel_kraus(rng))
        assert np.allclose(tp_sum(chi), np.eye(2), atol=1e-10)
        assert tp_defect(chi) < 1e-10

    def test_tp_sum_matches_definition(self, rng):
        chi = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        units = matrix_units()
        direct = sum(
            chi[m, n] * units[n].conj().T @ units[m]
            for m in range(4)
            for n in range(4)
        )
        assert np.allclose(tp_sum(chi), direct, atol=1e-12)

    def test_defect_detects_leakage(self):
        assert tp_defect(0.9 * CHI_IDENTITY) > 0.1


class TestNorms:
    def test_diagonal_closed_form(self):
        chi = np.diag([0.3, 0.0, 0.0, -0.4]).astype(complex)
        norms = unphysicality_norms(chi, np.zeros((4, 4)))
        assert np.isclose(norms["p1"], 0.4)
        assert np.isclose(norms["p2"], 0.4)
        assert np.isclose(norms["fro"], 0.5)
        assert np.isclose(norms["d_pro"], 0.35)

    def test_zero_for_equal(self, rng):
        chi = chi_of_kraus(random_channel_kraus(rng))
        norms = unphysicality_norms(chi, chi)
        assert all(v == 0 for v in norms.values())

    def test_norm_ordering(self, rng):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        norms = unphysicality_norms(a, np.zeros((4, 4)))
        # spectral <= Frobenius <= Schatten-1 = 2 * d_pro
        assert norms["p2"] <= norms["fro"] + 1e-12
        assert norms["fro"] <= 2 * norms["d_pro"] + 1e-12


class TestEllipsoid:
    def test_sphere_points_on_unit_sphere(self):
        pts = fibonacci_sphere(200)
        assert pts.shape == (200, 3)
        assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)

    def test_sphere_deterministic(self):
        assert np.array_equal(fibonacci_sphere(50), fibonacci_sphere(50))

    def test_sphere_rejects_zero(self):
        with pytest.raises(ProcessError):
            fibonacci_sphere(0)

    def test_identity_map_no_violations(self):
        aff = AffineMap(np.eye(4))
        _, outs, violation = ellipsoid_samples(aff, 100)
        assert not violation.any()
        assert np.allclose(np.linalg.norm(outs, axis=1), 1.0, atol=1e-12)

    def test_translation_flags_protrusion(self):
        aff = AffineMap.from_parts(np.eye(3), [0, 0, 0.2])
        _, outs, violation = ellipsoid_samples(aff, 100)
        assert violation.any()
        assert not violation.all()
        assert np.array_equal(violation, np.linalg.norm(outs, axis=1) > 1 + 1e-9)
