import warnings

import numpy as np
import pytest

from qrepeater.measures import concurrence, fef
from qrepeater.qcore import is_density, ket, partial_trace, proj
from qrepeater.states import (
    BELL_VECTORS,
    FamilyState,
    SchmidtBranchWarning,
    adc_apply,
    adc_kraus,
    bell,
    family_state,
    nmes,
    normalize_schmidt,
    photon_loss_mix,
    photon_loss_state,
    psi_odd,
    werner,
    white_noise_mix,
)


class TestNmes:
    def test_half_is_bell(self):
        assert np.allclose(nmes(0.5), bell(0))

    def test_one_is_product(self):
        assert np.allclose(nmes(1.0), proj(ket("00")))

    def test_concurrence(self):
        assert concurrence(nmes(0.75)) == pytest.approx(2 * np.sqrt(0.75 * 0.25), abs=1e-12)

    def test_marginal_spectrum(self):
        w = np.linalg.eigvalsh(partial_trace(nmes(0.8), [2, 2], keep={0}))
        assert np.allclose(sorted(w), [0.2, 0.8])

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            nmes(1.2)
        with pytest.raises(ValueError):
            nmes(-0.1)

    def test_below_half_warns_and_builds_literally(self):
        with pytest.warns(SchmidtBranchWarning):
            rho = nmes(0.3)
        assert rho[0, 0].real == pytest.approx(0.3)


class TestNormalizeSchmidt:
    def test_swap(self):
        with pytest.warns(SchmidtBranchWarning):
            assert normalize_schmidt("a", 0.2) == (0.8, True)

    def test_no_swap(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert normalize_schmidt("a", 0.7) == (0.7, False)

    def test_product_rejected_when_disallowed(self):
        with pytest.raises(ValueError):
            normalize_schmidt("delta", 1.0, allow_one=False)


class TestFamily:
    def test_bell_at_zero_noise(self):
        assert np.allclose(family_state(0.0, 0.5), bell(0))

    def test_product_at_full_noise(self):
        assert np.allclose(family_state(1.0, 0.7), proj(ket("01")))

    def test_spectrum(self):
        assert np.allclose(np.linalg.eigvalsh(family_state(0.4, 0.6))[::-1], [0.6, 0.4, 0, 0], atol=1e-12)

    def test_rank_at_most_two(self, rng):
        for p, d in rng.uniform([0, 0.5], [1, 0.99], size=(20, 2)):
            assert np.linalg.matrix_rank(family_state(p, d), tol=1e-10) <= 2

    def test_orthogonal_components(self):
        fs = FamilyState(0.3, 0.8)
        zeta = np.sqrt(0.8) * ket("00") + np.sqrt(0.2) * ket("11")
        assert abs(ket(fs.product_vector).conj() @ zeta) == 0.0

    def test_custom_frame(self):
        rho = family_state(0.2, 0.6, product_vector="00", entangled_support=("01", "10"))
        assert rho[0, 0] == pytest.approx(0.2)
        assert rho[1, 2] == pytest.approx(0.8 * np.sqrt(0.24))

    @pytest.mark.parametrize("kw", [dict(p=-0.1, delta=0.6), dict(p=0.5, delta=1.0), dict(p=1.1, delta=0.6)])
    def test_rejects_bad_parameters(self, kw):
        with pytest.raises(ValueError):
            family_state(**kw)

    def test_rejects_non_orthogonal_product(self):
        with pytest.raises(ValueError):
            FamilyState(0.2, 0.6, product_vector="00")

    def test_concurrence_property(self):
        assert FamilyState(0.3, 0.7).concurrence == pytest.approx(2 * np.sqrt(0.21) * 0.7)


class TestBellAndWerner:
    def test_bell_orthonormal_complete(self):
        for i in range(4):
            for j in range(4):
                assert abs(BELL_VECTORS[i].conj() @ BELL_VECTORS[j]) == pytest.approx(float(i == j))
        assert np.allclose(sum(bell(i) for i in range(4)), np.eye(4))
        assert fef(bell(0)) == pytest.approx(1.0)

    def test_bell_index_checked(self):
        with pytest.raises(ValueError):
            bell(4)

    def test_werner_limits(self):
        assert np.allclose(werner(1.0), bell(3))
        assert np.allclose(werner(0.25), np.eye(4) / 4)

    def test_werner_concurrence(self):
        assert concurrence(werner(0.8161)) == pytest.approx(2 * 0.8161 - 1, abs=1e-9)

    def test_werner_range(self):
        with pytest.raises(ValueError):
            werner(1.5)


class TestAmplitudeDamping:
    def test_kraus_completeness(self):
        for p in (0.0, 0.3, 1.0):
            k0, k1 = adc_kraus(p)
            assert np.allclose(k0.conj().T @ k0 + k1.conj().T @ k1, np.eye(2))

    def test_zero_damping(self, rng):
        rho = family_state(0.3, 0.6)
        for which in (0, 1):
            assert np.allclose(adc_apply(rho, 0.0, which), rho)

    def test_full_decay(self):
        assert np.allclose(adc_apply(proj(ket("11")), 1.0, 1), proj(ket("10")))
        assert np.allclose(adc_apply(proj(ket("11")), 1.0, 0), proj(ket("01")))

    def test_bad_index(self):
        with pytest.raises(ValueError):
            adc_apply(np.eye(4) / 4, 0.5, 2)

    def test_choi_psd_and_trace_preserving(self):
        # Choi matrix of the channel on the second qubit, extended to two qubits.
        for p in (0.0, 0.37, 1.0):
            dim = 4
            choi = np.zeros((dim * dim, dim * dim), dtype=complex)
            for i in range(dim):
                for j in range(dim):
                    e = np.zeros((dim, dim), dtype=complex)
                    e[i, j] = 1
                    choi += np.kron(e, adc_apply(e, p, 1))
            assert np.linalg.eigvalsh(choi).min() >= -1e-12
            for i in range(dim):
                e = np.zeros((dim, dim))
                e[i, i] = 1
                assert np.trace(adc_apply(e, p, 1)).real == pytest.approx(1.0)


class TestPhotonLossState:
    def test_no_damping_is_pure(self):
        w = 0.7
        v = np.sqrt(w) * ket("01") + np.sqrt(1 - w) * ket("10")
        assert np.allclose(photon_loss_state(1e-15, w), proj(v), atol=1e-12)

    @pytest.mark.parametrize("which", [0, 1])
    def test_matches_channel(self, rng, which):
        for p, w in rng.uniform(0.01, 0.99, size=(20, 2)):
            v = np.sqrt(w) * ket("01") + np.sqrt(1 - w) * ket("10")
            direct = adc_apply(proj(v), p, which)
            assert np.max(np.abs(photon_loss_state(p, w, which) - direct)) <= 1e-12

    def test_strong_damping_trace(self):
        rho = photon_loss_state(1.0 - 1e-12, 0.6)
        assert is_density(rho)
        assert rho[0, 0].real == pytest.approx(0.6, abs=1e-9)

    def test_rank_two(self):
        assert np.linalg.matrix_rank(photon_loss_state(0.4, 0.3), tol=1e-10) == 2


class TestMixtures:
    def test_white_limits(self):
        rho = family_state(0.2, 0.6)
        assert np.allclose(white_noise_mix(rho, 0), rho)
        assert np.allclose(white_noise_mix(rho, 1), np.eye(4) / 4)

    def test_white_eigen_shift(self):
        d = np.diag([0.5, 0.3, 0.2, 0.0]).astype(complex)
        q = 0.3
        assert np.allclose(np.diag(white_noise_mix(d, q)).real, 0.7 * np.diag(d).real + q / 4)

    def test_loss_limits(self):
        psi = psi_odd(0.75)
        assert np.allclose(photon_loss_mix(psi, 0), psi)
        assert np.allclose(photon_loss_mix(psi, 1), proj(ket("00")))

    def test_random_mixtures_are_states(self, rng):
        for q in rng.uniform(0, 1, 20):
            assert is_density(photon_loss_mix(psi_odd(0.6), q))
            assert is_density(white_noise_mix(nmes(0.8), q))

    def test_q_range(self):
        with pytest.raises(ValueError):
            white_noise_mix(np.eye(4) / 4, 1.2)
        with pytest.raises(ValueError):
            photon_loss_mix(nmes(0.5), -0.1)
