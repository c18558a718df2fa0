import numpy as np
import pytest

from qrepeater.qcore import (
    MAGIC,
    DimensionError,
    NotHermitianError,
    herm_eigs,
    is_density,
    ket,
    kron,
    kron_all,
    magic_basis_transform,
    partial_trace,
    partial_transpose,
    proj,
)
from qrepeater.states import bell, family_state, nmes

from conftest import random_density


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_basis_projectors(self):
        got = kron(proj(ket("0")), proj(ket("1")))
        assert np.array_equal(got, proj(ket("01")))

    def test_index_layout(self, rng):
        a, b = random_density(rng, 2), random_density(rng, 4)
        k = kron(a, b)
        for i, j, r, s in [(0, 1, 2, 3), (1, 0, 3, 1), (1, 1, 0, 2)]:
            assert k[i * 4 + r, j * 4 + s] == a[i, j] * b[r, s]

    def test_family_times_nmes_has_unit_trace(self):
        k = kron(family_state(0.5, 0.5), nmes(0.75))
        assert k.shape == (16, 16)
        assert np.trace(k).real == pytest.approx(1.0, abs=1e-12)

    def test_associative_exact_on_dyadic_entries(self, rng):
        # Dyadic rationals multiply without rounding, so grouping cannot matter.
        a, b, c = (rng.integers(-8, 8, size=(2, 2)) / 4 + 1j * rng.integers(-8, 8, size=(2, 2)) / 8 for _ in range(3))
        assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))
        assert np.array_equal(kron_all([a, b, c]), kron(kron(a, b), c))

    def test_associative_random(self, rng):
        a, b, c = (random_density(rng, 2) for _ in range(3))
        assert np.max(np.abs(kron(kron(a, b), c) - kron(a, kron(b, c)))) <= 1e-15

    def test_rejects_bad_dims(self):
        with pytest.raises(DimensionError):
            kron(np.eye(3), np.eye(2))


class TestPartialTrace:
    def test_product(self):
        got = partial_trace(proj(ket("00")), [2, 2], keep={0})
        assert np.allclose(got, proj(ket("0")))

    def test_bell_marginal(self):
        assert np.allclose(partial_trace(bell(0), [2, 2], keep={0}), np.eye(2) / 2)

    def test_four_qubit_outer_pair(self):
        got = partial_trace(kron(family_state(0.3, 0.7), nmes(0.6)), [2, 2, 2, 2], keep={0, 3})
        assert is_density(got)
        # Outer qubits of a product of two states are uncorrelated.
        a = partial_trace(family_state(0.3, 0.7), [2, 2], keep={0})
        b = partial_trace(nmes(0.6), [2, 2], keep={1})
        assert np.allclose(got, kron(a, b), atol=1e-12)

    def test_recovers_factor(self, rng):
        a, b = random_density(rng, 4), random_density(rng, 2)
        assert np.max(np.abs(partial_trace(kron(a, b), [4, 2], keep={0}) - a)) <= 1e-12
        assert np.max(np.abs(partial_trace(kron(a, b), [4, 2], keep={1}) - b)) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            partial_trace(np.eye(4) / 4, [2, 4], keep={0})
        with pytest.raises(DimensionError):
            partial_trace(np.eye(4) / 4, [2, 2], keep=set())


class TestPartialTranspose:
    def test_separable_stays_psd(self):
        rho = kron(proj(ket("0") + ket("1")) / 2, proj(ket("1")))
        assert np.linalg.eigvalsh(partial_transpose(rho)).min() >= -1e-12

    def test_bell_min_eigenvalue(self):
        w, _ = herm_eigs(partial_transpose(bell(0)))
        assert w[-1] == pytest.approx(-0.5, abs=1e-12)

    def test_family_min_eigenvalue(self):
        # Exact value for the family; it only equals -C/2 when p = 0.
        p, d = 0.3, 0.7
        c = 2 * np.sqrt(d * (1 - d)) * (1 - p)
        w, _ = herm_eigs(partial_transpose(family_state(p, d)))
        assert w[-1] == pytest.approx((p - np.hypot(p, c)) / 2, abs=1e-12)
        w0, _ = herm_eigs(partial_transpose(family_state(0.0, d)))
        assert w0[-1] == pytest.approx(-np.sqrt(d * (1 - d)), abs=1e-12)

    def test_involution_and_trace(self, rng):
        rho = random_density(rng)
        for sub in (0, 1):
            pt = partial_transpose(rho, sub)
            assert np.allclose(partial_transpose(pt, sub), rho)
            assert np.trace(pt) == pytest.approx(np.trace(rho))
            assert np.allclose(pt, pt.conj().T)

    def test_rejects_non_two_qubit(self):
        with pytest.raises(DimensionError):
            partial_transpose(np.eye(8) / 8)


class TestHermEigs:
    def test_identity(self):
        w, _ = herm_eigs(np.eye(4))
        assert np.allclose(w, [1, 1, 1, 1])

    def test_diagonal_sorted(self):
        w, _ = herm_eigs(np.diag([0.3, 0.0, 0.7, 0.0]))
        assert np.allclose(w, [0.7, 0.3, 0.0, 0.0])

    def test_family_weights(self):
        w, _ = herm_eigs(family_state(0.4, 0.6))
        assert np.allclose(w, [0.6, 0.4, 0.0, 0.0], atol=1e-12)

    @pytest.mark.parametrize("dim", [2, 4, 8, 16])
    def test_residual_and_trace(self, rng, dim):
        for _ in range(5):
            g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            m = g + g.conj().T
            w, v = herm_eigs(m)
            assert np.all(np.diff(w) <= 1e-12)
            for k in range(dim):
                assert np.linalg.norm(m @ v[:, k] - w[k] * v[:, k]) <= 1e-9
            assert np.allclose(v.conj().T @ v, np.eye(dim), atol=1e-10)
            assert w.sum() == pytest.approx(np.trace(m).real, abs=1e-9)
            assert np.allclose(w, np.linalg.eigvalsh(m)[::-1], atol=1e-10)

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitianError):
            herm_eigs(np.array([[0, 1], [0, 0]], dtype=complex))


class TestMagicBasis:
    def test_unitary(self):
        assert np.allclose(MAGIC.conj().T @ MAGIC, np.eye(4))

    def test_maximally_mixed_invariant(self):
        assert np.allclose(magic_basis_transform(np.eye(4) / 4), np.eye(4) / 4)

    def test_bell_is_first_element(self):
        e = np.zeros((4, 4))
        e[0, 0] = 1
        assert np.allclose(magic_basis_transform(bell(0)), e)

    def test_real_part_gives_at_least_half_for_family(self):
        m = magic_basis_transform(family_state(0.2, 0.5)).real
        assert np.linalg.eigvalsh(m).max() >= 0.5

    def test_preserves_spectrum(self, rng):
        rho = random_density(rng)
        assert np.allclose(np.linalg.eigvalsh(magic_basis_transform(rho)), np.linalg.eigvalsh(rho))


class TestIsDensity:
    def test_examples(self):
        assert is_density(np.eye(4) / 4, 1e-10)
        assert not is_density(np.eye(4), 1e-10)
        assert not is_density(np.diag([1.5, -0.5, 0, 0]))
        assert not is_density(np.array([[0.5, 0.1], [0.2, 0.5]]))
        assert not is_density(np.eye(3) / 3)

    def test_random_family(self, rng):
        for p, d in rng.uniform([0, 0.5], [1, 0.999], size=(50, 2)):
            assert is_density(family_state(p, d))
