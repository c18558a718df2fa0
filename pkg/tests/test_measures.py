import numpy as np
import pytest

from qrepeater.measures import (
    concurrence,
    fef,
    fef_with_frame,
    measure_report,
    negativity,
    ofef_family,
    ofef_upper,
    otf_from_fef,
    sampled_fef,
    teleport_avg_fidelity_mc,
    teleport_channel,
    von_neumann_entropy_marginal,
)
from qrepeater.qcore import ket, proj
from qrepeater.states import bell, family_state, nmes, werner

from conftest import random_density, random_unitary


def _local(rho, ua, ub):
    w = np.kron(ua, ub)
    return w @ rho @ w.conj().T


class TestConcurrence:
    def test_family_closed_form(self, rng):
        for p, d in rng.uniform([0, 0.5], [1, 0.999], size=(50, 2)):
            assert concurrence(family_state(p, d)) == pytest.approx(2 * np.sqrt(d * (1 - d)) * (1 - p), abs=1e-9)

    def test_separable(self):
        assert concurrence(proj(ket("01"))) == pytest.approx(0, abs=1e-12)
        assert concurrence(np.eye(4) / 4) == 0.0

    def test_local_unitary_invariance(self, rng):
        rho = random_density(rng, rank=2)
        got = concurrence(_local(rho, random_unitary(rng), random_unitary(rng)))
        assert got == pytest.approx(concurrence(rho), abs=1e-9)


class TestNegativity:
    def test_bell(self):
        assert negativity(bell(0)) == pytest.approx(1.0)

    def test_pure_equals_concurrence(self):
        for a in (0.5, 0.6, 0.9):
            assert negativity(nmes(a)) == pytest.approx(concurrence(nmes(a)), abs=1e-12)

    def test_family_exact_value(self):
        # sqrt(p^2 + C^2) - p, strictly below C for p > 0.
        p, d = 0.3, 0.7
        c = 2 * np.sqrt(d * (1 - d)) * (1 - p)
        assert negativity(family_state(p, d)) == pytest.approx(np.hypot(p, c) - p, abs=1e-12)
        assert negativity(family_state(p, d)) < c

    def test_werner(self):
        assert negativity(werner(0.8)) == pytest.approx(0.6, abs=1e-12)


class TestFef:
    def test_bell_and_mixed(self):
        assert fef(bell(2)) == pytest.approx(1.0)
        assert fef(np.eye(4) / 4) == pytest.approx(0.25)

    def test_nmes(self):
        assert fef(nmes(0.8)) == pytest.approx((1 + 2 * np.sqrt(0.16)) / 2)

    def test_frame_attains_value(self, rng):
        for _ in range(20):
            rho = random_density(rng)
            f, u = fef_with_frame(rho)
            v = np.kron(np.eye(2), u) @ (ket("00") + ket("11")) / np.sqrt(2)
            assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-10)
            assert (v.conj() @ rho @ v).real == pytest.approx(f, abs=1e-12)

    def test_sampled_is_lower_and_close(self, rng):
        for seed in range(10):
            rho = random_density(rng)
            s = sampled_fef(rho, samples=2000, seed=seed)
            assert s <= fef(rho) + 1e-12
            assert fef(rho) - s <= 1e-3

    def test_sampled_without_polish(self, rng):
        rho = random_density(rng)
        assert sampled_fef(rho, 500, seed=1, polish=False) <= fef(rho) + 1e-12

    def test_sampled_deterministic(self, rng):
        rho = random_density(rng)
        assert sampled_fef(rho, 100, seed=3, polish=False) == sampled_fef(rho, 100, seed=3, polish=False)

    def test_sampled_rejects_zero(self):
        with pytest.raises(ValueError):
            sampled_fef(np.eye(4) / 4, samples=0)


class TestOfef:
    def test_branches(self):
        assert ofef_family(0.0, 0.5) == 1.0
        assert ofef_family(1.0, 0.6) == 0.5
        p, d = 0.1, 0.5  # C = 0.9 > 2p
        assert ofef_family(p, d) == pytest.approx((1 + 0.9 - 0.1) / 2)
        p = 0.8  # C = 0.2 <= 2p
        assert ofef_family(p, 0.5) == pytest.approx((1 + 0.04 / 3.2) / 2)

    def test_continuous_at_switch(self):
        # C = 2p at p = k/(2+k).
        d = 0.7
        k = 2 * np.sqrt(d * (1 - d))
        pc = k / (2 + k)
        assert ofef_family(pc - 1e-12, d) == pytest.approx(ofef_family(pc + 1e-12, d), abs=1e-10)

    def test_between_fef_and_upper(self, rng):
        for p, d in rng.uniform([0.01, 0.5], [0.99, 0.99], size=(50, 2)):
            rho = family_state(p, d)
            assert fef(rho) - 1e-12 <= ofef_family(p, d) <= ofef_upper(rho) + 1e-12

    def test_upper(self):
        assert ofef_upper(bell(0)) == pytest.approx(1.0)
        assert ofef_upper(proj(ket("01"))) == pytest.approx(0.5)


class TestOtfAndEntropy:
    def test_otf(self):
        assert otf_from_fef(1.0) == 1.0
        assert otf_from_fef(0.5) == pytest.approx(2 / 3)
        with pytest.raises(ValueError):
            otf_from_fef(1.5)

    def test_entropy(self):
        assert von_neumann_entropy_marginal(0.5) == pytest.approx(1.0)
        assert von_neumann_entropy_marginal(1.0) == 0.0
        assert von_neumann_entropy_marginal(0.9) == pytest.approx(0.4689955935892812)
        with pytest.raises(ValueError):
            von_neumann_entropy_marginal(1.1)


class TestTeleportation:
    def test_bell_channel_is_identity(self):
        lam = teleport_channel(bell(0))
        for k in range(2):
            for l in range(2):
                e = np.zeros((2, 2))
                e[k, l] = 1
                assert np.allclose(lam[:, :, k, l], e)

    def test_maximally_mixed_resource(self):
        lam = teleport_channel(np.eye(4) / 4)
        assert np.allclose(lam[:, :, 0, 0], np.eye(2) / 2)

    def test_mc_matches_relation(self):
        for rho in (family_state(0.2, 0.5), nmes(0.75), werner(0.9)):
            got = teleport_avg_fidelity_mc(rho, samples=20_000, seed=7)
            assert got == pytest.approx(otf_from_fef(fef(rho)), abs=0.01)

    def test_deterministic(self):
        a = teleport_avg_fidelity_mc(werner(0.7), samples=1000, seed=11)
        assert a == teleport_avg_fidelity_mc(werner(0.7), samples=1000, seed=11)


class TestReport:
    def test_family_uses_closed_form(self):
        rep = measure_report(family_state(0.0, 0.5), family=(0.0, 0.5))
        assert rep.concurrence == pytest.approx(1.0)
        assert rep.fef == pytest.approx(1.0)
        assert rep.otf_source == "ofef_family"

    def test_product(self):
        rep = measure_report(family_state(1.0, 0.6), family=(1.0, 0.6))
        assert rep.concurrence == pytest.approx(0.0, abs=1e-12)
        assert rep.ofef_upper == pytest.approx(0.5)

    def test_generic(self):
        rep = measure_report(werner(0.8161))
        assert rep.concurrence == pytest.approx(0.6322, abs=1e-9)
        assert rep.ofef is None and rep.otf_source == "fef"
        assert set(rep.to_dict()) >= {"concurrence", "negativity", "fef", "ofef_upper", "otf"}
