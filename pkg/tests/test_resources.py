import math

import numpy as np
import pytest

from qrepeater.measures import von_neumann_entropy_marginal
from qrepeater.protocols.single_node import alpha_from_concurrence, feasibility_single_node
from qrepeater.resources import (
    UndistillableError,
    alpha_for_noise,
    contrast,
    copies_required,
    entropy_from_rv,
    hashing_rate,
    hashing_rate_report,
    max_nodes,
    min_concurrence,
    resource_report,
    saved_resource,
    saved_resource_bound,
    saved_resource_limit,
)


class TestSavedResource:
    def test_values(self):
        assert saved_resource(7, 1.0) == 0.0
        assert saved_resource(7, 0.0) == 7
        assert saved_resource(10, 0.75) == pytest.approx(2.5)

    def test_range(self):
        with pytest.raises(ValueError):
            saved_resource(0, 0.5)
        with pytest.raises(ValueError):
            saved_resource(3, 1.5)


class TestMaxNodes:
    def test_infinite_at_one(self):
        assert max_nodes(0.6, 0.5, 1.0) == math.inf

    def test_monotone_in_p(self):
        vals = [max_nodes(p, 0.6, 0.9) for p in np.linspace(0.35, 0.95, 30)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_round_trip_with_fold_threshold(self):
        # n segments of concurrence C fold to C^n; at n = max_nodes the folded weight sits on the threshold.
        p, d, c = 0.7, 0.6, 0.93
        n = max_nodes(p, d, c)
        folded = alpha_from_concurrence(c**n)
        assert folded == pytest.approx(feasibility_single_node(p, d, 0.5, 0.5).alpha_bound, abs=1e-6)

    def test_min_concurrence_inverse(self):
        p, d = 0.7, 0.6
        assert max_nodes(p, d, min_concurrence(9, p, d)) == pytest.approx(9)


class TestBoundAndLimit:
    def test_n_one(self):
        k = contrast(0.6, 0.7)
        assert saved_resource_bound(1, 0.6, 0.7) == pytest.approx(1 - math.sqrt(1 - k * k))

    def test_nondecreasing_and_capped(self):
        vals = [saved_resource_bound(n, 0.7, 0.6) for n in range(1, 200)]
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
        assert all(v <= n for n, v in zip(range(1, 200), vals))

    def test_limit(self, rng):
        for p, d in rng.uniform([0.05, 0.5], [0.95, 0.99], size=(20, 2)):
            assert abs(saved_resource_bound(10**6, p, d) - saved_resource_limit(p, d)) <= 1e-3

    def test_limit_increases_with_noise(self):
        vals = [saved_resource_limit(p, 0.6) for p in np.linspace(0.5, 0.99, 20)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_limit_symmetric(self):
        assert saved_resource_limit(0.4, 0.3) == pytest.approx(saved_resource_limit(0.4, 0.7))

    def test_divergent_ends(self):
        assert saved_resource_limit(0.0, 0.6) == math.inf
        assert saved_resource_limit(1.0, 0.6) == math.inf

    def test_rv_positive_when_feasible(self, rng):
        for p, d in rng.uniform([0.4, 0.5], [0.99, 0.99], size=(20, 2)):
            for n in (1, 5, 50):
                c = min_concurrence(n, p, d)
                a = alpha_from_concurrence(c)
                if a > 0.5 and p * p >= d * (1 - d) * (1 - p) ** 2:
                    assert saved_resource(n, c) > 0


class TestHashing:
    def test_values(self):
        assert hashing_rate(1.0) == 1.0
        assert hashing_rate(0.8161) == pytest.approx(0.0199905, abs=1e-6)
        assert 1 / hashing_rate(0.8161) == pytest.approx(50.02, abs=0.01)

    def test_monotone(self):
        vals = [hashing_rate(f) for f in np.linspace(0.82, 1.0, 50)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_clipped(self):
        rep = hashing_rate_report(0.6)
        assert rep.rate == 0.0 and not rep.hashable


class TestCopies:
    def test_alpha(self):
        assert alpha_for_noise(1.0) == 1.0
        assert alpha_for_noise(0.6) == pytest.approx(0.9)
        assert alpha_for_noise(1 / 3) == pytest.approx(0.5)
        assert alpha_for_noise(0.2) == 0.5

    def test_alpha_is_single_node_bound(self):
        for p in (0.4, 0.6, 0.9):
            assert alpha_for_noise(p) == pytest.approx(feasibility_single_node(p, 0.5, 0.5, 0.5).alpha_bound)

    def test_named_value(self):
        a = alpha_for_noise(0.9)
        assert a == pytest.approx(3.24 / 3.25)
        s = von_neumann_entropy_marginal(a)
        assert s == pytest.approx(0.030106, abs=1e-5)
        assert copies_required(1, 0.9, 0.8161) == pytest.approx(s / hashing_rate(0.8161))

    def test_eswap_cost(self):
        assert copies_required(4, 0.3, 0.9) == pytest.approx(4 / hashing_rate(0.9))

    def test_decreasing_in_p(self):
        vals = [copies_required(10, p, 0.8161) for p in np.linspace(1 / 3 + 1e-3, 0.999, 50)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_increasing_in_n(self):
        assert copies_required(5, 0.7, 0.9) < copies_required(6, 0.7, 0.9)

    def test_undistillable(self):
        with pytest.raises(UndistillableError):
            copies_required(3, 0.7, 0.5)


class TestEntropyFromRv:
    def test_limits(self):
        assert entropy_from_rv(10, 10) == 0.0
        assert entropy_from_rv(0, 10) == pytest.approx(1.0)

    def test_round_trip(self):
        for a in (0.5, 0.6, 0.8, 0.95):
            c = 2 * math.sqrt(a * (1 - a))
            assert entropy_from_rv(saved_resource(10, c), 10) == pytest.approx(von_neumann_entropy_marginal(a), abs=1e-12)

    def test_range(self):
        with pytest.raises(ValueError):
            entropy_from_rv(11, 10)


class TestReport:
    def test_fields(self):
        r = resource_report(10, 0.7, 0.5, 0.8161)
        assert r.feasible
        assert 0 <= r.rv <= 10
        assert r.rv == pytest.approx(r.rv_upper)
        assert r.rv_limit >= r.rv_upper
        assert r.copies_required == pytest.approx(copies_required(10, 0.7, 0.8161))

    def test_infeasible_and_undistillable(self):
        r = resource_report(3, 0.2, 0.5, 0.6)
        assert not r.feasible and r.rv == 0.0 and r.copies_required is None
