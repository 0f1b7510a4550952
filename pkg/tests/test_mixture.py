import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liglearn.errors import InvalidModelError
from liglearn.games import EquilibriaSet, zero_game
from liglearn.mixture import (
    LN2,
    JointActionDataset,
    MixtureModel,
    avg_log_likelihood,
    empirical_proportion,
    kl_bernoulli,
    kl_bounds,
    loglik_from_proportions,
    optimal_q,
    pmf,
    sample,
)

from _builders import coordination_game


def random_model(rng, n):
    # non-trivial equilibrium set of random size, interior q
    total = 1 << n
    k = int(rng.integers(1, total))
    members = rng.choice(total, size=k, replace=False)
    q = float(rng.uniform(0.05, 0.95))
    return MixtureModel(game=EquilibriaSet(n=n, members=members), q=q)


class TestDataset:
    def test_frequency_view_order(self):
        # count desc, index asc within equal counts
        X = np.array([[1, 1]] * 3 + [[-1, -1]] * 3 + [[1, -1]] * 1)
        ds = JointActionDataset(X)
        uniq, counts = ds.frequency_view()
        assert list(uniq) == [0, 3, 1]
        assert list(counts) == [3, 3, 1]

    def test_from_indices_round_trip(self):
        ds = JointActionDataset.from_indices(np.array([5, 0, 5]), 3)
        assert ds.m == 3 and ds.n == 3
        assert list(ds.action_indices()) == [5, 0, 5]

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            JointActionDataset(np.empty((0, 2), dtype=np.int8))


class TestMixtureValidity:
    def test_trivial_forces_boundary_q(self):
        full = zero_game(2)
        MixtureModel(game=full, q=1.0)
        with pytest.raises(InvalidModelError):
            MixtureModel(game=full, q=0.5)
        empty = EquilibriaSet(n=2, members=np.array([], dtype=np.int64))
        MixtureModel(game=empty, q=0.0)
        with pytest.raises(InvalidModelError):
            MixtureModel(game=empty, q=0.3)

    def test_nontrivial_needs_interior_q(self):
        g = coordination_game(2, [(0, 1)])
        with pytest.raises(InvalidModelError):
            MixtureModel(game=g, q=1.0)
        # evaluation mode admits boundary q on non-trivial games
        m = MixtureModel(game=g, q=1.0, strict=False)
        assert m.class_masses() == (0.5, 0.0)

    def test_q_range(self):
        g = coordination_game(2, [(0, 1)])
        with pytest.raises(InvalidModelError):
            MixtureModel(game=g, q=1.5)


class TestPmf:
    @given(st.integers(1, 6), st.integers(0, 10**9))
    @settings(max_examples=80, deadline=None)
    def test_normalization(self, n, seed):
        model = random_model(np.random.default_rng(seed), n)
        total = sum(pmf(model, x) for x in range(1 << n))
        assert abs(total - 1.0) <= 1e-12

    def test_class_masses(self):
        g = coordination_game(2, [(0, 1)])
        model = MixtureModel(game=g, q=0.9)
        p_eq, p_non = model.class_masses()
        assert p_eq == 0.9 / 2 and p_non == pytest.approx(0.1 / 2)
        assert pmf(model, np.array([1, 1])) == p_eq
        assert pmf(model, np.array([1, -1])) == p_non

    def test_trivial_uniform(self):
        model = MixtureModel(game=zero_game(3), q=1.0)
        assert pmf(model, 5) == 1.0 / 8


class TestSampling:
    def test_deterministic(self):
        model = MixtureModel(game=coordination_game(2, [(0, 1)]), q=0.8)
        a = sample(model, 42, 200).action_indices()
        b = sample(model, 42, 200).action_indices()
        assert np.array_equal(a, b)

    def test_coverage_near_q(self):
        g = coordination_game(3, [(0, 1), (1, 2)])
        model = MixtureModel(game=g, q=0.9)
        ds = sample(model, 0, 20000)
        prop = empirical_proportion(g, ds, tol=0.0)
        assert abs(prop - 0.9) < 0.01


class TestLikelihood:
    def test_trivial_is_exact(self):
        ds = JointActionDataset(np.array([[1, -1, 1], [1, 1, 1]]))
        assert avg_log_likelihood(zero_game(3), 1.0, ds) == -3 * LN2

    def test_matches_direct_pmf_average(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 6))
            model = random_model(rng, n)
            ds = sample(model, int(rng.integers(0, 2**31)),
                        int(rng.integers(5, 40)))
            direct = np.mean([math.log(pmf(model, x))
                              for x in ds.action_indices()])
            via_props = avg_log_likelihood(model.equilibria, model.q, ds)
            assert via_props == pytest.approx(direct, abs=1e-10)

    def test_proportion_form_requires_interior_pi(self):
        with pytest.raises(ValueError):
            loglik_from_proportions(0.5, 1.0, 0.5, 2)

    def test_optimal_q_shrinks(self):
        assert optimal_q(0.5, 10) == 0.5
        assert optimal_q(1.0, 10) == 1 - 1 / 20
        assert optimal_q(0.0, 10) == 0.0


class TestKl:
    def test_bernoulli_basics(self):
        assert kl_bernoulli(0.3, 0.3) == 0.0
        assert kl_bernoulli(0.0, 0.5) == pytest.approx(LN2)
        assert kl_bernoulli(0.5, 0.0) == math.inf

    def test_bracket_holds_on_grid(self):
        # strict bracket -pi_hat log pi - log 2 < KL < -pi_hat log pi
        for pi_hat in np.linspace(0.05, 0.99, 20):
            for pi in np.linspace(0.01, pi_hat - 0.01, 20):
                if pi <= 0:
                    continue
                lo, hi = kl_bounds(pi_hat, pi)
                kl = kl_bernoulli(pi_hat, pi)
                assert lo < kl < hi

    def test_bracket_domain(self):
        with pytest.raises(ValueError):
            kl_bounds(0.3, 0.5)
