"""Sampling primitive tests.

The weighted sampler is checked against an exact enumeration of the
successive-draws law (pick proportional to weight, remove, repeat), which is
the distribution the exponential-key trick must reproduce.
"""

from itertools import combinations, permutations

import numpy as np
import pytest

from specmask.errors import AllWeightsZero, KTooLarge
from specmask.sampling import SeededRng, derive_seed, sample_uniform, sample_weighted

TRIALS = 100_000
TV_TOL = 0.02


def exact_successive_draw_law(weights, k):
    """Exact k-subset probabilities under draws without replacement,
    by summing over all draw orders."""
    probs: dict[tuple, float] = {}
    total = float(sum(weights))
    for perm in permutations(range(len(weights)), k):
        p, rem = 1.0, total
        for i in perm:
            p *= weights[i] / rem
            rem -= weights[i]
        key = tuple(sorted(perm))
        probs[key] = probs.get(key, 0.0) + p
    return probs


def empirical_set_law(draw, trials):
    counts: dict[tuple, int] = {}
    for t in range(trials):
        key = tuple(int(i) for i in draw(t))
        counts[key] = counts.get(key, 0) + 1
    return {key: n / trials for key, n in counts.items()}


def total_variation(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(key, 0.0) - q.get(key, 0.0)) for key in keys)


class TestWeightedSampling:
    def test_matches_successive_draw_law(self):
        """Empirical k-subset frequencies match the exact roulette-wheel
        enumeration within total variation 0.02."""
        weights = np.array([5.0, 3.0, 1.0, 1.0])
        exact = exact_successive_draw_law(weights, 2)
        rng = SeededRng(11)
        empirical = empirical_set_law(lambda t: sample_weighted(weights, 2, rng), TRIALS)
        assert total_variation(exact, empirical) < TV_TOL

    def test_two_to_one_marginal(self):
        weights = np.array([2.0, 1.0])
        rng = SeededRng(12)
        hits = sum(int(sample_weighted(weights, 1, rng)[0] == 0) for _ in range(TRIALS))
        assert abs(hits / TRIALS - 2.0 / 3.0) < 0.02

    def test_dominant_weight_nearly_always_first(self):
        weights = np.array([1.0, 1e-9, 1e-9])
        rng = SeededRng(13)
        hits = sum(int(sample_weighted(weights, 1, rng)[0] == 0) for _ in range(20_000))
        assert hits / 20_000 >= 0.99

    def test_equal_weights_give_uniform_marginals(self):
        n, k = 10, 3
        rng = SeededRng(14)
        counts = np.zeros(n)
        for _ in range(TRIALS // 2):
            counts[sample_weighted(np.ones(n), k, rng)] += 1
        marginals = counts / (TRIALS // 2)
        assert np.all(np.abs(marginals - k / n) < 0.02)

    def test_zero_weight_items_never_picked(self):
        weights = np.array([1.0, 0.0, 1.0, 0.0])
        rng = SeededRng(15)
        for _ in range(500):
            picked = sample_weighted(weights, 2, rng)
            assert np.array_equal(picked, [0, 2])

    def test_output_is_sorted_unique_in_range(self):
        rng = SeededRng(16)
        meta = np.random.default_rng(0)
        for _ in range(300):
            n = int(meta.integers(1, 40))
            k = int(meta.integers(0, n + 1))
            weights = meta.uniform(0.1, 5.0, size=n)
            picked = sample_weighted(weights, k, rng)
            assert picked.shape == (k,)
            assert np.all(np.diff(picked) > 0)
            if k:
                assert picked[0] >= 0 and picked[-1] < n

    def test_k_larger_than_population_rejected(self):
        with pytest.raises(KTooLarge):
            sample_weighted(np.ones(3), 4, SeededRng(0))

    def test_not_enough_positive_weights_rejected(self):
        with pytest.raises(AllWeightsZero):
            sample_weighted(np.array([1.0, 0.0, 0.0]), 2, SeededRng(0))

    def test_bad_weights_rejected(self):
        with pytest.raises(ValueError):
            sample_weighted(np.array([1.0, -0.5]), 1, SeededRng(0))
        with pytest.raises(ValueError):
            sample_weighted(np.array([1.0, np.nan]), 1, SeededRng(0))


class TestUniformSampling:
    def test_subsets_equally_likely(self):
        """Every 2-subset of 6 items lands within TV 0.02 of the uniform law."""
        exact = {c: 1.0 / 15.0 for c in combinations(range(6), 2)}
        rng = SeededRng(21)
        universe = np.arange(6)
        empirical = empirical_set_law(lambda t: sample_uniform(universe, 2, rng), TRIALS)
        assert total_variation(exact, empirical) < TV_TOL

    def test_marginals(self):
        n, k = 8, 3
        rng = SeededRng(22)
        counts = np.zeros(n)
        for _ in range(TRIALS // 2):
            counts[sample_uniform(np.arange(n), k, rng)] += 1
        assert np.all(np.abs(counts / (TRIALS // 2) - k / n) < 0.02)

    def test_respects_universe_labels(self):
        rng = SeededRng(23)
        universe = np.array([7, 3, 11, 42])
        for _ in range(200):
            picked = sample_uniform(universe, 2, rng)
            assert set(picked) <= {3, 7, 11, 42}
            assert np.all(np.diff(picked) > 0)

    def test_k_zero_consumes_no_randomness(self):
        a, b = SeededRng(5), SeededRng(5)
        sample_uniform(np.arange(10), 0, a)
        np.testing.assert_array_equal(a.doubles(4), b.doubles(4))

    def test_k_too_large_rejected(self):
        with pytest.raises(KTooLarge):
            sample_uniform(np.arange(3), 4, SeededRng(0))


class TestDeterminism:
    def test_same_seed_same_draws(self):
        for seed in (0, 1, 123456789, 2**63):
            a = sample_weighted(np.arange(1.0, 21.0), 7, SeededRng(seed))
            b = sample_weighted(np.arange(1.0, 21.0), 7, SeededRng(seed))
            np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ_somewhere(self):
        draws = {
            tuple(sample_weighted(np.arange(1.0, 21.0), 7, SeededRng(seed)))
            for seed in range(20)
        }
        assert len(draws) > 1

    def test_doubles_in_unit_interval(self):
        u = SeededRng(99).doubles(10_000)
        assert u.min() >= 0.0 and u.max() < 1.0


class TestDeriveSeed:
    def test_stable_and_distinct(self):
        seeds = [derive_seed(42, i) for i in range(1000)]
        assert len(set(seeds)) == 1000
        assert all(0 <= s < 2**64 for s in seeds)
        assert seeds[0] == derive_seed(42, 0)

    def test_base_seed_matters(self):
        assert derive_seed(1, 0) != derive_seed(2, 0)
