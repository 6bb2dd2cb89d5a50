import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tiltrate import (
    FiniteDistribution,
    ValidationError,
    force_at_level,
    kl_free_energy_gap,
    log_mgf,
    mean_via_integral,
    rate_at_force,
    rate_work_integral,
    riemann_sandwich,
    tilt,
)
from tiltrate.errors import LevelInfeasibleError, PartitionInvalidError, SupportMismatchError

from conftest import LN2, h2, random_dist


def coin():
    return FiniteDistribution([0.0, 1.0], [0.5, 0.5])


class TestFiniteDistribution:
    def test_sorting_and_moments(self):
        d = FiniteDistribution([2.0, 0.5, 1.0], [0.2, 0.5, 0.3])
        assert list(d.values) == [0.5, 1.0, 2.0]
        assert d.mean == pytest.approx(0.5 * 0.5 + 1.0 * 0.3 + 2.0 * 0.2)

    def test_zero_probabilities_dropped(self):
        d = FiniteDistribution([1.0, 5.0, 9.0], [0.5, 0.0, 0.5])
        assert d.size == 2
        assert d.max_value == 9.0

    def test_duplicate_values_merged(self):
        d = FiniteDistribution([1.0, 1.0 + 1e-15, 3.0], [0.25, 0.25, 0.5])
        assert d.size == 2
        assert d.probs[0] == pytest.approx(0.5)

    def test_rejects_bad_probabilities(self):
        with pytest.raises(ValidationError):
            FiniteDistribution([0.0, 1.0], [0.7, 0.7])
        with pytest.raises(ValidationError):
            FiniteDistribution([0.0, 1.0], [-0.2, 1.2])
        with pytest.raises(ValidationError):
            FiniteDistribution([0.0, math.inf], [0.5, 0.5])
        with pytest.raises(ValidationError):
            FiniteDistribution([], [])

    def test_immutable(self):
        d = coin()
        with pytest.raises(ValueError):
            d.values[0] = 7.0

    def test_variance(self):
        assert coin().variance == pytest.approx(0.25)


class TestLogMgf:
    def test_zero_force(self):
        assert log_mgf(coin(), 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_known_value(self):
        # half + half * e^s
        s = -1.3
        assert log_mgf(coin(), s) == pytest.approx(math.log(0.5 + 0.5 * math.exp(s)))

    def test_extreme_force_no_overflow(self):
        d = FiniteDistribution([0.0, 1.0, 2.0], [0.25, 0.5, 0.25])
        assert log_mgf(d, 900.0) == pytest.approx(2.0 * 900.0 + math.log(0.25), rel=1e-12)
        assert log_mgf(d, -900.0) == pytest.approx(math.log(0.25), rel=1e-9)

    def test_convex_in_force(self, rng):
        d = random_dist(rng)
        ss = np.linspace(-6.0, 6.0, 25)
        vals = [log_mgf(d, s) for s in ss]
        for i in range(1, len(ss) - 1):
            assert vals[i] <= 0.5 * (vals[i - 1] + vals[i + 1]) + 1e-12


class TestTilt:
    def test_quarter_coin(self):
        rep = tilt(coin(), math.log(1.0 / 3.0))
        assert rep.mean == pytest.approx(0.25, abs=1e-14)
        assert rep.variance == pytest.approx(0.1875, abs=1e-14)

    def test_zero_force_is_identity(self, rng):
        d = random_dist(rng)
        rep = tilt(d, 0.0)
        assert rep.mean == pytest.approx(d.mean, abs=1e-13)
        np.testing.assert_allclose(rep.tilted.probs, d.probs, atol=1e-14)

    def test_mean_decreases_with_force(self, rng):
        d = random_dist(rng)
        means = [tilt(d, s).mean for s in np.linspace(-8.0, 8.0, 33)]
        assert all(a <= b + 1e-12 for a, b in zip(means, means[1:]))

    @given(st.floats(-40.0, 40.0))
    @settings(max_examples=60, deadline=None)
    def test_mean_stays_inside_support(self, s):
        d = FiniteDistribution([0.0, 0.3, 1.7], [0.3, 0.4, 0.3])
        rep = tilt(d, s)
        assert d.min_value - 1e-12 <= rep.mean <= d.max_value + 1e-12
        assert rep.variance >= -1e-14


class TestRateAtForce:
    def test_quarter_coin_rate(self):
        res = rate_at_force(coin(), math.log(1.0 / 3.0))
        assert res.level == pytest.approx(0.25, abs=1e-14)
        assert res.rate == pytest.approx(LN2 - h2(0.25), abs=1e-12)
        assert res.rate == pytest.approx(0.13081203594113698, abs=1e-12)

    def test_zero_force_zero_rate(self, rng):
        d = random_dist(rng)
        res = rate_at_force(d, 0.0)
        assert res.rate == pytest.approx(0.0, abs=1e-13)
        assert res.level == pytest.approx(d.mean, abs=1e-13)

    def test_rate_nonnegative(self, rng):
        d = random_dist(rng)
        for s in np.linspace(-10.0, 10.0, 41):
            assert rate_at_force(d, s).rate >= 0.0


class TestForceAtLevel:
    def test_quarter_coin(self):
        res = force_at_level(coin(), 0.25)
        assert res.force == pytest.approx(math.log(1.0 / 3.0), abs=1e-9)
        assert res.rate == pytest.approx(0.13081203594113698, abs=1e-10)

    def test_level_at_mean_gives_zero(self):
        res = force_at_level(coin(), 0.5)
        assert res.force == pytest.approx(0.0, abs=1e-12)
        assert res.rate == pytest.approx(0.0, abs=1e-12)

    def test_endpoint_levels(self):
        d = FiniteDistribution([0.0, 1.0], [0.25, 0.75])
        res = force_at_level(d, 0.0)
        assert res.force == -math.inf
        assert res.rate == pytest.approx(-math.log(0.25), abs=1e-12)
        res = force_at_level(d, 1.0)
        assert res.force == math.inf
        assert res.rate == pytest.approx(-math.log(0.75), abs=1e-12)

    def test_outside_support_raises(self):
        with pytest.raises(LevelInfeasibleError):
            force_at_level(coin(), -0.05)
        with pytest.raises(LevelInfeasibleError):
            force_at_level(coin(), 1.05)

    def test_point_mass(self):
        d = FiniteDistribution([0.7], [1.0])
        res = force_at_level(d, 0.7)
        assert res.rate == 0.0
        with pytest.raises(LevelInfeasibleError):
            force_at_level(d, 0.71)

    @given(st.floats(-9.0, 9.0))
    @settings(max_examples=60, deadline=None)
    def test_roundtrip_force_level_force(self, s):
        d = FiniteDistribution([0.0, 0.6, 2.0], [0.3, 0.3, 0.4])
        level = tilt(d, s).mean
        rec = force_at_level(d, level, tol=1e-14)
        assert rec.force == pytest.approx(s, abs=1e-6)


class TestIntegralRoutes:
    def test_rate_work_integral_matches_legendre(self, rng):
        for _ in range(10):
            d = random_dist(rng)
            s = float(-rng.uniform(0.1, 4.0))
            direct = rate_at_force(d, s).rate
            via_work = rate_work_integral(d, s)
            assert via_work == pytest.approx(direct, abs=1e-8)

    def test_positive_force_side(self, rng):
        d = random_dist(rng)
        s = 1.7
        assert rate_work_integral(d, s) == pytest.approx(rate_at_force(d, s).rate, abs=1e-8)

    def test_mean_via_integral(self, rng):
        for _ in range(10):
            d = random_dist(rng)
            s = float(rng.uniform(-4.0, 4.0))
            assert mean_via_integral(d, s) == pytest.approx(tilt(d, s).mean, abs=1e-8)


class TestRiemannSandwich:
    def test_brackets_the_rate(self):
        d = coin()
        s = -1.5
        low, high = riemann_sandwich(d, np.linspace(0.0, s, 101))
        exact = rate_at_force(d, s).rate
        assert low - 1e-12 <= exact <= high + 1e-12

    def test_refinement_halves_gap(self):
        d = coin()
        s = -1.5
        l1, h1 = riemann_sandwich(d, np.linspace(0.0, s, 501))
        l2, h2_ = riemann_sandwich(d, np.linspace(0.0, s, 1001))
        assert (h2_ - l2) <= 0.51 * (h1 - l1)

    def test_single_point_partition(self):
        assert riemann_sandwich(coin(), np.array([0.0])) == (0.0, 0.0)

    def test_bad_partitions(self):
        d = coin()
        with pytest.raises(PartitionInvalidError):
            riemann_sandwich(d, np.array([]))
        with pytest.raises(PartitionInvalidError):
            riemann_sandwich(d, np.array([-0.5, -1.0]))  # must start at 0
        with pytest.raises(PartitionInvalidError):
            riemann_sandwich(d, np.array([0.0, -1.0, -0.5]))  # not monotone
        with pytest.raises(PartitionInvalidError):
            riemann_sandwich(d, np.array([0.0, math.nan]))


class TestKlFreeEnergyGap:
    def test_coin_vs_quarter_coin(self):
        p = coin()
        q = FiniteDistribution([0.0, 1.0], [0.75, 0.25])
        # D(q||p) = ln2 - h2(1/4)
        assert kl_free_energy_gap(q, p) == pytest.approx(0.13081203594113698, abs=1e-12)

    def test_identical_is_zero(self, rng):
        d = random_dist(rng)
        assert kl_free_energy_gap(d, d) == pytest.approx(0.0, abs=1e-13)

    def test_tilted_reaches_the_rate(self, rng):
        # the tilted law is the cheapest way to move the mean
        d = random_dist(rng)
        s = -1.2
        rep = tilt(d, s)
        gap = kl_free_energy_gap(rep.tilted, d)
        assert gap == pytest.approx(rate_at_force(d, s).rate, abs=1e-10)

    def test_nonnegative(self, rng):
        for _ in range(20):
            d = random_dist(rng, size=4)
            probs = rng.random(4) + 0.05
            probs /= probs.sum()
            q = FiniteDistribution(d.values, probs)
            assert kl_free_energy_gap(q, d) >= -1e-13

    def test_support_mismatch(self):
        p = coin()
        q = FiniteDistribution([0.0, 2.0], [0.5, 0.5])
        with pytest.raises(SupportMismatchError):
            kl_free_energy_gap(q, p)
