import math

import numpy as np
import pytest

from tsl.densities import (
    PrefixSet,
    log_weight_sum,
    prefix_density,
    prefix_density_profile,
    separating_set,
)
from tsl.errors import DomainError


class TestLogWeightSum:
    def test_gamma_zero_is_log_n_e(self):
        for n in (1, 10, 1000, 12345):
            assert log_weight_sum(n, 0.0) == pytest.approx(1.0 + math.log(n), rel=1e-12)

    def test_single_term_gamma_one(self):
        assert log_weight_sum(1, 1.0) == pytest.approx(1.0)

    def test_matches_asymptote(self):
        # exp(result) ~ (n^(1-g)/g) * e^(n^g) for moderate n
        n, gamma = 400, 0.5
        got = log_weight_sum(n, gamma)
        asym = math.log(n ** (1 - gamma) / gamma) + n**gamma
        assert 0.9 < math.exp(got - asym) < 1.1

    def test_overflow_free_at_large_horizon(self):
        val = log_weight_sum(1 << 26, 1.0)
        assert math.isfinite(val)
        assert val == pytest.approx((1 << 26), rel=1e-6)  # dominated by the top term

    def test_rejects_bad_args(self):
        with pytest.raises(DomainError):
            log_weight_sum(0, 0.5)
        with pytest.raises(DomainError):
            log_weight_sum(10, 1.5)


class TestPrefixDensity:
    def test_full_set_density_one(self):
        n = 4096
        full = PrefixSet(np.arange(1, n + 1), n)
        for gamma in (0.0, 0.3, 1.0):
            assert prefix_density(full, gamma, n) == pytest.approx(1.0, abs=1e-12)

    def test_evens_natural_density(self):
        n = 1 << 20
        evens = PrefixSet(np.arange(2, n + 1, 2), n)
        assert prefix_density(evens, 0.0, n) == pytest.approx(0.5, abs=1e-5)

    def test_horizon_beyond_set_rejected(self):
        s = PrefixSet(np.array([1, 2]), 10)
        with pytest.raises(DomainError):
            prefix_density(s, 0.5, 11)

    def test_empty_set(self):
        s = PrefixSet(np.array([], dtype=np.int64), 100)
        assert prefix_density(s, 0.5, 100) == 0.0

    def test_values_in_unit_interval(self):
        rng = np.random.Generator(np.random.PCG64(5))
        n = 1 << 14
        for _ in range(25):
            members = np.nonzero(rng.random(n) < rng.uniform(0.05, 0.9))[0] + 1
            s = PrefixSet(members, n)
            for gamma in (0.0, 0.4, 1.0):
                d = prefix_density(s, gamma, n)
                assert 0.0 <= d <= 1.0


class TestSeparatingSet:
    def test_gamma_one_dyadic_points(self):
        s = separating_set(1.0, 100)
        np.testing.assert_array_equal(s.members, [2, 4, 8, 16, 32, 64])

    def test_rejects_gamma_zero(self):
        with pytest.raises(DomainError):
            separating_set(0.0, 100)

    def test_density_at_own_gamma(self):
        horizon = 1 << 20
        s = separating_set(0.5, horizon)
        assert prefix_density(s, 0.5, horizon) >= 0.3

    def test_density_collapses_below(self):
        horizon = 1 << 20
        s = separating_set(0.5, horizon)
        low = prefix_density(s, 0.25, horizon)
        assert low <= 0.05
        profile = [prefix_density(s, 0.25, 1 << m) for m in range(12, 21)]
        assert all(b <= a + 1e-12 for a, b in zip(profile, profile[1:]))

    def test_members_hug_dyadic_tails(self):
        s = separating_set(0.5, 1 << 12)
        n = 10
        width = int(2.0 ** (n * 0.5))
        block = s.members[(s.members > (1 << n) - width - 1) & (s.members <= (1 << n))]
        assert len(block) == width + 1


class TestMonotonicityHierarchy:
    @staticmethod
    def _horizons(members):
        # dyadic prefixes, each snapped down to the nearest member as well:
        # the upper density is approached along prefixes that end at a
        # member, and a purely dyadic sup can miss those peaks entirely
        # for sparse sets once the weights concentrate at the top
        out = set()
        for m in range(10, 21):
            n = 1 << m
            out.add(n)
            at_or_below = members[members <= n]
            if len(at_or_below):
                out.add(int(at_or_below[-1]))
        return sorted(out)

    def test_sup_density_monotone_in_gamma(self):
        rng = np.random.Generator(np.random.PCG64(17))
        n_max = 1 << 20
        pairs = [(0.0, 0.3), (0.3, 0.6), (0.2, 0.9), (0.5, 1.0)]
        for trial in range(200):
            kind = trial % 3
            if kind == 0:
                members = np.nonzero(rng.random(n_max) < rng.uniform(0.001, 0.05))[0] + 1
            elif kind == 1:
                lo = int(rng.integers(1, n_max // 2))
                hi = int(rng.integers(lo, min(n_max, lo + 200_000)))
                members = np.arange(lo, hi + 1)
            else:
                members = separating_set(float(rng.uniform(0.2, 0.9)), n_max).members
            if len(members) == 0:
                continue
            s = PrefixSet(members, n_max)
            horizons = self._horizons(members)
            g1, g2 = pairs[trial % len(pairs)]
            sup1 = max(r for _, r, _, _ in prefix_density_profile(s, g1, horizons))
            sup2 = max(r for _, r, _, _ in prefix_density_profile(s, g2, horizons))
            assert sup1 <= sup2 + 0.02


class TestDyadicCollapse:
    # ratio of the half-horizon weighted mass to the full one:
    # asymptotically 2**-(1-t) * exp(-2**(n t) (1 - 2**-t))
    @staticmethod
    def _log_ratio(t, n):
        return log_weight_sum(1 << (n - 1), t) - log_weight_sum(1 << n, t)

    @classmethod
    def _ratio(cls, t, n):
        return math.exp(cls._log_ratio(t, n))

    def test_asymptote_matches_at_n16(self):
        # compared in log scale: at t = 0.8 both sides underflow doubles
        for t in (0.3, 0.5, 0.8):
            log_predicted = -(1 - t) * math.log(2.0) - (2.0 ** (16 * t)) * (1 - 2.0**-t)
            assert abs(self._log_ratio(t, 16) - log_predicted) <= math.log(2.0)

    @pytest.mark.parametrize("t,n", [(0.3, 24), (0.5, 16), (0.8, 16)])
    def test_collapse_below_threshold(self, t, n):
        # the exponent scale 2**(n t) (1 - 2**-t) only clears -log(1e-6)
        # at n = 16 for t >= 0.5; the slow t = 0.3 case needs n = 24
        assert self._ratio(t, n) < 1e-6


class TestPrefixSetInvariants:
    def test_rejects_unsorted(self):
        with pytest.raises(DomainError):
            PrefixSet(np.array([3, 2]), 10)

    def test_rejects_duplicates(self):
        with pytest.raises(DomainError):
            PrefixSet(np.array([2, 2]), 10)

    def test_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            PrefixSet(np.array([0, 3]), 10)
        with pytest.raises(DomainError):
            PrefixSet(np.array([3, 11]), 10)
