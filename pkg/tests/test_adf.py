"""Unit-root test behavior on processes with known stationarity."""

from __future__ import annotations

import numpy as np
import pytest

from coinsignal.econometrics.adf import adf_test


def random_walk(rng, n):
    return np.cumsum(rng.normal(size=n))


def ar1(rng, n, phi, burn=100):
    e = rng.normal(size=n + burn)
    out = np.empty(n + burn)
    out[0] = e[0]
    for t in range(1, n + burn):
        out[t] = phi * out[t - 1] + e[t]
    return out[burn:]


class TestValidation:
    def test_constant_series_rejected(self):
        with pytest.raises(ValueError, match="zero variance"):
            adf_test(np.full(100, 3.0))

    def test_short_series_rejected(self):
        with pytest.raises(ValueError, match="too short"):
            adf_test(np.arange(10.0))

    def test_nonfinite_rejected(self):
        v = np.random.default_rng(0).normal(size=100)
        v[50] = np.nan
        with pytest.raises(ValueError, match="finite"):
            adf_test(v)

    def test_excessive_lag_rejected(self):
        v = np.random.default_rng(0).normal(size=40)
        with pytest.raises(ValueError):
            adf_test(v, max_lag=30)


class TestKnownProcesses:
    def test_random_walk_rarely_rejected(self):
        # unit root is the null; size should stay near nominal
        rejections = 0
        for seed in range(200):
            rng = np.random.default_rng(seed)
            res = adf_test(random_walk(rng, 500))
            rejections += res.reject["5%"]
        assert rejections / 200 <= 0.10

    def test_stationary_ar1_usually_rejected(self):
        rejections = 0
        for seed in range(200):
            rng = np.random.default_rng(seed)
            res = adf_test(ar1(rng, 500, 0.5))
            rejections += res.reject["5%"]
        assert rejections / 200 >= 0.90

    def test_white_noise_strongly_rejected(self):
        rng = np.random.default_rng(42)
        res = adf_test(rng.normal(size=500))
        assert res.reject["1%"]


class TestResultShape:
    def test_reject_flags_ordered(self):
        # rejecting at a tighter level implies rejecting at looser ones
        for seed in range(30):
            rng = np.random.default_rng(seed)
            series = ar1(rng, 300, 0.8) if seed % 2 else random_walk(rng, 300)
            res = adf_test(series)
            if res.reject["1%"]:
                assert res.reject["5%"]
            if res.reject["5%"]:
                assert res.reject["10%"]

    def test_critical_values_ordered(self):
        res = adf_test(random_walk(np.random.default_rng(1), 200))
        cv = res.critical_values
        assert cv["1%"] < cv["5%"] < cv["10%"] < 0

    def test_statistic_scale_invariant(self):
        rng = np.random.default_rng(9)
        v = random_walk(rng, 400)
        a = adf_test(v)
        b = adf_test(1000.0 * v)
        assert a.statistic == pytest.approx(b.statistic, abs=1e-8)
        assert a.chosen_lag == b.chosen_lag

    def test_chosen_lag_within_bound(self):
        rng = np.random.default_rng(21)
        res = adf_test(random_walk(rng, 500))
        bound = int(12.0 * (500 / 100.0) ** 0.25)
        assert 0 <= res.chosen_lag <= bound
        assert res.n_obs == 500 - 1 - res.chosen_lag

    def test_explicit_lag_respected(self):
        rng = np.random.default_rng(30)
        v = random_walk(rng, 300)
        res = adf_test(v, max_lag=0)
        assert res.chosen_lag == 0
        assert res.n_obs == 299
