"""Pairwise lead-lag regression tests on data with planted dependence."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coinsignal.econometrics.granger import fit_var_pair, granger_scan, granger_test


def planted_pair(seed, n, beta=0.8, lag=2, noise=1.0):
    """x white noise, y pulled by x from ``lag`` steps back."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    y = np.zeros(n)
    e = rng.normal(size=n) * noise
    for t in range(lag, n):
        y[t] = 0.5 * y[t - 1] + beta * x[t - lag] + e[t]
    return x, y


class TestVarFit:
    def test_noiseless_coefficients_recovered(self):
        rng = np.random.default_rng(17)
        n = 400
        x = rng.normal(size=n)
        y = np.zeros(n)
        for t in range(1, n):
            y[t] = 1.0 + 0.5 * y[t - 1] + 0.3 * x[t - 1]
        model = fit_var_pair(x, y, 1)
        eq = model.y_equation
        assert eq.intercept == pytest.approx(1.0, abs=1e-8)
        assert eq.own_coefs[0] == pytest.approx(0.5, abs=1e-8)
        assert eq.cross_coefs[0] == pytest.approx(0.3, abs=1e-8)
        assert eq.ssr == pytest.approx(0.0, abs=1e-16)

    def test_sample_size_bookkeeping(self):
        x, y = planted_pair(0, 120)
        model = fit_var_pair(x, y, 3)
        assert model.lag == 3
        assert model.n_obs == 117
        assert len(model.y_equation.residuals) == 117

    def test_too_short_raises(self):
        x, y = planted_pair(0, 11)
        with pytest.raises(ValueError, match="too short"):
            fit_var_pair(x, y, 3)


class TestGrangerTest:
    def test_planted_dependence_detected(self):
        x, y = planted_pair(1, 2000)
        res = granger_test(x, y, 2)
        assert res.p_value < 0.01
        assert not res.degenerate

    def test_reverse_direction_quiet(self):
        # y does not feed back into x, so most seeds stay insignificant
        hits = sum(
            granger_test(planted_pair(s, 2000)[1], planted_pair(s, 2000)[0], 2).p_value < 0.05
            for s in range(40)
        )
        assert hits <= 8

    def test_size_near_nominal_on_independent_noise(self):
        # exact F test under the null: 5% level should reject about 5%
        hits = 0
        trials = 400
        for seed in range(trials):
            rng = np.random.default_rng(seed)
            res = granger_test(rng.normal(size=200), rng.normal(size=200), 2)
            hits += res.p_value < 0.05
        assert 0.025 <= hits / trials <= 0.08

    def test_identifiers_carried(self):
        x, y = planted_pair(2, 100)
        res = granger_test(x, y, 1, cause_id="signal", effect_id="price")
        assert res.cause == "signal"
        assert res.effect == "price"
        assert res.lag == 1
        assert res.n_obs == 99

    def test_affine_invariance(self):
        x, y = planted_pair(3, 300)
        base = granger_test(x, y, 2)
        moved = granger_test(5.0 * x - 7.0, 0.25 * y + 3.0, 2)
        assert moved.f_statistic == pytest.approx(base.f_statistic, rel=1e-8)
        assert moved.p_value == pytest.approx(base.p_value, rel=1e-6)

    def test_deterministic_effect_flagged_degenerate(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=100)
        y = np.arange(100, dtype=float)  # ssr of the unrestricted fit collapses
        res = granger_test(x, y, 1)
        assert res.degenerate
        assert res.p_value == 0.0

    @given(st.integers(0, 10**6), st.integers(1, 3))
    @settings(max_examples=40, deadline=None)
    def test_f_nonnegative(self, seed, lag):
        rng = np.random.default_rng(seed)
        res = granger_test(rng.normal(size=60), rng.normal(size=60), lag)
        assert res.f_statistic >= 0.0
        assert 0.0 <= res.p_value <= 1.0


class TestGrangerScan:
    def test_rows_cover_requested_lags(self):
        x, y = planted_pair(4, 300)
        rows = granger_scan(x, y, max_lag=12)
        assert [r.lag for r in rows] == list(range(1, 13))
        assert all(r.ok for r in rows)

    def test_short_series_rows_marked(self):
        x, y = planted_pair(5, 20)
        rows = granger_scan(x, y, max_lag=10)
        for row in rows:
            if row.lag >= 6:  # 20 - k rows cannot support 2k + 1 parameters
                assert not row.ok
                assert row.error is not None
                assert row.result is None
            else:
                assert row.ok

    def test_workers_do_not_change_results(self):
        x, y = planted_pair(6, 500)
        serial = granger_scan(x, y, max_lag=8, workers=1)
        threaded = granger_scan(x, y, max_lag=8, workers=4)
        for a, b in zip(serial, threaded):
            assert a.lag == b.lag
            assert a.result.f_statistic == b.result.f_statistic
            assert a.result.p_value == b.result.p_value

    def test_planted_lag_has_smallest_p(self):
        x, y = planted_pair(7, 2000)
        rows = granger_scan(x, y, max_lag=6)
        best = min(rows, key=lambda r: r.result.p_value)
        assert best.lag == 2
