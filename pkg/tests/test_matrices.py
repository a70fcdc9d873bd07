"""Dual-horizon correlation matrix assembly and its stationarity screen."""

from __future__ import annotations

import numpy as np
import pytest

from coinsignal.econometrics.matrices import return_correlation_matrix
from coinsignal.econometrics.special import t_pvalue_two_sided


def pearson_reference(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    da = a - a.mean()
    db = b - b.mean()
    return float(da @ db / np.sqrt((da @ da) * (db @ db)))


def make_panels(seed, coins, n_hourly=400, n_weekly=30):
    rng = np.random.default_rng(seed)
    hourly = {c: rng.normal(size=n_hourly) for c in coins}
    weekly = {c: rng.normal(size=n_weekly) for c in coins}
    return hourly, weekly


class TestAssembly:
    def test_diagonal_is_exact_one(self):
        hourly, weekly = make_panels(0, ["aaa", "bbb", "ccc"])
        m = return_correlation_matrix(hourly, weekly, ["aaa", "bbb", "ccc"])
        assert np.all(np.diag(m.values) == 1.0)
        assert np.all(np.diag(m.p_values) == 0.0)

    def test_triangles_match_direct_pearson(self):
        coins = ["ada", "btc", "eth", "sol"]
        hourly, weekly = make_panels(1, coins)
        m = return_correlation_matrix(hourly, weekly, coins)
        for i, ci in enumerate(coins):
            for j, cj in enumerate(coins):
                if i > j:  # lower triangle carries the hourly horizon
                    want = pearson_reference(hourly[ci], hourly[cj])
                elif i < j:
                    want = pearson_reference(weekly[ci], weekly[cj])
                else:
                    continue
                assert m.values[i, j] == pytest.approx(want, abs=1e-12), (ci, cj)

    def test_identical_series_correlate_to_one_in_both_triangles(self):
        rng = np.random.default_rng(2)
        h = rng.normal(size=300)
        w = rng.normal(size=25)
        hourly = {"xx": h, "yy": h.copy()}
        weekly = {"xx": w, "yy": w.copy()}
        m = return_correlation_matrix(hourly, weekly, ["xx", "yy"])
        assert m.values[1, 0] == pytest.approx(1.0, abs=1e-12)
        assert m.values[0, 1] == pytest.approx(1.0, abs=1e-12)
        assert m.p_values[1, 0] == 0.0

    def test_p_values_from_t_transform(self):
        coins = ["one", "two"]
        hourly, weekly = make_panels(3, coins, n_hourly=120, n_weekly=20)
        m = return_correlation_matrix(hourly, weekly, coins, skip_stationarity_check=True)
        r = m.values[1, 0]
        n = 120
        t = r * np.sqrt((n - 2) / (1.0 - r * r))
        assert m.p_values[1, 0] == pytest.approx(t_pvalue_two_sided(t, n - 2), rel=1e-12)

    def test_coin_order_is_preserved(self):
        coins = ["zzz", "aaa", "mmm"]
        hourly, weekly = make_panels(4, coins)
        m = return_correlation_matrix(hourly, weekly, coins, skip_stationarity_check=True)
        assert m.coins == ("zzz", "aaa", "mmm")


class TestValidation:
    def test_missing_coin_named(self):
        hourly, weekly = make_panels(5, ["btc", "eth"])
        del weekly["eth"]
        with pytest.raises(ValueError, match="eth"):
            return_correlation_matrix(hourly, weekly, ["btc", "eth"])

    def test_length_mismatch_named(self):
        hourly, weekly = make_panels(6, ["btc", "eth"])
        hourly["eth"] = hourly["eth"][:-10]
        with pytest.raises(ValueError, match="eth"):
            return_correlation_matrix(hourly, weekly, ["btc", "eth"])

    def test_too_few_coins_rejected(self):
        hourly, weekly = make_panels(7, ["btc"])
        with pytest.raises(ValueError):
            return_correlation_matrix(hourly, weekly, ["btc"])


class TestStationarityScreen:
    def test_random_walk_inputs_blocked_by_default(self):
        coins = ["btc", "eth"]
        rng = np.random.default_rng(8)
        hourly = {c: np.cumsum(rng.normal(size=400)) for c in coins}
        weekly = {c: rng.normal(size=30) for c in coins}
        with pytest.raises(ValueError, match="stationar"):
            return_correlation_matrix(hourly, weekly, coins)

    def test_override_records_warnings(self):
        coins = ["btc", "eth"]
        rng = np.random.default_rng(9)
        hourly = {c: np.cumsum(rng.normal(size=400)) for c in coins}
        weekly = {c: rng.normal(size=30) for c in coins}
        m = return_correlation_matrix(
            hourly, weekly, coins, skip_stationarity_check=True
        )
        assert m.stationarity_override
        assert m.warnings
        assert any("btc" in w for w in m.warnings)

    def test_stationary_inputs_pass_clean(self):
        coins = ["btc", "eth", "sol"]
        hourly, weekly = make_panels(10, coins, n_weekly=80)
        m = return_correlation_matrix(hourly, weekly, coins)
        assert not m.stationarity_override
        assert not m.warnings
