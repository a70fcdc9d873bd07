"""Dual-horizon return-correlation matrix.

One square matrix carries both horizons: the lower triangle (row index
greater than column index) holds zero-lag correlations of hourly log
returns, the upper triangle holds the same for weekly-mean log returns,
and the diagonal is exactly 1. Entries are screened for stationarity with
the ADF test unless the caller explicitly overrides, in which case the
override and any failures are recorded on the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from coinsignal.econometrics.adf import adf_test
from coinsignal.econometrics.special import t_pvalue_two_sided
from coinsignal.econometrics.xcorr import pearson


@dataclass(frozen=True)
class ReturnCorrelationMatrix:
    coins: tuple[str, ...]
    values: np.ndarray
    p_values: np.ndarray
    stationarity_override: bool
    warnings: tuple[str, ...]


def _entry_pvalue(r: float, n: int) -> float:
    df = n - 2
    if df < 1:
        raise ValueError(f"too few observations for a p-value: n={n}")
    if abs(r) >= 1.0:
        return 0.0
    t = r * np.sqrt(df / (1.0 - r * r))
    return t_pvalue_two_sided(float(t), df)


def _check_alignment(series: dict[str, np.ndarray], coins: tuple[str, ...], label: str) -> int:
    lengths = {}
    for coin in coins:
        if coin not in series:
            raise ValueError(f"missing {label} return series for coin {coin}")
        arr = np.asarray(series[coin], dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"{label} series for {coin} must be 1-d")
        lengths[coin] = arr.shape[0]
    first = lengths[coins[0]]
    for coin, length in lengths.items():
        if length != first:
            raise ValueError(
                f"misaligned {label} series: coin {coin} has {length} points, "
                f"coin {coins[0]} has {first}"
            )
    return first


def _stationarity_warnings(
    series: dict[str, np.ndarray], coins: tuple[str, ...], label: str
) -> list[str]:
    notes = []
    for coin in coins:
        arr = np.asarray(series[coin], dtype=np.float64)
        try:
            result = adf_test(arr)
        except ValueError as exc:
            notes.append(f"{label} returns for {coin}: ADF not run ({exc})")
            continue
        if not result.reject["5%"]:
            notes.append(
                f"{label} returns for {coin}: ADF failed to reject a unit root at 5% "
                f"(statistic {result.statistic:.4f})"
            )
    return notes


def return_correlation_matrix(
    hourly: dict[str, np.ndarray],
    weekly: dict[str, np.ndarray],
    coin_order: list[str] | tuple[str, ...],
    *,
    skip_stationarity_check: bool = False,
) -> ReturnCorrelationMatrix:
    """Correlation matrix over ``coin_order`` with per-entry p-values.

    Entry p-values come from the t transform of the coefficient with
    n - 2 degrees of freedom, n being the series length at that horizon.
    """
    coins = tuple(coin_order)
    if len(coins) != len(set(coins)):
        raise ValueError("coin order contains duplicates")
    if len(coins) < 2:
        raise ValueError(f"need at least 2 coins, got {len(coins)}")

    n_hourly = _check_alignment(hourly, coins, "hourly")
    n_weekly = _check_alignment(weekly, coins, "weekly")

    warnings = []
    for label, series in (("hourly", hourly), ("weekly", weekly)):
        notes = _stationarity_warnings(series, coins, label)
        if notes and not skip_stationarity_check:
            raise ValueError(
                "stationarity screen failed; rerun with the override to proceed: "
                + "; ".join(notes)
            )
        warnings.extend(notes)

    m = len(coins)
    values = np.eye(m)
    p_values = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            if i > j:
                r = pearson(hourly[coins[i]], hourly[coins[j]])
                n = n_hourly
            else:
                r = pearson(weekly[coins[i]], weekly[coins[j]])
                n = n_weekly
            values[i, j] = r
            p_values[i, j] = _entry_pvalue(r, n)
    return ReturnCorrelationMatrix(
        coins=coins,
        values=values,
        p_values=p_values,
        stationarity_override=skip_stationarity_check,
        warnings=tuple(warnings),
    )
