"""Pairwise vector autoregression and lagged-predictability tests.

The two-variable system is fit equation by equation with ordinary least
squares. The causality check compares the unrestricted equation (own lags
plus the candidate predictor's lags) against the restricted one (own lags
only) through an F test; one test is run per lag order, each on its own
lag-aligned sample.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from coinsignal.econometrics.ols import ols_fit
from coinsignal.econometrics.special import f_pvalue

# unexplained share of response variance below which a fit counts as exact
_PERFECT_FIT_RTOL = 1e-14


@dataclass(frozen=True)
class VarEquation:
    """One fitted equation: response on intercept, own lags, cross lags."""

    intercept: float
    own_coefs: np.ndarray
    cross_coefs: np.ndarray
    residuals: np.ndarray
    ssr: float


@dataclass(frozen=True)
class VarModel:
    lag: int
    n_obs: int
    y_equation: VarEquation
    x_equation: VarEquation


@dataclass(frozen=True)
class GrangerResult:
    cause: str
    effect: str
    lag: int
    f_statistic: float
    p_value: float
    n_obs: int
    degenerate: bool = False


@dataclass(frozen=True)
class GrangerScanRow:
    lag: int
    result: GrangerResult | None
    error: str | None

    @property
    def ok(self) -> bool:
        return self.result is not None


def _lag_columns(series: np.ndarray, k: int) -> np.ndarray:
    """Columns [v_{t-1}, ..., v_{t-k}] for rows t = k..n-1."""
    n = series.shape[0]
    return np.column_stack([series[k - j : n - j] for j in range(1, k + 1)])


def _check_pair(x: np.ndarray, y: np.ndarray, k: int) -> None:
    if k < 1:
        raise ValueError(f"lag order must be >= 1, got {k}")
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"series must be 1-d and equally long, got {x.shape} vs {y.shape}")
    n = x.shape[0]
    # 2k + 1 parameters must leave residual degrees of freedom
    if n - k <= 2 * k + 2:
        raise ValueError(
            f"series too short for lag {k}: need length > {3 * k + 2}, got {n}"
        )


def fit_var_pair(x: np.ndarray, y: np.ndarray, k: int) -> VarModel:
    """Fit the two-equation lag-k system for series ``x`` and ``y``.

    Both equations share the sample t = k..n-1, so n_obs = n - k.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_pair(x, y, k)
    n = x.shape[0]

    y_lags = _lag_columns(y, k)
    x_lags = _lag_columns(x, k)
    ones = np.ones(n - k)

    eqs = []
    for response, own, cross in ((y[k:], y_lags, x_lags), (x[k:], x_lags, y_lags)):
        fit = ols_fit(response, np.column_stack([ones, own, cross]))
        eqs.append(
            VarEquation(
                intercept=float(fit.coef[0]),
                own_coefs=fit.coef[1 : k + 1].copy(),
                cross_coefs=fit.coef[k + 1 :].copy(),
                residuals=fit.residuals,
                ssr=fit.ssr,
            )
        )
    return VarModel(lag=k, n_obs=n - k, y_equation=eqs[0], x_equation=eqs[1])


def granger_test(
    cause: np.ndarray,
    effect: np.ndarray,
    k: int,
    *,
    cause_id: str = "x",
    effect_id: str = "y",
) -> GrangerResult:
    """F test of whether lags of ``cause`` improve the prediction of ``effect``.

    Restricted and unrestricted regressions use the same n - k rows. A
    numerically perfect unrestricted fit is reported as an infinite F with
    p = 0 and the ``degenerate`` flag set instead of a spurious finite value.
    """
    cause = np.asarray(cause, dtype=np.float64)
    effect = np.asarray(effect, dtype=np.float64)
    _check_pair(cause, effect, k)
    n = cause.shape[0]
    n_obs = n - k

    own = _lag_columns(effect, k)
    cross = _lag_columns(cause, k)
    ones = np.ones(n_obs)
    response = effect[k:]

    restricted = ols_fit(response, np.column_stack([ones, own]))
    unrestricted = ols_fit(response, np.column_stack([ones, own, cross]))

    df_denom = n_obs - 2 * k - 1
    ssr_r = restricted.ssr
    ssr_u = unrestricted.ssr
    # compare against the response's own scale: a perfect fit leaves only
    # rounding residue in ssr_u, and ssr_r may be just as tiny
    tss = float(np.sum((response - response.mean()) ** 2))
    if ssr_u <= 0.0 or ssr_u < _PERFECT_FIT_RTOL * tss:
        return GrangerResult(
            cause=cause_id,
            effect=effect_id,
            lag=k,
            f_statistic=math.inf,
            p_value=0.0,
            n_obs=n_obs,
            degenerate=True,
        )
    # nesting guarantees ssr_r >= ssr_u; clamp the rounding residue
    f_stat = max(((ssr_r - ssr_u) / k) / (ssr_u / df_denom), 0.0)
    return GrangerResult(
        cause=cause_id,
        effect=effect_id,
        lag=k,
        f_statistic=f_stat,
        p_value=f_pvalue(f_stat, k, df_denom),
        n_obs=n_obs,
    )


def granger_scan(
    cause: np.ndarray,
    effect: np.ndarray,
    max_lag: int = 24,
    *,
    cause_id: str = "x",
    effect_id: str = "y",
    workers: int = 1,
) -> list[GrangerScanRow]:
    """One causality test per lag order 1..max_lag, sorted by lag.

    Per-lag failures (too-short sample, collinear design) become row-level
    markers rather than aborting the scan. Lags are independent, so the
    worker count never changes the numbers, only the wall clock.
    """
    if max_lag < 1:
        raise ValueError(f"max_lag must be >= 1, got {max_lag}")

    def run(k: int) -> GrangerScanRow:
        try:
            result = granger_test(
                cause, effect, k, cause_id=cause_id, effect_id=effect_id
            )
        except ValueError as exc:  # includes CollinearityError
            return GrangerScanRow(lag=k, result=None, error=str(exc))
        return GrangerScanRow(lag=k, result=result, error=None)

    lags = range(1, max_lag + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, lags))
    else:
        rows = [run(k) for k in lags]
    return rows
