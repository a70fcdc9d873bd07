"""Augmented Dickey-Fuller unit-root test (constant, no trend).

Rejection of the null means the series has no unit root, i.e. it is
stationary around a constant mean. Decisions are made against the
MacKinnon (2010) response-surface critical values for the constant-only
regression; no interpolated p-value is produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from coinsignal.econometrics.ols import ols_fit

# MacKinnon (2010), "Critical Values for Cointegration Tests", constant-only
# case, one variable. crit(T) = b0 + b1/T + b2/T^2 + b3/T^3.
_CRIT_SURFACE = {
    "1%": (-3.43035, -6.5393, -16.786, -79.433),
    "5%": (-2.86154, -2.8903, -4.234, -40.040),
    "10%": (-2.56677, -1.5384, -2.809, 0.0),
}

_MIN_LENGTH = 25


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    chosen_lag: int
    n_obs: int
    critical_values: dict[str, float]
    reject: dict[str, bool]


def _critical_values(n_obs: int) -> dict[str, float]:
    out = {}
    for level, (b0, b1, b2, b3) in _CRIT_SURFACE.items():
        t = float(n_obs)
        out[level] = b0 + b1 / t + b2 / t**2 + b3 / t**3
    return out


def _difference_design(values: np.ndarray, lag: int, start: int):
    """Rows ``start``.. of the ADF regression at augmentation order ``lag``.

    Response is the first difference; regressors are a constant, the lagged
    level, and ``lag`` lagged differences. ``start`` indexes into the
    difference series and must be >= lag.
    """
    dv = np.diff(values)
    m = dv.shape[0]
    response = dv[start:]
    rows = m - start
    cols = [np.ones(rows), values[start : start + rows]]
    for j in range(1, lag + 1):
        cols.append(dv[start - j : start - j + rows])
    return response, np.column_stack(cols)


def adf_test(series: np.ndarray, max_lag: int | None = None) -> AdfResult:
    """Run the ADF regression with AIC-selected augmentation order.

    The default lag bound is the Schwert rule floor(12 * (n/100)^(1/4)).
    Candidate orders are compared on a common sample (all trimmed to the
    largest candidate) so their information criteria are comparable; the
    chosen order is then refit on every usable row.
    """
    v = np.asarray(series, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"series must be 1-d, got ndim={v.ndim}")
    n = v.shape[0]
    if n < _MIN_LENGTH:
        raise ValueError(f"series too short for ADF: {n} < {_MIN_LENGTH}")
    if not np.all(np.isfinite(v)):
        raise ValueError("series contains non-finite values")
    if np.ptp(v) == 0.0:
        raise ValueError("zero variance: series is constant")

    if max_lag is None:
        max_lag = int(math.floor(12.0 * (n / 100.0) ** 0.25))
    if max_lag < 0:
        raise ValueError(f"max_lag must be >= 0, got {max_lag}")
    # largest regression has max_lag + 2 parameters on n - 1 - max_lag rows
    if n - 1 - max_lag <= max_lag + 2:
        raise ValueError(
            f"series too short for max_lag={max_lag}: need n > {2 * max_lag + 3}, got {n}"
        )

    best_lag = 0
    best_aic = math.inf
    for p in range(0, max_lag + 1):
        response, design = _difference_design(v, p, start=max_lag)
        fit = ols_fit(response, design)
        rows = response.shape[0]
        # a perfect fit dominates any finite criterion
        aic = -math.inf if fit.ssr <= 0.0 else rows * math.log(fit.ssr / rows) + 2 * design.shape[1]
        if aic < best_aic:
            best_aic = aic
            best_lag = p

    response, design = _difference_design(v, best_lag, start=best_lag)
    fit = ols_fit(response, design)
    if fit.stderr[1] == 0.0:
        raise ValueError("degenerate regression: zero residual variance")
    statistic = float(fit.coef[1] / fit.stderr[1])
    n_obs = response.shape[0]

    crit = _critical_values(n_obs)
    reject = {level: statistic < crit[level] for level in crit}
    return AdfResult(
        statistic=statistic,
        chosen_lag=best_lag,
        n_obs=n_obs,
        critical_values=crit,
        reject=reject,
    )
