"""Lagged cross-correlation between aligned series.

The lag-k coefficient pairs x[i+k] with y[i], so a positive lag lines the
later part of x up against the earlier part of y: y leads x by k steps.
By default means and sums are both taken over the overlap window, which
keeps the coefficient inside [-1, 1] for every lag; the variant with
whole-series means is available for comparison but can leave that range
when the overlap is partial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_MIN_OVERLAP = 3

# resolutions ordered as they win ties in best-lag selection
RESOLUTION_ORDER = ("hourly", "daily")


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Plain correlation coefficient; raises on zero variance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"series must be 1-d and equally long, got {x.shape} vs {y.shape}")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(xc @ xc)
    sy = float(yc @ yc)
    if sx == 0.0 or sy == 0.0:
        raise ValueError("zero variance: correlation undefined")
    return float((xc @ yc) / math.sqrt(sx * sy))


def cross_correlation(
    x: np.ndarray,
    y: np.ndarray,
    k: int,
    *,
    global_means: bool = False,
) -> float:
    """Cross-correlation of x against y at non-negative lag k.

    With the default overlap-window centering this equals the Pearson
    coefficient of (x[k:], y[:n-k]); ``global_means=True`` keeps the sums
    over the overlap but centers with whole-series means.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"series must be 1-d and equally long, got {x.shape} vs {y.shape}")
    if k < 0:
        raise ValueError(f"lag must be >= 0, got {k}")
    n = x.shape[0]
    if n - k < _MIN_OVERLAP:
        raise ValueError(f"overlap too short at lag {k}: {n - k} < {_MIN_OVERLAP}")

    xs = x[k:]
    ys = y[: n - k]
    if not global_means:
        return pearson(xs, ys)

    xc = xs - x.mean()
    yc = ys - y.mean()
    sx = float(xc @ xc)
    sy = float(yc @ yc)
    if sx == 0.0 or sy == 0.0:
        raise ValueError("zero variance: correlation undefined")
    return float((xc @ yc) / math.sqrt(sx * sy))


@dataclass(frozen=True)
class CrossCorrelationSeries:
    """All lags of one pair at one resolution, plus per-lag error markers."""

    pair: tuple[str, str]
    resolution: str
    values: dict[int, float]
    errors: dict[int, str]
    best: tuple[int, float] | None

    def gamma(self, k: int) -> float:
        return self.values[k]


@dataclass(frozen=True)
class BestLagResult:
    by_resolution: dict[str, CrossCorrelationSeries]
    best: tuple[str, int, float] | None  # (resolution, lag, gamma)


def _pick_best(values: dict[int, float]) -> tuple[int, float] | None:
    """Largest |gamma|, smallest lag on ties."""
    best = None
    for k in sorted(values):
        g = values[k]
        if best is None or abs(g) > abs(best[1]):
            best = (k, g)
    return best


def lag_scan(
    x: np.ndarray,
    y: np.ndarray,
    max_lag: int,
    *,
    pair: tuple[str, str] = ("x", "y"),
    resolution: str = "hourly",
    global_means: bool = False,
) -> CrossCorrelationSeries:
    """Evaluate lags 0..max_lag; zero-variance lags become error markers."""
    if max_lag < 0:
        raise ValueError(f"max_lag must be >= 0, got {max_lag}")
    values: dict[int, float] = {}
    errors: dict[int, str] = {}
    for k in range(0, max_lag + 1):
        try:
            values[k] = cross_correlation(x, y, k, global_means=global_means)
        except ValueError as exc:
            errors[k] = str(exc)
    return CrossCorrelationSeries(
        pair=pair,
        resolution=resolution,
        values=values,
        errors=errors,
        best=_pick_best(values),
    )


def best_lag_scan(
    price_hourly: np.ndarray,
    signal_hourly: np.ndarray,
    price_daily: np.ndarray,
    signal_daily: np.ndarray,
    *,
    hourly_max: int = 24,
    daily_max: int = 7,
    pair: tuple[str, str] = ("price", "signal"),
    global_means: bool = False,
) -> BestLagResult:
    """Scan both horizons with the signal as the leading series.

    Positive lags pair price[t] with signal[t - k]. The overall winner is
    the largest |gamma|; ties break toward the smaller lag, then toward the
    hourly horizon.
    """
    scans = {
        "hourly": lag_scan(
            price_hourly,
            signal_hourly,
            hourly_max,
            pair=pair,
            resolution="hourly",
            global_means=global_means,
        ),
        "daily": lag_scan(
            price_daily,
            signal_daily,
            daily_max,
            pair=pair,
            resolution="daily",
            global_means=global_means,
        ),
    }
    candidates = []
    for res_rank, res in enumerate(RESOLUTION_ORDER):
        for k, g in scans[res].values.items():
            candidates.append((-abs(g), k, res_rank, res, g))
    best = None
    if candidates:
        candidates.sort(key=lambda c: c[:3])
        _, k, _, res, g = candidates[0]
        best = (res, k, g)
    return BestLagResult(by_resolution=scans, best=best)
