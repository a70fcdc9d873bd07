"""Ordinary least squares via QR decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class CollinearityError(ValueError):
    """Design matrix is rank deficient."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(
            f"collinear regressors: column {column} is linearly dependent on earlier columns"
        )


@dataclass(frozen=True)
class OlsFit:
    coef: np.ndarray
    residuals: np.ndarray
    ssr: float
    stderr: np.ndarray
    df_resid: int


def ols_fit(y: np.ndarray, design: np.ndarray, *, rank_rtol: float = 1e-10) -> OlsFit:
    """Least-squares fit of ``y`` on the columns of ``design``.

    Solves through a QR decomposition rather than the normal equations so
    conditioning of the design enters only once. ``design`` is expected to
    carry its own intercept column; more rows than columns are required.

    Raises :class:`CollinearityError` naming the first column whose R
    diagonal collapses relative to the largest one.
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(design, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"design must be 2-d, got ndim={x.ndim}")
    if y.ndim != 1:
        raise ValueError(f"response must be 1-d, got ndim={y.ndim}")
    n, p = x.shape
    if y.shape[0] != n:
        raise ValueError(f"response length {y.shape[0]} != design rows {n}")
    if n <= p:
        raise ValueError(f"need more rows than columns, got {n} rows for {p} columns")

    q, r = np.linalg.qr(x)
    diag = np.abs(np.diag(r))
    threshold = rank_rtol * diag.max() if diag.max() > 0 else 0.0
    small = np.flatnonzero(diag <= threshold)
    if diag.max() == 0.0 or small.size:
        raise CollinearityError(int(small[0]) if small.size else 0)

    coef = np.linalg.solve(r, q.T @ y)
    residuals = y - x @ coef
    ssr = float(residuals @ residuals)

    df_resid = n - p
    r_inv = np.linalg.solve(r, np.eye(p))
    sigma2 = ssr / df_resid
    stderr = np.sqrt(sigma2 * np.sum(r_inv * r_inv, axis=1))
    return OlsFit(coef=coef, residuals=residuals, ssr=ssr, stderr=stderr, df_resid=df_resid)
