"""Numerical kernel: least squares, tail probabilities, stationarity and
causality tests, lagged cross-correlation, and return-correlation matrices."""

from coinsignal.econometrics.special import (
    betainc_regularized,
    f_pvalue,
    t_pvalue_two_sided,
)
from coinsignal.econometrics.ols import CollinearityError, OlsFit, ols_fit
from coinsignal.econometrics.adf import AdfResult, adf_test
from coinsignal.econometrics.granger import (
    GrangerResult,
    GrangerScanRow,
    VarEquation,
    VarModel,
    fit_var_pair,
    granger_scan,
    granger_test,
)
from coinsignal.econometrics.xcorr import (
    CrossCorrelationSeries,
    BestLagResult,
    cross_correlation,
    lag_scan,
    best_lag_scan,
    pearson,
)
from coinsignal.econometrics.matrices import (
    ReturnCorrelationMatrix,
    return_correlation_matrix,
)

__all__ = [
    "AdfResult",
    "BestLagResult",
    "CollinearityError",
    "CrossCorrelationSeries",
    "GrangerResult",
    "GrangerScanRow",
    "OlsFit",
    "ReturnCorrelationMatrix",
    "VarEquation",
    "VarModel",
    "adf_test",
    "best_lag_scan",
    "betainc_regularized",
    "cross_correlation",
    "f_pvalue",
    "fit_var_pair",
    "granger_scan",
    "granger_test",
    "lag_scan",
    "ols_fit",
    "pearson",
    "return_correlation_matrix",
    "t_pvalue_two_sided",
]
