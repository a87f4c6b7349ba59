"""Local-projection impulse responses with HAC bands."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InsufficientData
from .io import TimeSeriesFrame
from .regression import HacOptions, RegressionData, ols_hac

#: Normal critical values for the 68% and 90% bands.
Z68 = 0.9944578832097532
Z90 = 1.6448536269514722


@dataclass(frozen=True)
class LpResult:
    """Per-horizon projection coefficients with 68% and 90% HAC bands."""

    outcome: str
    shock: str
    horizons: np.ndarray
    coefficients: np.ndarray
    se: np.ndarray
    lo68: np.ndarray = field(repr=False)
    hi68: np.ndarray = field(repr=False)
    lo90: np.ndarray = field(repr=False)
    hi90: np.ndarray = field(repr=False)
    nobs: np.ndarray = field(repr=False)


def lp_irf(frame: TimeSeriesFrame, outcome: str, shock: str,
           controls: Sequence[str] = (), horizons: int = 20,
           shock_lags: int = 12,
           hac: HacOptions = HacOptions(4)) -> LpResult:
    """Project cumulative outcome changes on the shock, horizon by horizon.

    At each h the dependent variable is y_{t+h} - y_{t-1} and the
    regressors are an intercept, the period-t shock, `shock_lags` of its
    own lags, and one lag of each control. The shock coefficient traces
    the impulse response; bands use the Bartlett HAC standard error.
    """
    if horizons < 0:
        raise ValueError("horizons must be >= 0")
    if shock_lags < 0:
        raise ValueError("shock_lags must be >= 0")
    y = np.asarray(frame.column(outcome), dtype=float)
    eps = np.asarray(frame.column(shock), dtype=float)
    ctrl = [np.asarray(frame.column(name), dtype=float) for name in controls]
    t_total = y.shape[0]
    start = max(shock_lags, 1)
    k = 2 + shock_lags + len(ctrl)

    n_h = horizons + 1
    coef = np.empty(n_h)
    se = np.empty(n_h)
    nobs = np.empty(n_h, dtype=int)
    names = ("const", "shock",
             *(f"shock_lag{l}" for l in range(1, shock_lags + 1)),
             *(f"{name}_lag1" for name in controls))
    for h in range(n_h):
        rows = np.arange(start, t_total - h)
        blocks = [np.ones(rows.shape[0]), eps[rows]]
        blocks += [eps[rows - lag] for lag in range(1, shock_lags + 1)]
        blocks += [series[rows - 1] for series in ctrl]
        x = np.column_stack(blocks)
        d = y[rows + h] - y[rows - 1]
        keep = np.isfinite(d) & np.all(np.isfinite(x), axis=1)
        d, x = d[keep], x[keep]
        if d.shape[0] < k + 10:
            raise InsufficientData(
                f"horizon {h} leaves {d.shape[0]} usable rows")
        result = ols_hac(
            RegressionData(y=d, regressors=x, regressor_names=names), hac)
        coef[h] = result.coefficients[1]
        se[h] = result.se[1]
        nobs[h] = result.nobs
    return LpResult(
        outcome=outcome, shock=shock, horizons=np.arange(n_h),
        coefficients=coef, se=se,
        lo68=coef - Z68 * se, hi68=coef + Z68 * se,
        lo90=coef - Z90 * se, hi90=coef + Z90 * se, nobs=nobs,
    )
