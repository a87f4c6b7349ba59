"""Two-step GMM for the sentiment-augmented policy rule.

The rule regresses the policy rate on its own lag, the neutral-rate
proxy, the two staff forecasts, and the sentiment score, treating the
score as the single endogenous column. Instrument sets are built from
lags of series that predate the period-t shocks.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InsufficientData, RankDeficient, WeightingSingular
from .io import TimeSeriesFrame
from .regression import (
    GmmResult,
    HacOptions,
    RegressionData,
    _check_rank,
    _solve_spd,
    bartlett_lrv,
    ols_hac,
)


class InstrumentSetKind(str, Enum):
    """Named instrument menus for the policy-rule GMM."""

    RICH = "rich"
    FORECAST_REVISION = "forecast_revision"
    CLOSE = "close"
    DISTANT = "distant"
    CUSTOM = "custom"


@dataclass(frozen=True)
class TaylorColumns:
    """Column names binding a frame to the policy-rule variables."""

    rate: str = "rate"
    inflation_gap: str = "inflation_gap"
    output_gap: str = "output_gap"
    neutral: str = "neutral_rate"
    forecast_inflation: str = "forecast_inflation"
    forecast_output: str = "forecast_output"
    rev_inflation: str = "rev_inflation"
    rev_output: str = "rev_output"
    sentiment: str = "sentiment"


def _excluded_menu(kind: InstrumentSetKind, cols: TaylorColumns,
                   custom: Sequence[tuple[str, int]] | None,
                   ) -> list[tuple[str, int]]:
    if kind is InstrumentSetKind.RICH:
        return ([(cols.rate, lag) for lag in range(2, 6)]
                + [(cols.inflation_gap, lag) for lag in range(1, 5)]
                + [(cols.output_gap, lag) for lag in range(1, 5)])
    if kind is InstrumentSetKind.CLOSE:
        return ([(cols.rate, lag) for lag in (2, 3)]
                + [(cols.inflation_gap, lag) for lag in (1, 2)]
                + [(cols.output_gap, lag) for lag in (1, 2)])
    if kind is InstrumentSetKind.DISTANT:
        return ([(cols.rate, lag) for lag in (4, 5)]
                + [(cols.inflation_gap, lag) for lag in (3, 4)]
                + [(cols.output_gap, lag) for lag in (3, 4)])
    if kind is InstrumentSetKind.FORECAST_REVISION:
        # Revisions are dated by arrival, so the pre-period revision is
        # the first lag of the revision column.
        return [(cols.rate, 2), (cols.rev_inflation, 1),
                (cols.rev_output, 1)]
    if custom is None or not custom:
        raise ValueError("custom instrument set needs (column, lag) pairs")
    for _, lag in custom:
        if lag < 1:
            raise ValueError("custom instrument lags must be >= 1")
    return list(custom)


def taylor_rule_data(frame: TimeSeriesFrame,
                     kind: InstrumentSetKind | None = None,
                     columns: TaylorColumns = TaylorColumns(),
                     custom: Sequence[tuple[str, int]] | None = None,
                     ) -> RegressionData:
    """Build the policy-rule estimation arrays from a panel.

    The regressors are the intercept, the first rate lag, the
    neutral-rate proxy, both staff forecasts, and the sentiment score.
    With `kind` given, the instrument matrix holds the exogenous
    regressors plus the menu's excluded lags; without it the data suit
    plain OLS.
    """
    menu = _excluded_menu(kind, columns, custom) if kind is not None else []
    max_lag = max([1] + [lag for _, lag in menu])
    series = {name: np.asarray(frame.column(name), dtype=float)
              for name in {columns.rate, columns.neutral,
                           columns.forecast_inflation,
                           columns.forecast_output, columns.sentiment,
                           *(name for name, _ in menu)}}
    t = frame.dates.shape[0]
    rows = np.arange(max_lag, t)
    ones = np.ones(rows.shape[0])

    y = series[columns.rate][rows]
    regs = np.column_stack([
        ones,
        series[columns.rate][rows - 1],
        series[columns.neutral][rows],
        series[columns.forecast_inflation][rows],
        series[columns.forecast_output][rows],
        series[columns.sentiment][rows],
    ])
    reg_names = ("const", "rate_lag", columns.neutral,
                 columns.forecast_inflation, columns.forecast_output,
                 columns.sentiment)

    instruments = None
    inst_names: tuple[str, ...] = ()
    if kind is not None:
        blocks = [regs[:, :5]]
        names = list(reg_names[:5])
        for name, lag in menu:
            blocks.append(series[name][rows - lag][:, None])
            names.append(f"{name}_lag{lag}")
        instruments = np.hstack(blocks)
        inst_names = tuple(names)

    keep = np.isfinite(y) & np.all(np.isfinite(regs), axis=1)
    if instruments is not None:
        keep &= np.all(np.isfinite(instruments), axis=1)
    y, regs = y[keep], regs[keep]
    if instruments is not None:
        instruments = instruments[keep]
    if y.shape[0] < regs.shape[1] + 10:
        raise InsufficientData("too few usable rows for the policy rule")
    return RegressionData(
        y=y, regressors=regs, regressor_names=reg_names,
        instruments=instruments, instrument_names=inst_names,
        endogenous=5,
    )


def _two_step_core(y: np.ndarray, x: np.ndarray, z: np.ndarray,
                   hac: HacOptions) -> tuple[np.ndarray, np.ndarray,
                                             np.ndarray, float]:
    """Two-step GMM returning (beta, covariance, residuals, J)."""
    t = y.shape[0]
    zty = z.T @ y / t
    ztx = z.T @ x / t

    # Step 1: 2SLS, i.e. weighting by the inverse instrument second moment.
    w1 = z.T @ z / t
    a1 = ztx.T @ _solve_spd(w1, ztx, "instrument second-moment matrix")
    b1 = ztx.T @ _solve_spd(w1, zty, "instrument second-moment matrix")
    _check_rank(a1, "first-step projection")
    beta1 = np.linalg.solve(a1, b1)

    # Step 2: reweight by the inverse HAC variance of the step-1 moments.
    moments = z * (y - x @ beta1)[:, None]
    s = bartlett_lrv(moments, hac)
    a2 = ztx.T @ _solve_spd(s, ztx, "moment long-run variance")
    b2 = ztx.T @ _solve_spd(s, zty, "moment long-run variance")
    beta = np.linalg.solve(a2, b2)
    resid = y - x @ beta
    gbar = z.T @ resid / t
    j = float(t * gbar @ _solve_spd(s, gbar, "moment long-run variance"))
    cov = np.linalg.inv(a2) / t
    cov = 0.5 * (cov + cov.T)
    return beta, cov, resid, max(j, 0.0)


def gmm_two_step(data: RegressionData, hac: HacOptions) -> GmmResult:
    """Two-step efficient GMM for a linear moment condition E[z e] = 0.

    Step one is 2SLS; step two weights by the inverse Bartlett HAC
    covariance of the step-one moments, and the Hansen J statistic is
    T gbar' W gbar at the second-step estimate. Exactly identified
    problems collapse to IV (and to OLS when instruments equal the
    regressors) with J numerically zero.
    """
    if data.instruments is None:
        raise ValueError("GMM needs an instrument matrix")
    _check_rank(data.regressors, "regressor")
    _check_rank(data.instruments, "instrument")
    beta, cov, resid, j = _two_step_core(
        data.y, data.regressors, data.instruments, hac)
    return GmmResult(
        coefficients=beta, names=data.regressor_names,
        se=np.sqrt(np.clip(np.diag(cov), 0.0, None)), covariance=cov,
        j_stat=j, nobs=data.nobs, residuals=resid,
        fitted=data.y - resid,
    )


def first_stage_f(data: RegressionData, hac: HacOptions) -> float:
    """HAC-robust first-stage F for the excluded instruments.

    Regresses the endogenous column on the full instrument matrix and
    forms the Wald statistic of the excluded instruments' coefficients
    divided by their count.
    """
    if data.instruments is None or data.endogenous is None:
        raise ValueError("first stage needs instruments and an endogenous "
                         "column")
    excluded = data.excluded_instruments()
    if not excluded:
        raise ValueError("no excluded instruments to test")
    first = ols_hac(
        RegressionData(
            y=data.regressors[:, data.endogenous],
            regressors=data.instruments,
            regressor_names=data.instrument_names,
        ),
        hac,
    )
    idx = np.asarray(excluded)
    coef = first.coefficients[idx]
    block = first.covariance[np.ix_(idx, idx)]
    wald = coef @ _solve_spd(block, coef, "excluded-coefficient covariance")
    return float(wald / len(excluded))


@dataclass(frozen=True)
class BootstrapJResult:
    """Block wild bootstrap distribution summary for the J statistic."""

    p_value: float
    j_observed: float
    resamples: int
    failures: int
    unreliable: bool


def bootstrap_j(data: RegressionData, hac: HacOptions, resamples: int = 199,
                block_len: int | None = None,
                seed: int | None = None) -> BootstrapJResult:
    """Block wild Rademacher bootstrap p-value for the Hansen J test.

    Second-step residuals are flipped blockwise (non-overlapping blocks,
    default length equal to the HAC bandwidth, trailing partial block
    with its own sign), the dependent variable is rebuilt as fitted plus
    flipped residual, and the two-step estimator is re-run. Resamples
    where re-estimation fails are dropped; more than 10% failures flags
    the p-value unreliable.
    """
    if resamples < 1:
        raise ValueError("resamples must be >= 1")
    length = block_len if block_len is not None else max(hac.bandwidth, 1)
    if length < 1:
        raise ValueError("block length must be >= 1")
    base = gmm_two_step(data, hac)
    t = data.nobs
    n_blocks = -(-t // length)  # ceiling division, partial block included
    rng = np.random.default_rng(seed)
    exceed = 0
    kept = 0
    failures = 0
    for _ in range(resamples):
        flips = rng.choice([-1.0, 1.0], size=n_blocks)
        signs = np.repeat(flips, length)[:t]
        y_star = base.fitted + signs * base.residuals
        try:
            j_star = _two_step_core(y_star, data.regressors,
                                    data.instruments, hac)[3]
        except (RankDeficient, WeightingSingular, np.linalg.LinAlgError):
            failures += 1
            continue
        kept += 1
        if j_star >= base.j_stat:
            exceed += 1
    if kept == 0:
        raise WeightingSingular("every bootstrap resample failed")
    if failures:
        warnings.warn(f"{failures} of {resamples} bootstrap resamples "
                      "failed and were dropped", stacklevel=2)
    return BootstrapJResult(
        p_value=exceed / kept, j_observed=base.j_stat, resamples=resamples,
        failures=failures, unreliable=failures > 0.1 * resamples,
    )
