"""OLS with Bartlett-kernel HAC covariances.

The long-run variance and sandwich conventions here are shared by the
policy-rule GMM, the expectations regressions, and the local
projections: Bartlett weights 1 - l/(L+1), no small-sample
degrees-of-freedom corrections anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import InsufficientData, RankDeficient, WeightingSingular
from .io import TimeSeriesFrame

#: Condition-number ceiling beyond which a weighting matrix is treated as
#: numerically singular.
_MAX_CONDITION = 1e12


@dataclass(frozen=True)
class HacOptions:
    """Bartlett-kernel HAC settings.

    Parameters
    ----------
    bandwidth : int
        Lag truncation L; lag l in 0..L gets weight 1 - l/(L+1). Zero
        collapses the kernel to the heteroskedasticity-only sandwich.
    """

    bandwidth: int = 4

    def __post_init__(self) -> None:
        if self.bandwidth < 0:
            raise ValueError("bandwidth must be >= 0")

    def weights(self) -> np.ndarray:
        lags = np.arange(self.bandwidth + 1)
        return 1.0 - lags / (self.bandwidth + 1.0)


@dataclass(frozen=True)
class RegressionData:
    """Aligned dependent, regressor, and instrument arrays.

    Instruments include the exogenous regressors; `endogenous` marks the
    single regressor column excluded from the instrument list (None for a
    pure OLS problem, where `instruments` may be omitted entirely).
    """

    y: np.ndarray = field(repr=False)
    regressors: np.ndarray = field(repr=False)
    regressor_names: tuple[str, ...]
    instruments: np.ndarray | None = field(default=None, repr=False)
    instrument_names: tuple[str, ...] = ()
    endogenous: int | None = None

    def __post_init__(self) -> None:
        t = self.y.shape[0]
        if self.y.ndim != 1 or self.regressors.shape[0] != t:
            raise ValueError("dependent and regressors disagree on rows")
        if self.regressors.shape[1] != len(self.regressor_names):
            raise ValueError("regressor names do not match columns")
        if self.instruments is not None:
            if self.instruments.shape[0] != t:
                raise ValueError("instruments disagree on rows")
            if self.instruments.shape[1] != len(self.instrument_names):
                raise ValueError("instrument names do not match columns")
            if self.instruments.shape[1] < self.regressors.shape[1]:
                raise ValueError("need at least as many instruments as "
                                 "regressors")
        if self.endogenous is not None:
            if not 0 <= self.endogenous < self.regressors.shape[1]:
                raise ValueError("endogenous index out of range")

    @property
    def nobs(self) -> int:
        return self.y.shape[0]

    def excluded_instruments(self) -> tuple[int, ...]:
        """Indices of instrument columns that are not regressors."""
        included = set(self.regressor_names)
        return tuple(j for j, name in enumerate(self.instrument_names)
                     if name not in included)


@dataclass(frozen=True)
class GmmResult:
    """Point estimates with HAC inference and overidentification stats."""

    coefficients: np.ndarray
    names: tuple[str, ...]
    se: np.ndarray
    covariance: np.ndarray = field(repr=False)
    j_stat: float
    nobs: int
    residuals: np.ndarray = field(repr=False)
    fitted: np.ndarray = field(repr=False)
    bootstrap_p: float | None = None
    first_stage: float | None = None

    def tidy(self) -> dict[str, float]:
        out = {f"{name}": float(b)
               for name, b in zip(self.names, self.coefficients)}
        out.update({f"se_{name}": float(s)
                    for name, s in zip(self.names, self.se)})
        return out


def bartlett_lrv(moments: np.ndarray, hac: HacOptions) -> np.ndarray:
    """Bartlett long-run variance of a (T, m) moment array.

    Returns (1/T) sum g g' plus the kernel-weighted autocovariances,
    symmetrized against accumulation noise.
    """
    t = moments.shape[0]
    s = moments.T @ moments / t
    for lag in range(1, min(hac.bandwidth, t - 1) + 1):
        w = 1.0 - lag / (hac.bandwidth + 1.0)
        gamma = moments[lag:].T @ moments[:-lag] / t
        s = s + w * (gamma + gamma.T)
    return 0.5 * (s + s.T)


def _check_rank(matrix: np.ndarray, what: str) -> None:
    if np.linalg.matrix_rank(matrix) < matrix.shape[1]:
        raise RankDeficient(f"{what} matrix is rank deficient")


def _solve_spd(matrix: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(matrix)) or \
            np.linalg.cond(matrix) > _MAX_CONDITION:
        raise WeightingSingular(f"{what} is numerically singular")
    return np.linalg.solve(matrix, rhs)


def ols_hac(data: RegressionData, hac: HacOptions) -> GmmResult:
    """OLS with a Bartlett HAC sandwich covariance.

    The covariance is (X'X/T)^-1 S (X'X/T)^-1 / T where S is the
    long-run variance of the score x_t e_t. With bandwidth zero this is
    the heteroskedasticity-only sandwich.
    """
    x = data.regressors
    _check_rank(x, "regressor")
    t = data.nobs
    xtx = x.T @ x
    beta = np.linalg.solve(xtx, x.T @ data.y)
    fitted = x @ beta
    resid = data.y - fitted
    s = bartlett_lrv(x * resid[:, None], hac)
    bread = np.linalg.inv(xtx / t)
    cov = bread @ s @ bread / t
    cov = 0.5 * (cov + cov.T)
    return GmmResult(
        coefficients=beta, names=data.regressor_names,
        se=np.sqrt(np.clip(np.diag(cov), 0.0, None)), covariance=cov,
        j_stat=0.0, nobs=t, residuals=resid, fitted=fitted,
    )


@dataclass(frozen=True)
class ExpectationsResult:
    """OLS slope of an expectation series on its lag and the score."""

    coefficients: np.ndarray
    names: tuple[str, ...]
    se_hac: np.ndarray
    p_hac: np.ndarray
    se_plain: np.ndarray
    p_plain: np.ndarray
    nobs: int


def expectations_regression(frame: TimeSeriesFrame, expectation: str,
                            sentiment: str,
                            hac: HacOptions) -> ExpectationsResult:
    """Regress an expectation series on an intercept, its own lag, and
    the sentiment score, reporting plain and HAC inference side by side.
    """
    z = np.asarray(frame.column(expectation), dtype=float)
    s = np.asarray(frame.column(sentiment), dtype=float)
    y = z[1:]
    x = np.column_stack([np.ones(y.shape[0]), z[:-1], s[1:]])
    keep = np.isfinite(y) & np.all(np.isfinite(x), axis=1)
    y, x = y[keep], x[keep]
    if y.shape[0] < 10:
        raise InsufficientData("need at least 10 usable rows")
    names = ("const", "own_lag", "sentiment")
    result = ols_hac(RegressionData(y=y, regressors=x,
                                    regressor_names=names), hac)
    t = y.shape[0]
    dof = t - x.shape[1]
    sigma2 = float(result.residuals @ result.residuals) / dof
    plain_cov = sigma2 * np.linalg.inv(x.T @ x)
    se_plain = np.sqrt(np.diag(plain_cov))
    def zscores(se: np.ndarray) -> np.ndarray:
        # A zero SE means an exact fit: the statistic is infinite unless
        # the coefficient itself is zero.
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = result.coefficients / se
        exact = np.where(result.coefficients == 0.0, 0.0, np.inf)
        return np.where(se > 0, ratio, exact)

    z_hac = zscores(result.se)
    z_plain = zscores(se_plain)
    return ExpectationsResult(
        coefficients=result.coefficients, names=names,
        se_hac=result.se, p_hac=2.0 * stats.norm.sf(np.abs(z_hac)),
        se_plain=se_plain, p_plain=2.0 * stats.norm.sf(np.abs(z_plain)),
        nobs=t,
    )
