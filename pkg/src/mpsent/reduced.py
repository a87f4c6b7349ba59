"""Reduced-form VAR estimation and moving-average machinery.

Coefficients are stored as one (1 + n*p) x n matrix whose first row is the
intercept, followed by p stacked lag blocks; column j holds equation j. The
regressor vector at date t is [1, y_{t-1}, ..., y_{t-p}].
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientData, SingularRegressors
from .io import TimeSeriesFrame


@dataclass(frozen=True)
class VarModel:
    """A reduced-form VAR(p): coefficient matrix plus innovation covariance."""

    n: int
    p: int
    phi: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.phi.shape != (1 + self.n * self.p, self.n):
            raise ValueError(f"coefficient matrix has shape {self.phi.shape}, "
                             f"expected {(1 + self.n * self.p, self.n)}")
        if self.sigma.shape != (self.n, self.n):
            raise ValueError("covariance dimension mismatch")
        if np.max(np.abs(self.sigma - self.sigma.T)) > 1e-12:
            raise ValueError("covariance must be symmetric")
        try:
            np.linalg.cholesky(self.sigma)
        except np.linalg.LinAlgError:
            raise ValueError("covariance must be positive definite") from None

    @property
    def intercept(self) -> np.ndarray:
        return self.phi[0]

    def lag_block(self, lag: int) -> np.ndarray:
        """A_lag as an n x n matrix (row = equation, column = variable)."""
        start = 1 + self.n * (lag - 1)
        return self.phi[start:start + self.n].T

    def companion(self) -> np.ndarray:
        n, p = self.n, self.p
        top = np.hstack([self.lag_block(l) for l in range(1, p + 1)])
        bottom = np.eye(n * (p - 1), n * p) if p > 1 else np.empty((0, n))
        return np.vstack([top, bottom]) if p > 1 else top

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.companion()))))

    def is_stable(self) -> bool:
        return self.spectral_radius() < 1.0


@dataclass(frozen=True)
class OlsVar:
    """OLS fit of a VAR along with the pieces the posterior needs."""

    model: VarModel
    y: np.ndarray = field(repr=False)          # (T_eff, n) regressands
    x: np.ndarray = field(repr=False)          # (T_eff, 1 + n*p) regressors
    residuals: np.ndarray = field(repr=False)  # (T_eff, n)
    scatter: np.ndarray = field(repr=False)    # residual cross-product E'E
    xtx: np.ndarray = field(repr=False)
    var_names: tuple[str, ...] = ()
    dates: np.ndarray = field(default=None, repr=False)

    @property
    def t_eff(self) -> int:
        return self.y.shape[0]


def lag_matrix(values: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Trim the first p rows and build [1, y_{t-1}, ..., y_{t-p}] regressors."""
    t, n = values.shape
    y = values[p:]
    blocks = [np.ones((t - p, 1))]
    for lag in range(1, p + 1):
        blocks.append(values[p - lag: t - lag])
    return y, np.hstack(blocks)


def fit_ols_var(frame: TimeSeriesFrame, p: int) -> OlsVar:
    """Equation-by-equation OLS with an intercept.

    Raises
    ------
    InsufficientData
        Too few usable rows after lag trimming, or missing values.
    SingularRegressors
        The regressor matrix is rank deficient (for instance a constant
        variable, whose lags are collinear with the intercept).
    """
    if p < 1:
        raise ValueError(f"lag order must be >= 1, got {p}")
    values = frame.values()
    if np.isnan(values).any():
        raise InsufficientData("frame contains missing values")
    n = values.shape[1]
    t_eff = values.shape[0] - p
    if t_eff < n * p + n + 10:
        raise InsufficientData(
            f"{t_eff} usable rows after lag trimming, need >= {n * p + n + 10}"
        )

    y, x = lag_matrix(values, p)
    if np.linalg.matrix_rank(x) < x.shape[1]:
        raise SingularRegressors("regressor matrix is rank deficient")
    xtx = x.T @ x
    phi = np.linalg.solve(xtx, x.T @ y)
    residuals = y - x @ phi
    scatter = residuals.T @ residuals
    # Guarantee a usable covariance even if residuals are numerically zero.
    sigma = scatter / t_eff + 1e-12 * np.eye(n)
    sigma = 0.5 * (sigma + sigma.T)
    model = VarModel(n=n, p=p, phi=phi, sigma=sigma)
    return OlsVar(
        model=model, y=y, x=x, residuals=residuals, scatter=scatter, xtx=xtx,
        var_names=tuple(frame.columns), dates=frame.dates[p:].to_numpy(),
    )


def ma_coefficients(model: VarModel, horizons: int) -> np.ndarray:
    """MA matrices Psi_0..Psi_{horizons-1}, with Psi_0 = I."""
    n, p = model.n, model.p
    blocks = [model.lag_block(l) for l in range(1, p + 1)]
    psis = np.zeros((horizons, n, n))
    psis[0] = np.eye(n)
    for h in range(1, horizons):
        acc = np.zeros((n, n))
        for l, block in enumerate(blocks, start=1):
            if h - l >= 0:
                acc += block @ psis[h - l]
        psis[h] = acc
    return psis


def residuals_for(model: VarModel, y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Reduced-form innovations implied by a coefficient draw on fixed data."""
    return y - x @ model.phi
