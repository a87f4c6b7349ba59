"""Conjugate normal-inverse-Wishart sampling around an OLS VAR fit.

The prior keeps coefficients centered at OLS with covariance shrunk by a
scalar factor, and uses an inverse-Wishart on the innovation covariance
whose scale is the OLS residual cross-product (plus a tiny ridge) with
n + 2 degrees of freedom. Conjugacy then gives

    Sigma | data  ~  IW(S0 + E'E, nu0 + T_eff)
    Phi | Sigma   ~  MN(Phi_ols, (1 + shrink)^-1 (X'X)^-1, Sigma)

Draws whose companion matrix is explosive are rejected and redrawn, up to
100 attempts per retained draw on average.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .errors import StabilityExhausted
from .reduced import OlsVar, VarModel


@dataclass(frozen=True)
class PosteriorDraw:
    """One stable draw of coefficients and covariance."""

    index: int
    model: VarModel
    attempts: int


def _inverse_wishart(rng: np.random.Generator, scale: np.ndarray,
                     dof: float) -> np.ndarray:
    """Bartlett-decomposition draw from IW(scale, dof)."""
    n = scale.shape[0]
    # A A' ~ Wishart(dof, I): sqrt chi-square diagonal, standard normals below.
    a = np.zeros((n, n))
    a[np.diag_indices(n)] = np.sqrt(rng.chisquare(dof - np.arange(n)))
    if n > 1:
        a[np.tril_indices(n, -1)] = rng.standard_normal(n * (n - 1) // 2)
    ls = cholesky(scale, lower=True)
    # Sigma = L_S A^-T A^-1 L_S'  <=>  Sigma^-1 ~ Wishart(dof, scale^-1).
    g = solve_triangular(a, ls.T, lower=True)
    sigma = g.T @ g
    return 0.5 * (sigma + sigma.T)


def sample_posterior(ols: OlsVar, draws: int, shrink: float = 4.0,
                     seed: int | None = None) -> list[PosteriorDraw]:
    """Draw stable (Phi, Sigma) pairs from the conjugate posterior.

    Parameters
    ----------
    ols : OlsVar
        Fit returned by ``fit_ols_var``; supplies the centering, the
        regressor cross-product and the residual scatter.
    draws : int
        Number of stable draws to retain.
    shrink : float
        Scalar coefficient-covariance shrinkage. Large values collapse
        the coefficient posterior onto the OLS point.
    seed : int or None
        Seeds one stream consumed sequentially, so results are
        reproducible and independent of how callers batch requests.

    Raises
    ------
    StabilityExhausted
        More than 100 * draws attempts were needed.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    if shrink < 0:
        raise ValueError("shrink must be >= 0")
    n = ols.model.n
    rng = np.random.default_rng(seed)

    s0 = ols.scatter + 1e-6 * np.eye(n)
    nu0 = n + 2
    s_post = s0 + ols.scatter
    nu_post = nu0 + ols.t_eff

    # Row covariance of the coefficient draw: (1 + shrink)^-1 (X'X)^-1.
    l_xtx = cholesky(ols.xtx, lower=True)
    inv_factor = solve_triangular(l_xtx, np.eye(ols.xtx.shape[0]), lower=True)
    xtx_inv = inv_factor.T @ inv_factor
    l_row = cholesky(0.5 * (xtx_inv + xtx_inv.T) / (1.0 + shrink), lower=True)

    retained: list[PosteriorDraw] = []
    budget = 100 * draws
    attempts = 0
    while len(retained) < draws:
        if attempts >= budget:
            raise StabilityExhausted(
                f"{len(retained)} stable draws after {attempts} attempts"
            )
        attempts += 1
        sigma = _inverse_wishart(rng, s_post, nu_post)
        l_sig = np.linalg.cholesky(sigma)
        z = rng.standard_normal((ols.x.shape[1], n))
        phi = ols.model.phi + l_row @ z @ l_sig.T
        candidate = VarModel(n=n, p=ols.model.p, phi=phi, sigma=sigma)
        if candidate.is_stable():
            retained.append(PosteriorDraw(index=len(retained),
                                          model=candidate,
                                          attempts=attempts))
    return retained
