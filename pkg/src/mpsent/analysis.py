"""Post-identification analysis: weighted IRFs, FEVD, decompositions.

All summaries are shock-by-shock: a statistic tied to one identified shock
is aggregated across accepted rotations with that shock's own importance
weights. Bands are 68% credible intervals (16th to 84th weighted
percentile).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import AllZeroWeights, EmptyIdentifiedSet
from .identify import SHOCK_ORDER, IdentifiedSet, RotationResult, VariableRoleMap
from .io import TimeSeriesFrame
from .model import ShockKind
from .reduced import VarModel, lag_matrix, ma_coefficients

BAND_QUANTILES = (0.16, 0.5, 0.84)


def ess(weights: np.ndarray) -> float:
    """Effective sample size (sum w)^2 / sum w^2."""
    w = np.asarray(weights, dtype=float)
    if w.size == 0 or not np.any(w > 0):
        raise AllZeroWeights("effective sample size needs a positive weight")
    return float(w.sum() ** 2 / (w ** 2).sum())


def summarize_weighted(values: np.ndarray, weights: np.ndarray,
                       quantiles: Sequence[float]) -> np.ndarray:
    """Weighted quantiles by cumulative-weight interpolation.

    Sorted values are placed at Hazen plotting positions
    (cum_i - w_i/2) / W and quantile levels are linearly interpolated
    between them, which reproduces ordinary sample quantiles when all
    weights are equal.
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.shape != w.shape or v.ndim != 1:
        raise ValueError("values and weights must be equal-length vectors")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    keep = w > 0
    if not np.any(keep):
        raise AllZeroWeights("all weights are zero")
    v, w = v[keep], w[keep]
    order = np.argsort(v, kind="stable")
    v, w = v[order], w[order]
    positions = (np.cumsum(w) - 0.5 * w) / w.sum()
    return np.interp(np.asarray(quantiles, dtype=float), positions, v)


def _band_stack(samples: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Quantile summaries along axis 0: returns (3, *samples.shape[1:])."""
    flat = samples.reshape(samples.shape[0], -1)
    out = np.empty((len(BAND_QUANTILES), flat.shape[1]))
    for j in range(flat.shape[1]):
        out[:, j] = summarize_weighted(flat[:, j], weights, BAND_QUANTILES)
    return out.reshape((len(BAND_QUANTILES),) + samples.shape[1:])


def _require_results(identified: IdentifiedSet) -> None:
    if identified.accepted_count == 0:
        raise EmptyIdentifiedSet("no accepted rotations to summarize")


def _grouped_by_draw(identified: IdentifiedSet
                     ) -> dict[int, list[RotationResult]]:
    groups: dict[int, list[RotationResult]] = {}
    for result in identified.results:
        groups.setdefault(result.draw_index, []).append(result)
    return groups


@dataclass(frozen=True)
class IrfSummary:
    """Weighted IRF medians and 68% bands per shock, variable, horizon."""

    variables: tuple[str, ...]
    horizons: int
    median: Mapping[ShockKind, np.ndarray] = field(repr=False)
    lo68: Mapping[ShockKind, np.ndarray] = field(repr=False)
    hi68: Mapping[ShockKind, np.ndarray] = field(repr=False)


def _irf_samples(identified: IdentifiedSet, horizons: int
                 ) -> dict[ShockKind, np.ndarray]:
    """Per-rotation signed IRFs, shape (accepted, n, horizons) per shock."""
    n = len(identified.var_names)
    samples = {kind: np.empty((identified.accepted_count, n, horizons))
               for kind in SHOCK_ORDER}
    row = 0
    for draw_index, group in _grouped_by_draw(identified).items():
        psis = ma_coefficients(identified.draws[draw_index].model, horizons)
        for result in group:
            dyn = psis @ result.b  # (horizons, n, n)
            for kind in SHOCK_ORDER:
                col = dyn[:, :, result.columns[kind]].T
                samples[kind][row] = result.signs[kind] * col
            row += 1
    return samples


def irf(identified: IdentifiedSet, horizons: int = 21,
        weighted: bool = True) -> IrfSummary:
    """Weighted per-shock IRF summaries.

    With weighted=False every accepted rotation counts equally, which is
    the comparison the delta-robustness check reports.
    """
    _require_results(identified)
    samples = _irf_samples(identified, horizons)
    median: dict[ShockKind, np.ndarray] = {}
    lo: dict[ShockKind, np.ndarray] = {}
    hi: dict[ShockKind, np.ndarray] = {}
    for kind in SHOCK_ORDER:
        w = (identified.weight_array(kind) if weighted
             else np.ones(identified.accepted_count))
        bands = _band_stack(samples[kind], w)
        lo[kind], median[kind], hi[kind] = bands[0], bands[1], bands[2]
    return IrfSummary(variables=identified.var_names, horizons=horizons,
                      median=median, lo68=lo, hi68=hi)


def fevd_shares(model: VarModel, b: np.ndarray, horizons: int) -> np.ndarray:
    """Forecast-error variance shares, shape (horizons, n, n).

    Entry (h, i, j) is column j's share of variable i's forecast-error
    variance at horizon h + 1. The denominator uses the draw's innovation
    covariance directly, so the all-column sum equaling one is a real check
    on B B' = Sigma rather than an arithmetic identity.
    """
    psis = ma_coefficients(model, horizons)
    num = np.cumsum((psis @ b) ** 2, axis=0)
    step = np.einsum("hij,jk,hlk->hil", psis, model.sigma, psis)
    den = np.cumsum(np.einsum("hii->hi", step), axis=0)
    return num / den[:, :, None]


@dataclass(frozen=True)
class FevdSummary:
    """Weighted median FEVD shares of the three identified shocks."""

    variables: tuple[str, ...]
    horizons: int
    shares: Mapping[ShockKind, np.ndarray] = field(repr=False)  # (n, horizons)


def fevd(identified: IdentifiedSet, horizons: int = 21) -> FevdSummary:
    _require_results(identified)
    n = len(identified.var_names)
    samples = {kind: np.empty((identified.accepted_count, n, horizons))
               for kind in SHOCK_ORDER}
    row = 0
    for draw_index, group in _grouped_by_draw(identified).items():
        model = identified.draws[draw_index].model
        for result in group:
            shares = fevd_shares(model, result.b, horizons)
            for kind in SHOCK_ORDER:
                samples[kind][row] = shares[:, :, result.columns[kind]].T
            row += 1
    medians: dict[ShockKind, np.ndarray] = {}
    for kind in SHOCK_ORDER:
        bands = _band_stack(samples[kind], identified.weight_array(kind))
        medians[kind] = bands[1]
    return FevdSummary(variables=identified.var_names, horizons=horizons,
                       shares=medians)


@dataclass(frozen=True)
class HistoricalDecomposition:
    """Median per-date shock contributions plus remainder and baseline."""

    dates: np.ndarray = field(repr=False)
    variables: tuple[str, ...]
    contributions: Mapping[ShockKind, np.ndarray] = field(repr=False)
    remainder: np.ndarray = field(repr=False)
    deterministic: np.ndarray = field(repr=False)
    reconstruction_error: float


def _deterministic_path(model: VarModel, presample: np.ndarray,
                        t_eff: int) -> np.ndarray:
    """Zero-shock forward iteration from the presample lags."""
    n, p = model.n, model.p
    history = list(presample[-p:])
    blocks = [model.lag_block(l) for l in range(1, p + 1)]
    out = np.empty((t_eff, n))
    for t in range(t_eff):
        value = model.intercept.copy()
        for l, block in enumerate(blocks, start=1):
            value += block @ history[-l]
        out[t] = value
        history.append(value)
    return out


def _shock_flow(kernel: np.ndarray, series: np.ndarray) -> np.ndarray:
    """Causal convolution of one structural series with its IRF kernel.

    kernel has shape (T, n) (response of each variable at each lag) and
    series has shape (T,); the result is (T, n).
    """
    t = series.shape[0]
    return np.stack(
        [np.convolve(series, kernel[:, j])[:t] for j in range(kernel.shape[1])],
        axis=1,
    )


def historical_decomposition(identified: IdentifiedSet,
                             frame: TimeSeriesFrame) -> HistoricalDecomposition:
    """Split the sample into identified-shock flows and a remainder.

    Per rotation, structural series are B^-1 times the draw's reduced-form
    residuals; each identified shock contributes the causal convolution of
    its series with its IRF. The remainder collects unidentified-shock
    flows. Contributions are summarized with each shock's weights, the
    remainder and deterministic component with equal weights, and the
    worst per-draw reconstruction gap is reported.
    """
    _require_results(identified)
    values = frame.values()
    if np.isnan(values).any():
        raise ValueError("frame contains missing values")
    p = identified.p
    y, x = lag_matrix(values, p)
    t_eff, n = y.shape
    m = identified.accepted_count

    contrib = {kind: np.empty((m, t_eff, n)) for kind in SHOCK_ORDER}
    remainder = np.empty((m, t_eff, n))
    deterministic = np.empty((m, t_eff, n))
    worst = 0.0
    row = 0
    for draw_index, group in _grouped_by_draw(identified).items():
        model = identified.draws[draw_index].model
        u = y - x @ model.phi
        psis = ma_coefficients(model, t_eff)
        det = _deterministic_path(model, values[:p], t_eff)
        for result in group:
            eta = np.linalg.solve(result.b, u.T).T  # (t_eff, n)
            identified_sum = np.zeros((t_eff, n))
            for kind in SHOCK_ORDER:
                c = result.columns[kind]
                kernel = psis @ result.b[:, c]  # (t_eff, n)
                flow = _shock_flow(kernel, eta[:, c])
                identified_sum += flow
                contrib[kind][row] = flow
            deterministic[row] = det
            remainder[row] = y - det - identified_sum
            row += 1
        # One reconstruction check per draw: the deterministic path plus
        # the flow of every reduced-form innovation must rebuild the data.
        total = _reduced_flow(psis, u)
        worst = max(worst, float(np.max(np.abs(y - det - total))))

    out_contrib: dict[ShockKind, np.ndarray] = {}
    for kind in SHOCK_ORDER:
        bands = _band_stack(contrib[kind], identified.weight_array(kind))
        out_contrib[kind] = bands[1]
    equal = np.ones(m)
    rem = _band_stack(remainder, equal)[1]
    det_med = _band_stack(deterministic, equal)[1]
    return HistoricalDecomposition(
        dates=identified.dates, variables=identified.var_names,
        contributions=out_contrib, remainder=rem, deterministic=det_med,
        reconstruction_error=worst,
    )


def _reduced_flow(psis: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Sum over h of Psi_h u_{t-h}, computed column by column."""
    t_eff, n = u.shape
    total = np.zeros((t_eff, n))
    for j in range(n):
        total += _shock_flow(psis[:, :, j], u[:, j])
    return total


@dataclass(frozen=True)
class CounterfactualIrf:
    """Baseline vs feedback-shutdown IRFs for one identified shock."""

    shock: ShockKind
    variables: tuple[str, ...]
    horizons: int
    baseline_median: np.ndarray = field(repr=False)
    baseline_lo68: np.ndarray = field(repr=False)
    baseline_hi68: np.ndarray = field(repr=False)
    counterfactual_median: np.ndarray = field(repr=False)
    counterfactual_lo68: np.ndarray = field(repr=False)
    counterfactual_hi68: np.ndarray = field(repr=False)


def shutdown_feedback(model: VarModel, sentiment_index: int) -> VarModel:
    """Zero the lagged effect of the sentiment score on other equations."""
    phi = model.phi.copy()
    n = model.n
    for lag in range(model.p):
        row = 1 + lag * n + sentiment_index
        keep = phi[row, sentiment_index]
        phi[row, :] = 0.0
        phi[row, sentiment_index] = keep
    return VarModel(n=n, p=model.p, phi=phi, sigma=model.sigma)


def counterfactual_irf(identified: IdentifiedSet, roles: VariableRoleMap,
                       shock: ShockKind,
                       horizons: int = 21) -> CounterfactualIrf:
    """IRFs with the sentiment feedback channel switched off.

    The counterfactual zeroes the reduced-form lag coefficients of the
    sentiment score in every other equation while keeping the impact
    matrix and the score's own dynamics, so impact responses are identical
    by construction.
    """
    _require_results(identified)
    if roles.sentiment is None:
        raise ValueError("sentiment role must be present")
    n = len(identified.var_names)
    m = identified.accepted_count
    base = np.empty((m, n, horizons))
    counter = np.empty((m, n, horizons))
    row = 0
    for draw_index, group in _grouped_by_draw(identified).items():
        model = identified.draws[draw_index].model
        psis = ma_coefficients(model, horizons)
        psis_cf = ma_coefficients(shutdown_feedback(model, roles.sentiment),
                                  horizons)
        for result in group:
            col = result.signs[shock] * result.b[:, result.columns[shock]]
            base[row] = (psis @ col).T
            counter[row] = (psis_cf @ col).T
            row += 1
    w = identified.weight_array(shock)
    b_lo, b_med, b_hi = _band_stack(base, w)
    c_lo, c_med, c_hi = _band_stack(counter, w)
    return CounterfactualIrf(
        shock=shock, variables=identified.var_names, horizons=horizons,
        baseline_median=b_med, baseline_lo68=b_lo, baseline_hi68=b_hi,
        counterfactual_median=c_med, counterfactual_lo68=c_lo,
        counterfactual_hi68=c_hi,
    )


@dataclass(frozen=True)
class ShockDiagnostics:
    """Weighted summaries of shock cross-correlations and persistence."""

    pairs: Mapping[tuple[ShockKind, ShockKind], tuple[float, float, float]]
    autocorrelations: Mapping[ShockKind, tuple[float, float, float]]


def _lag1_autocorr(series: np.ndarray) -> float:
    demeaned = series - series.mean()
    denom = float(demeaned @ demeaned)
    return float(demeaned[1:] @ demeaned[:-1] / denom)


def shock_diagnostics(identified: IdentifiedSet) -> ShockDiagnostics:
    """Pairwise correlations and lag-1 autocorrelations of shock series.

    Correlations between two shocks are weighted by the product of the two
    shocks' weights; autocorrelations use the shock's own weight. Each
    statistic is reported as (median, lo68, hi68).
    """
    _require_results(identified)
    m = identified.accepted_count
    pair_keys = [(SHOCK_ORDER[0], SHOCK_ORDER[1]),
                 (SHOCK_ORDER[0], SHOCK_ORDER[2]),
                 (SHOCK_ORDER[1], SHOCK_ORDER[2])]
    corr = {key: np.empty(m) for key in pair_keys}
    auto = {kind: np.empty(m) for kind in SHOCK_ORDER}
    row = 0
    for draw_index, group in _grouped_by_draw(identified).items():
        model = identified.draws[draw_index].model
        u = identified.y - identified.x @ model.phi
        for result in group:
            eta = np.linalg.solve(result.b, u.T).T
            series = {kind: result.signs[kind] * eta[:, result.columns[kind]]
                      for kind in SHOCK_ORDER}
            for a, bkind in pair_keys:
                corr[(a, bkind)][row] = float(
                    np.corrcoef(series[a], series[bkind])[0, 1])
            for kind in SHOCK_ORDER:
                auto[kind][row] = _lag1_autocorr(series[kind])
            row += 1
    pair_out = {}
    for a, bkind in pair_keys:
        w = identified.weight_array(a) * identified.weight_array(bkind)
        lo, med, hi = summarize_weighted(corr[(a, bkind)], w, BAND_QUANTILES)
        pair_out[(a, bkind)] = (med, lo, hi)
    auto_out = {}
    for kind in SHOCK_ORDER:
        lo, med, hi = summarize_weighted(auto[kind],
                                         identified.weight_array(kind),
                                         BAND_QUANTILES)
        auto_out[kind] = (med, lo, hi)
    return ShockDiagnostics(pairs=pair_out, autocorrelations=auto_out)
