"""Tests for the reduced-form VAR, posterior sampler, sign identification,
and the weighted post-identification summaries."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpsent.analysis import (
    BAND_QUANTILES,
    counterfactual_irf,
    ess,
    fevd,
    fevd_shares,
    historical_decomposition,
    irf,
    shock_diagnostics,
    shutdown_feedback,
    summarize_weighted,
)
from mpsent.errors import (
    AllZeroWeights,
    EmptyIdentifiedSet,
    InsufficientData,
    SingularRegressors,
    StabilityExhausted,
)
from mpsent.identify import (
    SHOCK_ORDER,
    IdentifiedSet,
    RotationResult,
    VariableRoleMap,
    draw_rotation,
    identify,
    loose_weight,
    match_signs,
)
from mpsent.io import TimeSeriesFrame, frame_from_columns, quarterly_dates
from mpsent.model import ShockKind, SignPattern
from mpsent.posterior import PosteriorDraw, sample_posterior
from mpsent.reduced import (
    OlsVar,
    VarModel,
    fit_ols_var,
    lag_matrix,
    ma_coefficients,
    residuals_for,
)
from mpsent.synthdata import simulate_var, svar_test_dgp

ANT = ShockKind.ANTICIPATED_MP
UNANT = ShockKind.UNANTICIPATED_MP
NARR = ShockKind.NARRATIVE


def ar_series(rng: np.random.Generator, t: int, rho: float,
              scale: float = 1.0) -> np.ndarray:
    e = rng.standard_normal(t)
    out = np.zeros(t)
    for s in range(t):
        out[s] = (rho * out[s - 1] if s else 0.0) + scale * e[s]
    return out


def make_frame(values: np.ndarray, names: tuple[str, ...] | None = None,
               start: str = "1990-01-01") -> TimeSeriesFrame:
    t, n = values.shape
    names = names or tuple(f"v{j}" for j in range(n))
    return frame_from_columns(
        quarterly_dates(start, t),
        {name: values[:, j] for j, name in enumerate(names)},
    )


@pytest.fixture(scope="module")
def truth():
    return svar_test_dgp()


@pytest.fixture(scope="module")
def truth_frame(truth):
    frame, _ = simulate_var(truth.dgp, t=300, seed=42)
    return frame


@pytest.fixture(scope="module")
def small_set(truth, truth_frame):
    return identify(truth_frame, truth.roles, p=1, draws=4,
                    rotations_per_draw=150, seed=7)


def truth_assignment() -> tuple[dict[ShockKind, int], dict[ShockKind, int]]:
    columns = {UNANT: 0, ANT: 1, NARR: 2}
    signs = {UNANT: 1, ANT: 1, NARR: 1}
    return columns, signs


def manual_truth_set(truth, frame: TimeSeriesFrame,
                     model: VarModel | None = None) -> IdentifiedSet:
    """Single-rotation IdentifiedSet built from the known impact matrix."""
    model = model or truth.dgp.model
    draw = PosteriorDraw(index=0, model=model, attempts=1)
    chol = np.linalg.cholesky(model.sigma)
    q = np.linalg.solve(chol, truth.impact)
    columns, signs = truth_assignment()
    result = RotationResult(
        draw_index=0, rotation_index=0, q=q, b=chol @ q,
        columns=columns, signs=signs,
        weights={kind: 1.0 for kind in SHOCK_ORDER},
    )
    y, x = lag_matrix(frame.values(), 1)
    return IdentifiedSet(
        results=(result,), draws=(draw,), roles=truth.roles, delta=0.5,
        p=1, total_rotations=1, var_names=frame.columns, y=y, x=x,
        dates=frame.dates[1:],
    )


class TestVarModel:
    def test_rejects_wrong_phi_shape(self):
        with pytest.raises(ValueError):
            VarModel(n=2, p=1, phi=np.zeros((4, 2)), sigma=np.eye(2))

    def test_rejects_asymmetric_sigma(self):
        sigma = np.array([[1.0, 0.3], [0.1, 1.0]])
        with pytest.raises(ValueError):
            VarModel(n=2, p=1, phi=np.zeros((3, 2)), sigma=sigma)

    def test_rejects_non_positive_definite_sigma(self):
        sigma = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(ValueError):
            VarModel(n=2, p=1, phi=np.zeros((3, 2)), sigma=sigma)

    def test_companion_matches_characteristic_roots(self):
        # Univariate AR(2): companion eigenvalues solve z^2 = a1 z + a2.
        a1, a2 = 0.5, 0.3
        phi = np.array([[0.0], [a1], [a2]])
        model = VarModel(n=1, p=2, phi=phi, sigma=np.eye(1))
        roots = np.roots([1.0, -a1, -a2])
        eigs = np.linalg.eigvals(model.companion())
        np.testing.assert_allclose(sorted(np.abs(eigs)),
                                   sorted(np.abs(roots)), atol=1e-12)
        assert model.is_stable()
        assert model.spectral_radius() == pytest.approx(np.max(np.abs(roots)))

    def test_explosive_detected(self):
        phi = np.array([[0.0], [0.5], [0.6]])
        model = VarModel(n=1, p=2, phi=phi, sigma=np.eye(1))
        assert not model.is_stable()

    def test_lag_block_layout(self):
        a1 = np.array([[0.5, 0.1], [0.0, 0.4]])
        a2 = np.array([[0.2, 0.0], [0.3, -0.1]])
        phi = np.vstack([np.array([0.7, -0.2]), a1.T, a2.T])
        model = VarModel(n=2, p=2, phi=phi, sigma=np.eye(2))
        np.testing.assert_allclose(model.intercept, [0.7, -0.2])
        np.testing.assert_allclose(model.lag_block(1), a1)
        np.testing.assert_allclose(model.lag_block(2), a2)


class TestFitOls:
    def test_noiseless_var1_recovered_exactly(self):
        # A decaying transient with distinct eigenvalues pins down both
        # lag coefficients and the intercept without any noise at all.
        a = np.array([[0.9, 0.0], [0.4, -0.5]])
        c = np.array([0.3, -0.2])
        values = np.zeros((30, 2))
        values[0] = [2.0, -1.5]
        for t in range(1, 30):
            values[t] = c + a @ values[t - 1]
        ols = fit_ols_var(make_frame(values), p=1)
        np.testing.assert_allclose(ols.model.intercept, c, atol=1e-8)
        np.testing.assert_allclose(ols.model.lag_block(1), a, atol=1e-8)
        assert np.max(np.abs(ols.model.sigma)) < 1e-10

    def test_classical_se_calibration_on_white_noise(self):
        # Under iid noise the OLS lag coefficients of an AR(2) are zero
        # and the classical 3-SE interval should cover them ~99.7% of
        # the time; demand at least 95% over 500 replications.
        rng = np.random.default_rng(314)
        inside = 0
        total = 0
        for _ in range(500):
            values = rng.standard_normal((80, 1))
            ols = fit_ols_var(make_frame(values), p=2)
            cov = ols.model.sigma[0, 0] * np.linalg.inv(ols.xtx)
            se = np.sqrt(np.diag(cov))
            for j in (1, 2):
                total += 1
                if abs(ols.model.phi[j, 0]) <= 3.0 * se[j]:
                    inside += 1
        assert inside / total >= 0.95

    def test_constant_series_raises(self):
        values = np.full((40, 1), 3.0)
        with pytest.raises(SingularRegressors):
            fit_ols_var(make_frame(values), p=1)

    def test_short_sample_raises(self):
        values = np.random.default_rng(0).standard_normal((12, 1))
        with pytest.raises(InsufficientData):
            fit_ols_var(make_frame(values), p=1)

    def test_missing_values_raise(self):
        values = np.random.default_rng(0).standard_normal((60, 2))
        values[7, 1] = np.nan
        with pytest.raises(InsufficientData):
            fit_ols_var(make_frame(values), p=1)

    def test_residual_identity(self):
        rng = np.random.default_rng(5)
        values = rng.standard_normal((90, 2)).cumsum(axis=0) * 0.1
        ols = fit_ols_var(make_frame(values), p=2)
        np.testing.assert_allclose(
            ols.residuals, residuals_for(ols.model, ols.y, ols.x), atol=0)
        assert ols.t_eff == 88

    def test_ma_coefficients_var1_are_matrix_powers(self):
        a = np.array([[0.6, 0.2], [-0.1, 0.5]])
        phi = np.vstack([np.zeros(2), a.T])
        model = VarModel(n=2, p=1, phi=phi, sigma=np.eye(2))
        psis = ma_coefficients(model, 6)
        power = np.eye(2)
        for h in range(6):
            np.testing.assert_allclose(psis[h], power, atol=1e-12)
            power = a @ power

    def test_ma_coefficients_ar2_recursion(self):
        a1, a2 = 0.5, 0.3
        phi = np.array([[0.0], [a1], [a2]])
        model = VarModel(n=1, p=2, phi=phi, sigma=np.eye(1))
        psis = ma_coefficients(model, 8)[:, 0, 0]
        expected = np.zeros(8)
        expected[0] = 1.0
        expected[1] = a1
        for h in range(2, 8):
            expected[h] = a1 * expected[h - 1] + a2 * expected[h - 2]
        np.testing.assert_allclose(psis, expected, atol=1e-12)


def simulated_ols(seed: int = 21, t: int = 400) -> OlsVar:
    a = np.array([[0.5, 0.1], [-0.2, 0.4]])
    chol = np.array([[0.8, 0.0], [0.3, 0.6]])
    rng = np.random.default_rng(seed)
    values = np.zeros((t, 2))
    for s in range(1, t):
        values[s] = a @ values[s - 1] + chol @ rng.standard_normal(2)
    return fit_ols_var(make_frame(values), p=1)


class TestPosterior:
    def test_huge_shrinkage_pins_coefficients_at_ols(self):
        ols = simulated_ols()
        for draw in sample_posterior(ols, draws=3, shrink=1e12, seed=1):
            assert np.max(np.abs(draw.model.phi - ols.model.phi)) < 1e-5

    def test_posterior_means_match_closed_forms(self):
        ols = simulated_ols()
        draws = sample_posterior(ols, draws=2000, shrink=4.0, seed=8)
        phis = np.stack([d.model.phi for d in draws])
        sigmas = np.stack([d.model.sigma for d in draws])
        # Coefficient draws are centred on the OLS point.
        phi_se = phis.std(axis=0, ddof=1) / np.sqrt(len(draws))
        assert np.all(np.abs(phis.mean(axis=0) - ols.model.phi)
                      <= 4.0 * phi_se + 1e-12)
        # Covariance draws have the inverse-Wishart mean
        # S_post / (nu_post - n - 1).
        n = 2
        s_post = (ols.scatter + 1e-6 * np.eye(n)) + ols.scatter
        nu_post = n + 2 + ols.t_eff
        sigma_mean = s_post / (nu_post - n - 1)
        sigma_se = sigmas.std(axis=0, ddof=1) / np.sqrt(len(draws))
        assert np.all(np.abs(sigmas.mean(axis=0) - sigma_mean)
                      <= 4.0 * sigma_se)

    def test_all_retained_draws_are_stable(self):
        rng = np.random.default_rng(3)
        values = ar_series(rng, 200, rho=0.97)[:, None]
        ols = fit_ols_var(make_frame(values), p=1)
        draws = sample_posterior(ols, draws=50, seed=2)
        assert len(draws) == 50
        assert all(d.model.is_stable() for d in draws)
        assert draws[-1].attempts >= 50

    def test_explosive_data_exhausts_stability_budget(self):
        rng = np.random.default_rng(9)
        values = np.zeros((40, 1))
        values[0] = 1.0
        for t in range(1, 40):
            values[t] = 1.5 * values[t - 1] + 0.5 * rng.standard_normal()
        ols = fit_ols_var(make_frame(values), p=1)
        assert not ols.model.is_stable()
        with pytest.raises(StabilityExhausted):
            sample_posterior(ols, draws=2, shrink=1e15, seed=0)

    def test_same_seed_reproduces_draws(self):
        ols = simulated_ols()
        first = sample_posterior(ols, draws=5, seed=11)
        second = sample_posterior(ols, draws=5, seed=11)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.model.phi, b.model.phi)
            np.testing.assert_array_equal(a.model.sigma, b.model.sigma)

    def test_input_validation(self):
        ols = simulated_ols()
        with pytest.raises(ValueError):
            sample_posterior(ols, draws=0)
        with pytest.raises(ValueError):
            sample_posterior(ols, draws=1, shrink=-0.5)


class TestDrawRotation:
    def test_one_dimensional_rotation_is_identity(self):
        for seed in (None, 0, 1, 99):
            np.testing.assert_array_equal(draw_rotation(1, seed=seed),
                                          np.ones((1, 1)))

    def test_orthogonality(self):
        for seed in range(200):
            q = draw_rotation(5, seed=seed)
            assert np.max(np.abs(q.T @ q - np.eye(5))) < 1e-10

    def test_entry_means_are_centred(self):
        # Haar-distributed entries have mean zero; with 20000 draws the
        # Monte Carlo error of each entry mean is about 0.0035.
        total = np.zeros((4, 4))
        for seed in range(20000):
            total += draw_rotation(4, seed=seed)
        means = total / 20000
        assert np.max(np.abs(means)) < 0.02

    def test_seeded_determinism(self):
        np.testing.assert_array_equal(draw_rotation(6, seed=42),
                                      draw_rotation(6, seed=42))

    def test_rejects_non_positive_dimension(self):
        with pytest.raises(ValueError):
            draw_rotation(0)


def zero_dynamics_draw(n: int = 5) -> PosteriorDraw:
    model = VarModel(n=n, p=1, phi=np.zeros((1 + n, n)), sigma=np.eye(n))
    return PosteriorDraw(index=0, model=model, attempts=1)


FIVE_VAR_ROLES = VariableRoleMap(exp_rate=0, exp_output=1, exp_inflation=2,
                                 rate=3, sentiment=4)


class TestMatchSigns:
    def test_truth_rotation_recovers_true_columns(self, truth):
        model = truth.dgp.model
        draw = PosteriorDraw(index=0, model=model, attempts=1)
        q = np.linalg.solve(np.linalg.cholesky(model.sigma), truth.impact)
        assignment = match_signs(draw, q, truth.roles)
        assert assignment is not None
        columns, signs = assignment
        assert columns == {ANT: 1, UNANT: 0, NARR: 2}
        assert signs == {ANT: 1, UNANT: 1, NARR: 1}

    def test_zero_dynamics_identity_rejected(self):
        # With no propagation every expectation-row response after impact
        # is zero, so the strict dynamic checks cannot hold.
        draw = zero_dynamics_draw()
        assert match_signs(draw, np.eye(5), FIVE_VAR_ROLES) is None

    def test_column_flip_flips_only_that_sign(self, truth):
        model = truth.dgp.model
        draw = PosteriorDraw(index=0, model=model, attempts=1)
        q = np.linalg.solve(np.linalg.cholesky(model.sigma), truth.impact)
        flipped = q.copy()
        flipped[:, 1] *= -1.0
        assignment = match_signs(draw, flipped, truth.roles)
        assert assignment is not None
        columns, signs = assignment
        assert columns == {ANT: 1, UNANT: 0, NARR: 2}
        assert signs == {ANT: -1, UNANT: 1, NARR: 1}


class TestLooseWeight:
    def test_truth_columns_have_unit_weight(self, truth):
        # The expectation rows of the test system are exact conditional
        # forecasts of the realized block, so every penalty term vanishes.
        model = truth.dgp.model
        draw = PosteriorDraw(index=0, model=model, attempts=1)
        weights = loose_weight(draw, truth.impact, truth_assignment(),
                               truth.roles)
        for kind in SHOCK_ORDER:
            assert 1.0 - 1e-10 <= weights[kind] <= 1.0

    def test_hand_computed_penalty(self):
        # Zero dynamics and B = I leave a single active term per shock:
        # the squared expected-rate impact. Only the column-0 shock has a
        # nonzero entry there, giving exp(-1/(2*0.5)) = e^-1.
        draw = zero_dynamics_draw()
        assignment = ({ANT: 0, UNANT: 1, NARR: 2},
                      {ANT: 1, UNANT: 1, NARR: 1})
        weights = loose_weight(draw, np.eye(5), assignment, FIVE_VAR_ROLES,
                               delta=0.5)
        assert weights[ANT] == pytest.approx(np.exp(-1.0), rel=1e-12)
        assert weights[UNANT] == pytest.approx(1.0)
        assert weights[NARR] == pytest.approx(1.0)

    def test_huge_delta_flattens_weights(self):
        draw = zero_dynamics_draw()
        assignment = ({ANT: 0, UNANT: 1, NARR: 2},
                      {ANT: 1, UNANT: 1, NARR: 1})
        weights = loose_weight(draw, np.eye(5), assignment, FIVE_VAR_ROLES,
                               delta=1e12)
        for kind in SHOCK_ORDER:
            assert weights[kind] > 1.0 - 1e-10

    def test_rejects_non_positive_delta(self):
        draw = zero_dynamics_draw()
        assignment = ({ANT: 0, UNANT: 1, NARR: 2},
                      {ANT: 1, UNANT: 1, NARR: 1})
        with pytest.raises(ValueError):
            loose_weight(draw, np.eye(5), assignment, FIVE_VAR_ROLES,
                         delta=0.0)


class TestIdentify:
    def test_same_seed_is_deterministic(self, truth, truth_frame):
        kwargs = dict(p=1, draws=2, rotations_per_draw=60, seed=5)
        first = identify(truth_frame, truth.roles, **kwargs)
        second = identify(truth_frame, truth.roles, **kwargs)
        assert first.accepted_count == second.accepted_count
        for a, b in zip(first.results, second.results):
            assert (a.draw_index, a.rotation_index) == (b.draw_index,
                                                        b.rotation_index)
            assert a.columns == b.columns and a.signs == b.signs
            np.testing.assert_array_equal(a.b, b.b)
        for kind in SHOCK_ORDER:
            np.testing.assert_array_equal(first.weight_array(kind),
                                          second.weight_array(kind))

    def test_contradictory_pattern_raises_empty(self):
        # exp_rate is built as the exact negative of rate, so demanding a
        # positive impact on both can never be satisfied by any column.
        rng = np.random.default_rng(11)
        t = 120
        rate = ar_series(rng, t, 0.6)
        frame = frame_from_columns(quarterly_dates("1990-01-01", t), {
            "exp_rate": -rate + 1e-4 * rng.standard_normal(t),
            "exp_output": ar_series(rng, t, 0.5),
            "exp_inflation": ar_series(rng, t, 0.5),
            "rate": rate,
            "sentiment": ar_series(rng, t, 0.4),
        })
        impossible = SignPattern(rate=1, sentiment=0, exp_rate=1,
                                 exp_output=0, exp_inflation=0)
        with pytest.raises(EmptyIdentifiedSet):
            identify(frame, FIVE_VAR_ROLES, p=1, draws=3,
                     rotations_per_draw=80, seed=0,
                     patterns={kind: impossible for kind in ShockKind})

    def test_accepted_set_bookkeeping(self, small_set):
        assert small_set.accepted_count > 0
        assert small_set.total_rotations == 4 * 150
        assert small_set.acceptance_rate == pytest.approx(
            small_set.accepted_count / 600)
        for kind in SHOCK_ORDER:
            # Effective sample size is at most the accepted count.
            assert 0.0 < small_set.ess(kind) <= small_set.accepted_count + 1e-9

    def test_accepted_factorizations_reproduce_sigma(self, small_set):
        for result in small_set.results[:20]:
            sigma = small_set.model_for(result).sigma
            assert np.max(np.abs(result.b @ result.b.T - sigma)) < 1e-8

    def test_columns_distinct_in_every_acceptance(self, small_set):
        for result in small_set.results:
            cols = list(result.columns.values())
            assert len(set(cols)) == 3


class TestRoleMap:
    def test_from_columns(self):
        roles = VariableRoleMap.from_columns(
            ("a", "b", "c", "d", "e"),
            exp_rate="a", exp_output="b", exp_inflation="c", rate="d",
            sentiment="e",
        )
        assert roles.exp_rate == 0 and roles.sentiment == 4
        assert roles.output is None

    def test_duplicate_indices_rejected(self):
        with pytest.raises(ValueError):
            VariableRoleMap(exp_rate=0, exp_output=0, exp_inflation=2,
                            rate=3, sentiment=4)

    def test_check_range(self):
        with pytest.raises(ValueError):
            FIVE_VAR_ROLES.check_range(4)


class TestSummarizeWeighted:
    @settings(max_examples=60, deadline=None)
    @given(
        values=st.lists(
            st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
            min_size=1, max_size=40),
        quantiles=st.lists(st.floats(min_value=0.0, max_value=1.0),
                           min_size=1, max_size=5),
    )
    def test_equal_weights_match_plain_quantiles(self, values, quantiles):
        v = np.asarray(values)
        got = summarize_weighted(v, np.ones_like(v), quantiles)
        expected = np.quantile(v, quantiles, method="hazen")
        np.testing.assert_allclose(got, expected, rtol=1e-9, atol=1e-9)

    def test_one_hot_weight_selects_its_element(self):
        v = np.array([4.0, -2.0, 7.5, 1.0])
        w = np.array([0.0, 0.0, 1.0, 0.0])
        out = summarize_weighted(v, w, BAND_QUANTILES)
        np.testing.assert_array_equal(out, [7.5, 7.5, 7.5])
        assert ess(w) == pytest.approx(1.0)

    def test_all_zero_weights_raise(self):
        with pytest.raises(AllZeroWeights):
            summarize_weighted(np.arange(3.0), np.zeros(3), [0.5])
        with pytest.raises(AllZeroWeights):
            ess(np.zeros(4))

    def test_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            summarize_weighted(np.arange(3.0), np.array([1.0, -0.1, 1.0]),
                               [0.5])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            summarize_weighted(np.arange(4.0), np.ones(3), [0.5])

    def test_equal_weights_ess_is_count(self):
        assert ess(np.full(7, 0.3)) == pytest.approx(7.0)


class TestIrf:
    def test_single_rotation_bands_collapse_to_truth(self, truth,
                                                     truth_frame):
        manual = manual_truth_set(truth, truth_frame)
        summary = irf(manual, horizons=12)
        psis = ma_coefficients(truth.dgp.model, 12)
        for kind in SHOCK_ORDER:
            col = truth.impact[:, truth.shock_columns[kind]]
            expected = (psis @ col).T  # (n, horizons)
            np.testing.assert_allclose(summary.median[kind], expected,
                                       atol=1e-10)
            np.testing.assert_array_equal(summary.lo68[kind],
                                          summary.median[kind])
            np.testing.assert_array_equal(summary.hi68[kind],
                                          summary.median[kind])

    def test_bands_are_ordered(self, small_set):
        summary = irf(small_set, horizons=9)
        for kind in SHOCK_ORDER:
            assert summary.median[kind].shape == (9, 9)
            assert np.all(summary.lo68[kind] <= summary.median[kind] + 1e-12)
            assert np.all(summary.median[kind] <= summary.hi68[kind] + 1e-12)

    def test_empty_set_rejected(self, truth, truth_frame):
        manual = manual_truth_set(truth, truth_frame)
        empty = IdentifiedSet(
            results=(), draws=manual.draws, roles=manual.roles, delta=0.5,
            p=1, total_rotations=10, var_names=manual.var_names,
            y=manual.y, x=manual.x, dates=manual.dates,
        )
        with pytest.raises(EmptyIdentifiedSet):
            irf(empty)


class TestFevd:
    def test_no_dynamics_identity_impact_gives_own_shares(self):
        model = VarModel(n=3, p=1, phi=np.zeros((4, 3)), sigma=np.eye(3))
        shares = fevd_shares(model, np.eye(3), horizons=5)
        for h in range(5):
            np.testing.assert_allclose(shares[h], np.eye(3), atol=1e-12)

    def test_shares_sum_to_one(self, small_set):
        for result in small_set.results[:10]:
            model = small_set.model_for(result)
            shares = fevd_shares(model, result.b, horizons=21)
            np.testing.assert_allclose(shares.sum(axis=2),
                                       np.ones((21, 9)), atol=1e-8)

    def test_shares_are_scale_invariant(self, truth):
        model = truth.dgp.model
        c = 3.7
        scaled = VarModel(n=model.n, p=model.p, phi=model.phi,
                          sigma=model.sigma * c ** 2)
        base = fevd_shares(model, truth.impact, horizons=13)
        rescaled = fevd_shares(scaled, truth.impact * c, horizons=13)
        np.testing.assert_allclose(rescaled, base, atol=1e-12)

    def test_summary_matches_single_rotation_shares(self, truth,
                                                    truth_frame):
        manual = manual_truth_set(truth, truth_frame)
        summary = fevd(manual, horizons=8)
        shares = fevd_shares(truth.dgp.model, truth.impact, horizons=8)
        for kind in SHOCK_ORDER:
            expected = shares[:, :, truth.shock_columns[kind]].T
            np.testing.assert_allclose(summary.shares[kind], expected,
                                       atol=1e-10)


class TestHistoricalDecomposition:
    def test_reconstruction_on_sampled_set(self, small_set, truth_frame):
        decomp = historical_decomposition(small_set, truth_frame)
        assert decomp.reconstruction_error < 1e-8
        assert decomp.remainder.shape == (299, 9)

    def test_single_rotation_components_rebuild_data(self, truth,
                                                     truth_frame):
        manual = manual_truth_set(truth, truth_frame)
        decomp = historical_decomposition(manual, truth_frame)
        total = decomp.deterministic + decomp.remainder
        for kind in SHOCK_ORDER:
            total = total + decomp.contributions[kind]
        gap = truth_frame.values()[1:] - total
        np.testing.assert_allclose(gap, np.zeros_like(gap), atol=1e-10)
        assert decomp.reconstruction_error < 1e-9

    def test_shock_free_sample_has_zero_contributions(self, truth,
                                                      truth_frame):
        # A path generated by the deterministic recursion alone leaves no
        # innovations for any shock to explain.
        model = truth.dgp.model
        phi = model.phi.copy()
        phi[0, :] = 0.1
        drifted = VarModel(n=model.n, p=model.p, phi=phi, sigma=model.sigma)
        values = np.zeros((60, model.n))
        for t in range(1, 60):
            values[t] = drifted.intercept + drifted.lag_block(1) @ values[t - 1]
        frame = make_frame(values, names=truth.var_names)
        manual = manual_truth_set(truth, frame, model=drifted)
        decomp = historical_decomposition(manual, frame)
        for kind in SHOCK_ORDER:
            assert np.max(np.abs(decomp.contributions[kind])) < 1e-10
        assert np.max(np.abs(decomp.remainder)) < 1e-10
        assert decomp.reconstruction_error < 1e-10

    def test_single_impulse_contribution_equals_irf(self, truth):
        # One unit structural shock at the first effective date makes that
        # shock's contribution trace out its impulse response exactly.
        model = truth.dgp.model
        col = truth.impact[:, truth.shock_columns[ANT]]
        values = np.zeros((40, model.n))
        values[1] = col
        for t in range(2, 40):
            values[t] = model.lag_block(1) @ values[t - 1]
        frame = make_frame(values, names=truth.var_names)
        manual = manual_truth_set(truth, frame)
        decomp = historical_decomposition(manual, frame)
        psis = ma_coefficients(model, 39)
        np.testing.assert_allclose(decomp.contributions[ANT],
                                   psis @ col, atol=1e-10)
        for kind in (UNANT, NARR):
            assert np.max(np.abs(decomp.contributions[kind])) < 1e-10
        assert np.max(np.abs(decomp.remainder)) < 1e-10


class TestCounterfactual:
    def test_impact_responses_unchanged(self, small_set, truth):
        out = counterfactual_irf(small_set, truth.roles, ANT, horizons=9)
        np.testing.assert_allclose(out.counterfactual_median[:, 0],
                                   out.baseline_median[:, 0], atol=1e-12)
        np.testing.assert_allclose(out.counterfactual_lo68[:, 0],
                                   out.baseline_lo68[:, 0], atol=1e-12)

    def test_no_feedback_model_is_its_own_counterfactual(self, truth,
                                                         truth_frame):
        base = truth.dgp.model
        silenced = shutdown_feedback(base, truth.roles.sentiment)
        manual = manual_truth_set(truth, truth_frame, model=silenced)
        out = counterfactual_irf(manual, truth.roles, UNANT, horizons=9)
        np.testing.assert_allclose(out.counterfactual_median,
                                   out.baseline_median, atol=1e-12)

    def test_feedback_shutdown_attenuates_output_response(self, truth,
                                                          truth_frame):
        manual = manual_truth_set(truth, truth_frame)
        output_row = truth.roles.output
        for kind in (ANT, UNANT):
            out = counterfactual_irf(manual, truth.roles, kind, horizons=9)
            base = abs(out.baseline_median[output_row, 4])
            counter = abs(out.counterfactual_median[output_row, 4])
            assert counter < base

    def test_shutdown_preserves_own_dynamics(self, truth):
        model = truth.dgp.model
        s = truth.roles.sentiment
        silenced = shutdown_feedback(model, s)
        row = 1 + s  # p = 1: the sentiment lag row
        assert silenced.phi[row, s] == model.phi[row, s]
        others = np.delete(silenced.phi[row], s)
        np.testing.assert_array_equal(others, np.zeros(model.n - 1))
        np.testing.assert_array_equal(silenced.sigma, model.sigma)


class TestShockDiagnostics:
    def test_truth_rotation_recovers_drawn_shocks(self, truth):
        frame, shocks = simulate_var(truth.dgp, t=300, seed=42)
        manual = manual_truth_set(truth, frame)
        diag = shock_diagnostics(manual)
        # With the exact impact matrix the recovered structural series are
        # the drawn innovations, so every summary reduces to the sample
        # statistic of the corresponding shock column.
        model = truth.dgp.model
        u = manual.y - manual.x @ model.phi
        eta = np.linalg.solve(truth.impact, u.T).T
        drawn = shocks.values()[1:]
        np.testing.assert_allclose(eta, drawn, atol=1e-8)
        series = {kind: drawn[:, truth.shock_columns[kind]]
                  for kind in SHOCK_ORDER}
        for (a, b), (med, lo, hi) in diag.pairs.items():
            expected = np.corrcoef(series[a], series[b])[0, 1]
            assert med == pytest.approx(expected, abs=1e-10)
            assert lo == pytest.approx(expected, abs=1e-10)
            assert abs(med) < 0.2
        for kind, (med, _, _) in diag.autocorrelations.items():
            s = series[kind]
            demeaned = s - s.mean()
            expected = demeaned[1:] @ demeaned[:-1] / (demeaned @ demeaned)
            assert med == pytest.approx(expected, abs=1e-10)
            assert abs(med) < 0.2

    def test_sampled_set_statistics_are_bounded(self, small_set):
        diag = shock_diagnostics(small_set)
        for med, lo, hi in diag.pairs.values():
            assert -1.0 <= lo <= med <= hi <= 1.0
        for med, lo, hi in diag.autocorrelations.values():
            assert -1.0 <= lo <= med <= hi <= 1.0
