"""Synthetic data generators for the test and acceptance suites.

Three families live here: generic (optionally structural) VAR simulation,
a nine-variable structural VAR whose expectation rows are built as the
model's own conditional forecasts plus measurement noise, and a Taylor-rule
panel in which the policy rate and the sentiment score are determined
jointly within the period, optionally with sentiment contaminated by
information leaked from future macro states.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ExplosivePath, UnstableDgp
from .identify import VariableRoleMap
from .io import TimeSeriesFrame, frame_from_columns, quarterly_dates
from .model import ShockKind
from .reduced import VarModel


@dataclass(frozen=True)
class VarDgp:
    """A VAR process to simulate, optionally with a structural impact map."""

    model: VarModel
    impact: np.ndarray | None = field(default=None, repr=False)
    shock_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.model.is_stable():
            raise UnstableDgp(
                f"spectral radius {self.model.spectral_radius():.4f} >= 1"
            )
        if self.impact is not None:
            gap = np.max(np.abs(self.impact @ self.impact.T
                                - self.model.sigma))
            if gap > 1e-10:
                raise ValueError("impact matrix inconsistent with covariance")
            if self.shock_names and len(self.shock_names) != self.impact.shape[1]:
                raise ValueError("one name per structural column")


def simulate_var(dgp: VarDgp, t: int, burn_in: int = 200,
                 seed: int | None = None, start: str = "1980-01-01",
                 var_names: tuple[str, ...] | None = None,
                 ) -> tuple[TimeSeriesFrame, TimeSeriesFrame | None]:
    """Iterate the VAR from zero initial conditions and discard burn-in.

    Returns the simulated frame and, when the DGP is structural, a second
    frame holding the standard-normal structural draws that generated it.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    model = dgp.model
    n, p = model.n, model.p
    rng = np.random.default_rng(seed)
    total = burn_in + t
    if dgp.impact is not None:
        shocks = rng.standard_normal((total, dgp.impact.shape[1]))
        innovations = shocks @ dgp.impact.T
    else:
        shocks = None
        chol = np.linalg.cholesky(model.sigma)
        innovations = rng.standard_normal((total, n)) @ chol.T
    blocks = [model.lag_block(l) for l in range(1, p + 1)]
    path = np.zeros((total + p, n))
    for step in range(total):
        row = model.intercept + innovations[step]
        for l, block in enumerate(blocks, start=1):
            row += block @ path[p + step - l]
        path[p + step] = row
    dates = quarterly_dates(start, t)
    names = var_names or tuple(f"y{j}" for j in range(n))
    frame = frame_from_columns(
        dates, {name: path[p + burn_in:, j] for j, name in enumerate(names)})
    shock_frame = None
    if shocks is not None:
        labels = dgp.shock_names or tuple(
            f"shock{j}" for j in range(shocks.shape[1]))
        shock_frame = frame_from_columns(
            dates, {lab: shocks[burn_in:, j] for j, lab in enumerate(labels)})
    return frame, shock_frame


# ---------------------------------------------------------------------------
# Nine-variable structural VAR whose expectation rows are model forecasts.
# ---------------------------------------------------------------------------

SVAR_COLUMNS = ("exp_rate", "exp_output", "exp_inflation", "rate", "output",
                "inflation", "hours", "bond", "sentiment")

# Transition of the realized block (rate, output, inflation, hours, bond,
# sentiment); row = equation, column = lagged variable.
REALIZED_TRANSITION = np.array([
    [0.70,  0.05,  0.05,  0.00,  0.25,  0.03],
    [-0.15, 0.78,  0.00,  0.05,  0.00,  0.08],
    [-0.05, 0.08,  0.82,  0.00,  0.00,  0.03],
    [-0.10, 0.25,  0.00,  0.70,  0.00,  0.05],
    [0.10,  0.00,  0.00,  0.00,  0.80,  0.00],
    [-0.10, 0.25,  0.20,  0.00,  0.00,  0.50],
])

# Structural impacts on the realized block. Columns: surprise easing,
# anticipated easing (working through the long yield), narrative wave, and
# three unrestricted disturbances that keep the system full rank.
REALIZED_IMPACT = np.array([
    #   u      a    narr     d1     d2     d3
    [-0.20,  0.06,  0.04,  0.10,  0.15,  0.05],   # rate
    [0.30,   0.20, -0.22, -0.15,  0.25,  0.02],   # output
    [0.10,   0.08, -0.12,  0.30,  0.12,  0.01],   # inflation
    [0.25,   0.15, -0.10, -0.05,  0.20,  0.00],   # hours
    [-0.22, -0.30,  0.05,  0.05,  0.10,  0.40],   # bond yield
    [0.35,   0.40,  0.60, -0.20,  0.05, -0.10],   # sentiment
])

SVAR_SHOCK_NAMES = ("unanticipated", "anticipated", "narrative",
                    "distractor1", "distractor2", "distractor3",
                    "noise_exp_rate", "noise_exp_output", "noise_exp_inflation")

TRUE_SHOCK_COLUMNS = {
    ShockKind.UNANTICIPATED_MP: 0,
    ShockKind.ANTICIPATED_MP: 1,
    ShockKind.NARRATIVE: 2,
}

FORECAST_HORIZON = 4


@dataclass(frozen=True)
class SvarTruth:
    """A structural VAR test system together with its ground truth."""

    dgp: VarDgp
    roles: VariableRoleMap
    var_names: tuple[str, ...]
    impact: np.ndarray = field(repr=False)
    shock_columns: dict[ShockKind, int] = field(default_factory=dict)


def forecast_selectors(transition: np.ndarray) -> np.ndarray:
    """Rows mapping the realized state into the three expectation series.

    The policy-rate expectation averages the one- to four-quarter-ahead
    forecasts; the output and inflation expectations are the four-quarter
    point forecasts.
    """
    powers = [np.linalg.matrix_power(transition, k)
              for k in range(1, FORECAST_HORIZON + 1)]
    rate_row = np.mean([p[0] for p in powers], axis=0)
    output_row = powers[-1][1]
    inflation_row = powers[-1][2]
    return np.vstack([rate_row, output_row, inflation_row])


def svar_test_dgp(noise_scale: float = 0.05) -> SvarTruth:
    """Assemble the nine-variable system in the survey-block ordering.

    The three expectation rows equal the model's conditional forecasts of
    the realized block plus independent measurement noise, so the
    loose-rationality weight of the true impact columns is exactly one and
    the lag matrix has zero columns on the expectation variables.
    """
    if noise_scale <= 0:
        raise ValueError("noise_scale must be positive")
    trans = REALIZED_TRANSITION
    bz = REALIZED_IMPACT
    selectors = forecast_selectors(trans)

    n = 9
    a1 = np.zeros((n, n))
    a1[:3, 3:] = selectors @ trans
    a1[3:, 3:] = trans

    impact = np.zeros((n, n))
    impact[:3, :6] = selectors @ bz
    impact[3:, :6] = bz
    impact[:3, 6:] = noise_scale * np.eye(3)

    sigma = impact @ impact.T
    sigma = 0.5 * (sigma + sigma.T)
    phi = np.vstack([np.zeros((1, n)), a1.T])
    model = VarModel(n=n, p=1, phi=phi, sigma=sigma)
    roles = VariableRoleMap(exp_rate=0, exp_output=1, exp_inflation=2,
                            rate=3, sentiment=8, output=4, inflation=5,
                            hours=6, bond=7)
    return SvarTruth(
        dgp=VarDgp(model=model, impact=impact, shock_names=SVAR_SHOCK_NAMES),
        roles=roles, var_names=SVAR_COLUMNS, impact=impact,
        shock_columns=dict(TRUE_SHOCK_COLUMNS),
    )


# ---------------------------------------------------------------------------
# Taylor-rule panel with within-period simultaneity and optional leakage.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TaylorDgp:
    """True coefficients of the policy rule and the sentiment process.

    The rule is

        i_t = c + rho i_{t-1} + neutral_coef r*_t + inflation_coef f_pi_t
              + output_coef f_x_t + delta s*_t + u_t

    with predetermined forecast terms, while the structural score follows
    the geometric distributed lag of current and past macro states. The
    output and inflation gaps respond to the rate within the period
    (feedback_x, feedback_pi), which is what makes OLS on the rule biased.
    With leak > 0 the observed score adds leak * (mean of the next
    leak_window macro states + noise); at leak = 0 it equals the
    structural score exactly.
    """

    intercept: float = 0.1
    rho: float = 0.8
    neutral_coef: float = 0.5
    inflation_coef: float = 0.4
    output_coef: float = 0.25
    delta: float = 0.5
    feedback_x: float = 0.6
    feedback_pi: float = 0.3
    driver_rho_x: float = 0.8
    driver_rho_pi: float = 0.8
    neutral_rho: float = 0.9
    m_s: float = 0.85
    tau: int = 4
    lambda_x: float = 1.0
    lambda_pi: float = 1.0
    rho_s: float = 0.0
    sigma_u: float = 0.25
    sigma_x: float = 1.0
    sigma_pi: float = 1.0
    sigma_s: float = 0.5
    sigma_neutral: float = 0.1
    sigma_forecast: float = 0.2
    leak: float = 0.0
    leak_window: int = 4
    leak_noise: float = 0.3

    def __post_init__(self) -> None:
        if not abs(self.rho) < 1:
            raise ValueError("rule smoothing must satisfy |rho| < 1")
        if self.sigma_forecast < 0:
            raise ValueError("sigma_forecast must be >= 0")
        if self.leak_window < 1:
            raise ValueError("leak_window must be >= 1")
        if not 0 < self.m_s <= 1:
            raise ValueError("m_s must lie in (0, 1]")
        if self.tau < 1:
            raise ValueError("tau must be >= 1")


TAYLOR_COLUMNS = ("rate", "output_gap", "inflation_gap", "neutral_rate",
                  "forecast_inflation", "forecast_output", "rev_inflation",
                  "rev_output", "sentiment", "sentiment_structural")


def simulate_taylor_panel(dgp: TaylorDgp, t: int, seed: int | None = None,
                          start: str = "1980-01-01",
                          burn_in: int = 200) -> TimeSeriesFrame:
    """Simulate the jointly determined rate/score panel.

    The within-period block is solved exactly: substituting the score's
    contemporaneous macro terms into the rule gives a scalar linear
    equation for the rate, after which the score and the gaps follow. The
    sample is extended leak_window periods past the end so every observed
    score sees a full forward window.
    """
    if t < 50:
        raise ValueError("t must be >= 50")
    rng = np.random.default_rng(seed)
    total = burn_in + t + dgp.leak_window
    e_x = dgp.sigma_x * rng.standard_normal(total)
    e_pi = dgp.sigma_pi * rng.standard_normal(total)
    e_neutral = dgp.sigma_neutral * rng.standard_normal(total)
    e_s = dgp.sigma_s * rng.standard_normal(total)
    u = dgp.sigma_u * rng.standard_normal(total)
    xi = dgp.leak_noise * rng.standard_normal(total)
    # Judgment noise keeps the staff forecasts from being exact multiples
    # of single lagged gaps, which would make lagged-gap instruments
    # collinear with the forecasts in the rule.
    e_fpi = dgp.sigma_forecast * rng.standard_normal(total)
    e_fx = dgp.sigma_forecast * rng.standard_normal(total)

    tau = dgp.tau
    lag_weights = dgp.m_s ** np.arange(1, tau + 1)  # weights on x_{t-j}, j>=1
    feedback = dgp.lambda_x * dgp.feedback_x + dgp.lambda_pi * dgp.feedback_pi

    rate = np.zeros(total)
    x = np.zeros(total)
    pi = np.zeros(total)
    q_x = np.zeros(total)
    q_pi = np.zeros(total)
    neutral = np.zeros(total)
    score = np.zeros(total)
    f_pi = np.zeros(total)
    f_x = np.zeros(total)

    for s in range(total):
        q_x[s] = (dgp.driver_rho_x * q_x[s - 1] if s else 0.0) + e_x[s]
        q_pi[s] = (dgp.driver_rho_pi * q_pi[s - 1] if s else 0.0) + e_pi[s]
        neutral[s] = (dgp.neutral_rho * neutral[s - 1] if s else 0.0) \
            + e_neutral[s]
        f_pi[s] = dgp.driver_rho_pi ** 2 * (pi[s - 1] if s else 0.0) \
            + e_fpi[s]
        f_x[s] = dgp.driver_rho_x ** 2 * (x[s - 1] if s else 0.0) + e_fx[s]

        lagged_macro = 0.0
        for j in range(1, tau + 1):
            if s - j >= 0:
                lagged_macro += lag_weights[j - 1] * (
                    dgp.lambda_x * x[s - j] + dgp.lambda_pi * pi[s - j])
        partial_score = (dgp.rho_s * (score[s - 1] if s else 0.0)
                         + lagged_macro
                         + dgp.lambda_x * q_x[s] + dgp.lambda_pi * q_pi[s]
                         + e_s[s])
        predetermined = (dgp.intercept
                         + dgp.rho * (rate[s - 1] if s else 0.0)
                         + dgp.neutral_coef * neutral[s]
                         + dgp.inflation_coef * f_pi[s]
                         + dgp.output_coef * f_x[s])
        rate[s] = (predetermined + dgp.delta * partial_score + u[s]) \
            / (1.0 + dgp.delta * feedback)
        if abs(rate[s]) > 1e6:
            raise ExplosivePath(f"rate diverged at step {s}")
        score[s] = partial_score - feedback * rate[s]
        x[s] = q_x[s] - dgp.feedback_x * rate[s]
        pi[s] = q_pi[s] - dgp.feedback_pi * rate[s]

    macro = 0.5 * (x + pi)
    eta = np.zeros(total)
    if dgp.leak != 0.0:
        for s in range(total - dgp.leak_window):
            window = macro[s + 1: s + 1 + dgp.leak_window]
            eta[s] = dgp.leak * (window.mean() + xi[s])
    observed = score + eta

    lo, hi = burn_in, burn_in + t
    rev_pi = f_pi - dgp.driver_rho_pi * np.roll(f_pi, 1)
    rev_x = f_x - dgp.driver_rho_x * np.roll(f_x, 1)
    columns = {
        "rate": rate, "output_gap": x, "inflation_gap": pi,
        "neutral_rate": neutral, "forecast_inflation": f_pi,
        "forecast_output": f_x, "rev_inflation": rev_pi,
        "rev_output": rev_x, "sentiment": observed,
        "sentiment_structural": score,
    }
    dates = quarterly_dates(start, t)
    return frame_from_columns(
        dates, {name: series[lo:hi].copy() for name, series in columns.items()})

