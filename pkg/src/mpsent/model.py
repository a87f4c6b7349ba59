"""Behavioral New-Keynesian model with a media-sentiment feedback channel.

The linearized system has four endogenous variables per date. Output and
inflation are forward looking with cognitive discounting, the policy rate
follows an inertial rule that reacts to sentiment, and sentiment aggregates a
discounted distributed lag of fundamentals plus announcement and narrative
innovations:

    x_t  = m_h E[x_{t+1}] - (1/sigma) (r_t - E[pi_{t+1}])
    pi_t = beta m_f E[pi_{t+1}] + kappa x_t
    r_t  = rho_r r_{t-1} + (1-rho_r)(phi_pi pi_t + phi_x x_t + phi_s s_t)
           + eps_u_t + eps_a_{t-tau}
    s_t  = rho_s s_{t-1}
           + sum_{k=0..tau} m_s^(tau-k) (lambda_x x_{t-tau+k}
                                         + lambda_pi pi_{t-tau+k}
                                         + lambda_a eps_a_{t-tau+k})
           + eps_s_t

Two solution layers coexist on purpose. ``impact_responses`` evaluates the
closed forms of the simplified one-period-announcement system in which the
sentiment equation is static (s_t = x_t + pi_t + announcement + narrative),
while ``solve_path`` stacks the full distributed-lag system and solves it as
one sparse linear problem. The two agree at the impact period whenever the
simplifying conventions hold, which the tests exploit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import Indeterminate, NoStableRoot, SingularSystem
from .io import TimeSeriesFrame, frame_from_columns, quarterly_dates

POSITIVE = 1
NEGATIVE = -1
UNRESTRICTED = 0

# Forecast horizon of the expectation block, in quarters. The announcement
# horizon of the benchmark calibration matches it, so an announced rate
# change registers in the rate expectation on the announcement date.
EXPECTATION_HORIZON = 4


class ShockKind(str, Enum):
    """The three structural innovations of the model."""

    UNANTICIPATED_MP = "unanticipated_mp"
    ANTICIPATED_MP = "anticipated_mp"
    NARRATIVE = "narrative"


@dataclass(frozen=True)
class Calibration:
    """Structural parameters. Defaults are the benchmark calibration."""

    beta: float = 0.99
    sigma: float = 1.0
    kappa: float = 0.15
    rho_r: float = 0.9
    phi_pi: float = 1.5
    phi_x: float = 0.0
    phi_s: float = 0.5
    tau: int = 4
    m_h: float = 0.8
    m_f: float = 0.85
    m_s: float = 0.85
    rho_s: float = 0.0
    lambda_x: float = 1.0
    lambda_pi: float = 1.0
    lambda_a: float = 1.0
    theta: float = 0.75  # price-reset probability, carried as metadata only

    def __post_init__(self) -> None:
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0,1), got {self.beta}")
        if not 0.0 <= self.rho_r < 1.0:
            raise ValueError(f"rho_r must lie in [0,1), got {self.rho_r}")
        for name in ("m_h", "m_f", "m_s"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must lie in (0,1], got {value}")
        if int(self.tau) != self.tau or self.tau < 1:
            raise ValueError(f"tau must be an integer >= 1, got {self.tau}")
        if self.kappa <= 0.0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def phi_pi_tilde(self) -> float:
        """Inflation loading of the reduced rule after folding sentiment in."""
        return self.phi_pi + self.phi_s

    @property
    def phi_x_tilde(self) -> float:
        """Output loading of the reduced rule after folding sentiment in."""
        return self.phi_x + self.phi_s


@dataclass(frozen=True)
class StableMode:
    """Autonomous decay mode of the rate and its loadings.

    After all shocks have realized, the rate decays geometrically with factor
    `alpha` and output/inflation load on the lagged rate with `g1_mode` and
    `g2_mode`. A rate innovation enters with coefficient `beta_g` and moves
    output/inflation on impact by `g1_imp` and `g2_imp`.
    """

    alpha: float
    g1_mode: float
    g2_mode: float
    beta_g: float
    g1_imp: float
    g2_imp: float
    residual: float


@dataclass(frozen=True)
class SignPattern:
    """Qualitative impact signs, one entry per variable role.

    Entries take POSITIVE, NEGATIVE, or UNRESTRICTED. Realized output and
    inflation are left unrestricted in all identification-facing patterns.
    """

    rate: int
    sentiment: int
    exp_rate: int
    exp_output: int
    exp_inflation: int
    output: int = UNRESTRICTED
    inflation: int = UNRESTRICTED

    def restricted_roles(self) -> dict[str, int]:
        roles = {
            "rate": self.rate,
            "sentiment": self.sentiment,
            "exp_rate": self.exp_rate,
            "exp_output": self.exp_output,
            "exp_inflation": self.exp_inflation,
            "output": self.output,
            "inflation": self.inflation,
        }
        return {k: v for k, v in roles.items() if v != UNRESTRICTED}


@dataclass(frozen=True)
class ImpactResponses:
    """Impact-period record of the simplified one-period-announcement system."""

    shock: ShockKind
    size: float
    r0: float
    x0: float
    pi0: float
    s0: float
    er1: float
    ex1: float
    epi1: float
    fundamentals_dominate: bool | None = None


@dataclass(frozen=True)
class ImpulseResponseSet:
    """Deterministic impulse paths plus model-consistent forward expectations.

    The expectation series mirror the staff-projection block of the
    empirical system. `exp_rate[t]` is the point forecast of the rate
    `expectation_horizon` periods ahead, the horizon at which an announced
    change is priced in; `exp_output[t]` and `exp_inflation[t]` are the
    expected averages of output and inflation over the next
    `expectation_horizon` periods (the year-ahead outlook). Under perfect
    foresight all three are functions of the path itself. Series are in
    percentage points.
    """

    shock: ShockKind
    horizons: int
    rate: np.ndarray
    output: np.ndarray
    inflation: np.ndarray
    sentiment: np.ndarray
    exp_rate: np.ndarray
    exp_output: np.ndarray
    exp_inflation: np.ndarray
    expectation_horizon: int = EXPECTATION_HORIZON

    def series(self) -> dict[str, np.ndarray]:
        return {
            "rate": self.rate,
            "output": self.output,
            "inflation": self.inflation,
            "sentiment": self.sentiment,
            "exp_rate": self.exp_rate,
            "exp_output": self.exp_output,
            "exp_inflation": self.exp_inflation,
        }

    def converged(self, rel_tol: float = 1e-6) -> bool:
        """True when the last tenth of every path is negligible."""
        tail = max(1, self.horizons // 10)
        for path in self.series().values():
            peak = np.max(np.abs(path))
            if peak == 0.0:
                continue
            if np.max(np.abs(path[-tail:])) >= rel_tol * peak:
                return False
        return True


def check_determinacy(cal: Calibration) -> bool:
    """Aggregate Taylor-principle test of the discounted system.

    The rule is strong enough for a unique non-explosive solution when

        phi_pi~ + ((1 - beta m_f)/kappa) phi_x~
            + sigma (1 - beta m_f)(1 - m_h)/kappa > 1

    with the sentiment loading folded into both tilde coefficients.
    """
    slack = (1.0 - cal.beta * cal.m_f) / cal.kappa
    lhs = (
        cal.phi_pi_tilde
        + slack * cal.phi_x_tilde
        + cal.sigma * (1.0 - cal.beta * cal.m_f) * (1.0 - cal.m_h) / cal.kappa
    )
    return lhs > 1.0


def _mode_loadings(alpha, cal: Calibration):
    """G1(alpha), G2(alpha) and the denominator of G1 (vectorized)."""
    bmf = cal.beta * cal.m_f
    den = (1.0 - cal.m_h * alpha) * (1.0 - bmf * alpha) - (cal.kappa / cal.sigma) * alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        g1 = -(alpha / cal.sigma) * (1.0 - bmf * alpha) / den
        g2 = cal.kappa * g1 / (1.0 - bmf * alpha)
    return g1, g2, den


def _fixed_point_residual(alpha, cal: Calibration):
    g1, g2, den = _mode_loadings(alpha, cal)
    res = cal.rho_r + (1.0 - cal.rho_r) * (cal.phi_pi_tilde * g2 + cal.phi_x_tilde * g1) - alpha
    return res, den


def solve_stable_mode(cal: Calibration) -> StableMode:
    """Solve the fixed point for the autonomous rate-persistence mode.

    The residual of the fixed-point equation is scanned on a dense grid over
    (0, 1); sign-change brackets that do not straddle a pole of the loading
    G1 are refined by bisection. With several admissible roots the one
    closest to `rho_r` is returned, which continues the unique root of the
    zero-loading case.

    Raises
    ------
    Indeterminate
        The determinacy condition fails.
    NoStableRoot
        No admissible root lies inside (0, 1).
    """
    if not check_determinacy(cal):
        raise Indeterminate("rule too weak: determinacy condition violated")

    grid = np.linspace(1e-4, 1.0 - 1e-4, 9999)
    res, den = _fixed_point_residual(grid, cal)

    finite = np.isfinite(res) & (np.abs(res) < 1e6)
    same_den_sign = np.sign(den[:-1]) == np.sign(den[1:])
    bracket = (
        finite[:-1]
        & finite[1:]
        & same_den_sign
        & (np.sign(res[:-1]) != np.sign(res[1:]))
    )

    roots = []
    for i in np.flatnonzero(bracket):
        lo, hi = grid[i], grid[i + 1]
        f_lo = res[i]
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            f_mid, _ = _fixed_point_residual(mid, cal)
            if f_lo * f_mid <= 0.0:
                hi = mid
            else:
                lo, f_lo = mid, f_mid
            if hi - lo < 1e-13:
                break
        root = 0.5 * (lo + hi)
        f_root, _ = _fixed_point_residual(root, cal)
        if abs(f_root) < 1e-10:
            roots.append((root, f_root))

    if not roots:
        raise NoStableRoot("no admissible persistence root in (0, 1)")
    alpha, residual = min(roots, key=lambda item: abs(item[0] - cal.rho_r))

    g1, g2, _ = _mode_loadings(alpha, cal)
    beta_g = alpha / cal.rho_r if cal.rho_r > 0 else 1.0
    return StableMode(
        alpha=float(alpha),
        g1_mode=float(g1),
        g2_mode=float(g2),
        beta_g=float(beta_g),
        g1_imp=float(g1 * beta_g / alpha),
        g2_imp=float(g2 * beta_g / alpha),
        residual=float(residual),
    )


def impact_responses(cal: Calibration, shock: ShockKind, size: float) -> ImpactResponses:
    """Impact-period closed forms of the simplified system.

    The sentiment equation is treated as static with unit fundamentals
    loadings, the announcement horizon as one period. `lambda_a` scales the
    direct announcement term in the sentiment equation; the other loadings
    follow the unit-loading convention under which the closed forms are
    exact. For the announced-change shock the record also reports whether
    the fundamentals response of sentiment dominates the direct announcement
    loading, the condition under which the sentiment sign restriction is
    valid.
    """
    mode = solve_stable_mode(cal)
    alpha, beta_g = mode.alpha, mode.beta_g
    g1m, g2m = mode.g1_mode, mode.g2_mode
    g1, g2 = mode.g1_imp, mode.g2_imp
    eps = float(size)

    if shock is ShockKind.UNANTICIPATED_MP:
        r0 = beta_g * eps
        x0 = g1 * eps
        pi0 = g2 * eps
        s0 = x0 + pi0
        er1, ex1, epi1 = alpha * r0, g1m * r0, g2m * r0
        dominate = None
    elif shock is ShockKind.ANTICIPATED_MP:
        a_x = cal.m_h * g1 + g2 / cal.sigma
        a_pi = cal.beta * cal.m_f * g2 + cal.kappa * a_x
        lean = cal.phi_pi_tilde * a_pi + cal.phi_x_tilde * a_x + cal.phi_s * cal.lambda_a
        r0 = beta_g * (1.0 - cal.rho_r) * lean * eps
        x0 = (g1m / alpha) * r0 + a_x * eps
        pi0 = (g2m / alpha) * r0 + a_pi * eps
        s0 = x0 + pi0 + cal.lambda_a * eps
        er1 = alpha * r0 + beta_g * eps
        ex1 = g1m * r0 + g1 * eps
        epi1 = g2m * r0 + g2 * eps
        dominate = abs(x0 + pi0) > abs(cal.lambda_a * eps) if eps != 0.0 else None
    elif shock is ShockKind.NARRATIVE:
        r0 = beta_g * (1.0 - cal.rho_r) * cal.phi_s * eps
        x0 = (g1m / alpha) * r0
        pi0 = (g2m / alpha) * r0
        s0 = x0 + pi0 + eps
        er1, ex1, epi1 = alpha * r0, g1m * r0, g2m * r0
        dominate = None
    else:  # pragma: no cover - exhaustive enum
        raise ValueError(f"unknown shock kind {shock}")

    return ImpactResponses(
        shock=shock, size=eps, r0=r0, x0=x0, pi0=pi0, s0=s0,
        er1=er1, ex1=ex1, epi1=epi1, fundamentals_dominate=dominate,
    )


def _stack_horizon(cal: Calibration, horizons: int, expectation_horizon: int) -> int:
    # Terminal truncation error decays with the slowest persistent mode, so
    # stretch the stacking window until the zero tail cannot contaminate the
    # reported horizons at the 1e-8 agreement tolerance.
    try:
        decay = solve_stable_mode(cal).alpha
    except NoStableRoot:
        decay = 0.95
    decay = max(decay, cal.rho_s, 0.3)
    adaptive = int(math.ceil(30.0 / -math.log(decay))) if decay < 1.0 else 20000
    h_int = max(200, 10 * cal.tau, horizons + expectation_horizon + 1,
                horizons + expectation_horizon + adaptive)
    return min(h_int, 20000)


def _solve_stacked(cal: Calibration, eps_u: np.ndarray, eps_a: np.ndarray,
                   eps_s: np.ndarray, n_periods: int) -> dict[str, np.ndarray]:
    """Solve the full perfect-foresight system over a fixed window.

    Unknown ordering is (x, pi, r, s) per date. Pre-sample values and values
    beyond the window are zero, which is exact for stationary paths once the
    window is long enough.
    """
    h = n_periods
    idx_x = lambda t: 4 * t
    idx_pi = lambda t: 4 * t + 1
    idx_r = lambda t: 4 * t + 2
    idx_s = lambda t: 4 * t + 3

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    rhs = np.zeros(4 * h)

    def put(row: int, col: int, val: float) -> None:
        rows.append(row)
        cols.append(col)
        vals.append(val)

    one_minus = 1.0 - cal.rho_r
    lom_weights = [cal.m_s ** (cal.tau - k) for k in range(cal.tau + 1)]

    for t in range(h):
        # IS curve
        row = idx_x(t)
        put(row, idx_x(t), 1.0)
        put(row, idx_r(t), 1.0 / cal.sigma)
        if t + 1 < h:
            put(row, idx_x(t + 1), -cal.m_h)
            put(row, idx_pi(t + 1), -1.0 / cal.sigma)

        # Phillips curve
        row = idx_pi(t)
        put(row, idx_pi(t), 1.0)
        put(row, idx_x(t), -cal.kappa)
        if t + 1 < h:
            put(row, idx_pi(t + 1), -cal.beta * cal.m_f)

        # policy rule
        row = idx_r(t)
        put(row, idx_r(t), 1.0)
        put(row, idx_pi(t), -one_minus * cal.phi_pi)
        put(row, idx_x(t), -one_minus * cal.phi_x)
        put(row, idx_s(t), -one_minus * cal.phi_s)
        if t - 1 >= 0:
            put(row, idx_r(t - 1), -cal.rho_r)
        rhs[row] = eps_u[t]
        if t - cal.tau >= 0:
            rhs[row] += eps_a[t - cal.tau]

        # sentiment law of motion
        row = idx_s(t)
        put(row, idx_s(t), 1.0)
        if t - 1 >= 0:
            put(row, idx_s(t - 1), -cal.rho_s)
        rhs[row] = eps_s[t]
        for k, weight in enumerate(lom_weights):
            lag_date = t - cal.tau + k
            if lag_date < 0:
                continue
            put(row, idx_x(lag_date), -weight * cal.lambda_x)
            put(row, idx_pi(lag_date), -weight * cal.lambda_pi)
            rhs[row] += weight * cal.lambda_a * eps_a[lag_date]

    system = sp.csc_matrix((vals, (rows, cols)), shape=(4 * h, 4 * h))
    try:
        solution = spla.splu(system).solve(rhs)
    except RuntimeError as exc:
        raise SingularSystem(f"stacked system is singular: {exc}") from None
    if not np.all(np.isfinite(solution)):
        raise SingularSystem("stacked system produced non-finite values")

    return {
        "output": solution[0::4],
        "inflation": solution[1::4],
        "rate": solution[2::4],
        "sentiment": solution[3::4],
    }


def solve_path(cal: Calibration, shock: ShockKind, size: float, horizons: int,
               expectation_horizon: int = EXPECTATION_HORIZON) -> ImpulseResponseSet:
    """Full-model impulse response to a single date-0 innovation.

    The complete distributed-lag sentiment equation is active, so paths under
    a positive sentiment loading differ from the closed-form impact record
    except where the two systems coincide. Expectations are read off the
    perfect-foresight path: the rate expectation is the path value
    `expectation_horizon` periods ahead and the output/inflation
    expectations average the next `expectation_horizon` path values, per the
    conventions documented on ImpulseResponseSet.
    """
    if not check_determinacy(cal):
        raise Indeterminate("rule too weak: determinacy condition violated")
    if horizons < cal.tau + 10:
        raise ValueError(f"horizons must be at least tau + 10 = {cal.tau + 10}")

    h_int = _stack_horizon(cal, horizons, expectation_horizon)
    impulse = np.zeros(h_int)
    impulse[0] = size
    zero = np.zeros(h_int)
    sequences = {
        ShockKind.UNANTICIPATED_MP: (impulse, zero, zero),
        ShockKind.ANTICIPATED_MP: (zero, impulse, zero),
        ShockKind.NARRATIVE: (zero, zero, impulse),
    }[shock]
    paths = _solve_stacked(cal, *sequences, n_periods=h_int)

    rate, output = paths["rate"], paths["output"]
    inflation, sentiment = paths["inflation"], paths["sentiment"]
    m = expectation_horizon
    exp_rate = rate[m: m + horizons]
    exp_output = np.array([output[t + 1: t + 1 + m].mean() for t in range(horizons)])
    exp_inflation = np.array([inflation[t + 1: t + 1 + m].mean() for t in range(horizons)])

    return ImpulseResponseSet(
        shock=shock,
        horizons=horizons,
        rate=rate[:horizons].copy(),
        output=output[:horizons].copy(),
        inflation=inflation[:horizons].copy(),
        sentiment=sentiment[:horizons].copy(),
        exp_rate=exp_rate.copy(),
        exp_output=exp_output,
        exp_inflation=exp_inflation,
        expectation_horizon=m,
    )


_PATTERNS = {
    # expansionary surprise cut
    ShockKind.UNANTICIPATED_MP: SignPattern(
        rate=NEGATIVE, sentiment=POSITIVE, exp_rate=NEGATIVE,
        exp_output=POSITIVE, exp_inflation=POSITIVE,
    ),
    # announced future cut: the rule leans against incipient optimism
    ShockKind.ANTICIPATED_MP: SignPattern(
        rate=POSITIVE, sentiment=POSITIVE, exp_rate=NEGATIVE,
        exp_output=POSITIVE, exp_inflation=POSITIVE,
    ),
    # positive narrative wave
    ShockKind.NARRATIVE: SignPattern(
        rate=POSITIVE, sentiment=POSITIVE, exp_rate=POSITIVE,
        exp_output=NEGATIVE, exp_inflation=NEGATIVE,
    ),
}


def sign_pattern(shock: ShockKind) -> SignPattern:
    """Impact sign restrictions attached to each structural shock."""
    return _PATTERNS[shock]


def simulate_bnk(cal: Calibration,
                 eps_u: np.ndarray | None = None,
                 eps_a: np.ndarray | None = None,
                 eps_s: np.ndarray | None = None,
                 periods: int | None = None,
                 seed: int | None = None,
                 start: str = "1980-01-01") -> TimeSeriesFrame:
    """Simulate the model by superposing impulse responses.

    Any shock sequence left as None is drawn i.i.d. standard normal from
    `seed`. Because the model is linear, the simulated frame is the causal
    convolution of each shock sequence with its unit impulse response, and a
    single unit impulse reproduces the corresponding response set exactly.
    """
    given = [s for s in (eps_u, eps_a, eps_s) if s is not None]
    if given:
        lengths = {len(s) for s in given}
        if len(lengths) != 1:
            raise ValueError("shock sequences must share one length")
        n = lengths.pop()
        if periods is not None and periods != n:
            raise ValueError("periods disagrees with the sequence length")
    elif periods is not None:
        n = periods
    else:
        raise ValueError("provide shock sequences or a period count")

    rng = np.random.default_rng(seed)
    sequences = {
        ShockKind.UNANTICIPATED_MP: eps_u,
        ShockKind.ANTICIPATED_MP: eps_a,
        ShockKind.NARRATIVE: eps_s,
    }
    for kind, series in sequences.items():
        sequences[kind] = (
            rng.standard_normal(n) if series is None else np.asarray(series, dtype=float)
        )

    names = ("rate", "output", "inflation", "sentiment",
             "exp_rate", "exp_output", "exp_inflation")
    total = {name: np.zeros(n) for name in names}
    for kind, series in sequences.items():
        if not np.any(series):
            continue
        irf = solve_path(cal, kind, 1.0, horizons=max(n, cal.tau + 10))
        for name, path in irf.series().items():
            total[name] += np.convolve(series, path[:n])[:n]

    total["eps_unanticipated"] = sequences[ShockKind.UNANTICIPATED_MP]
    total["eps_anticipated"] = sequences[ShockKind.ANTICIPATED_MP]
    total["eps_narrative"] = sequences[ShockKind.NARRATIVE]
    return frame_from_columns(quarterly_dates(start, n), total)
