"""Sign-restriction identification with loose-rationality importance weights.

For each posterior draw the engine spins random orthogonal rotations of the
Cholesky factor, keeps rotations in which three distinct columns carry the
qualitative signatures of the anticipated-policy, unanticipated-policy, and
narrative shocks (impact signs plus four-quarter-ahead expectation dynamics),
and attaches to every kept column a weight that decays with the gap between
the survey-expectation impact entries and the model-implied forecasts of the
realized variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyIdentifiedSet
from .io import TimeSeriesFrame
from .model import ShockKind, SignPattern, sign_pattern
from .posterior import PosteriorDraw, sample_posterior
from .reduced import fit_ols_var, ma_coefficients

# Search and reporting order for the three identified shocks.
SHOCK_ORDER = (ShockKind.ANTICIPATED_MP, ShockKind.UNANTICIPATED_MP,
               ShockKind.NARRATIVE)

# Horizon of the expectation-consistency checks and weights (quarters).
CHECK_HORIZON = 4

_EXPECTATION_ROLES = ("exp_rate", "exp_output", "exp_inflation")


@dataclass(frozen=True)
class VariableRoleMap:
    """Column indices of the economic roles inside a data frame.

    Hours, the bond yield, and realized output and inflation may be absent
    in reduced test systems; restrictions touching an absent role are
    skipped. The three expectation roles, the realized rate, and the
    sentiment score must always be present.
    """

    exp_rate: int
    exp_output: int
    exp_inflation: int
    rate: int
    sentiment: int
    output: int | None = None
    inflation: int | None = None
    hours: int | None = None
    bond: int | None = None

    def __post_init__(self) -> None:
        present = self.present()
        values = list(present.values())
        if len(set(values)) != len(values):
            raise ValueError("role indices must be distinct")
        if any(not isinstance(v, (int, np.integer)) or v < 0 for v in values):
            raise ValueError("role indices must be non-negative integers")

    def present(self) -> dict[str, int]:
        names = ("exp_rate", "exp_output", "exp_inflation", "rate",
                 "sentiment", "output", "inflation", "hours", "bond")
        return {name: getattr(self, name) for name in names
                if getattr(self, name) is not None}

    def get(self, role: str) -> int | None:
        return getattr(self, role)

    def check_range(self, n: int) -> None:
        for name, idx in self.present().items():
            if idx >= n:
                raise ValueError(f"role {name} index {idx} out of range "
                                 f"for {n} variables")

    @classmethod
    def from_columns(cls, columns: Sequence[str],
                     **name_by_role: str) -> "VariableRoleMap":
        """Build a map from column names, e.g. rate='ffr'."""
        lookup = {c: i for i, c in enumerate(columns)}
        indices = {}
        for role, col in name_by_role.items():
            if col not in lookup:
                raise KeyError(f"column {col!r} not in frame")
            indices[role] = lookup[col]
        return cls(**indices)


@dataclass(frozen=True)
class RotationResult:
    """One accepted rotation: impact matrix plus assignment and weights."""

    draw_index: int
    rotation_index: int
    q: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    columns: Mapping[ShockKind, int]
    signs: Mapping[ShockKind, int]
    weights: Mapping[ShockKind, float]

    def __post_init__(self) -> None:
        n = self.q.shape[0]
        if np.max(np.abs(self.q.T @ self.q - np.eye(n))) > 1e-10:
            raise ValueError("rotation is not orthogonal to 1e-10")
        cols = list(self.columns.values())
        if len(set(cols)) != len(cols):
            raise ValueError("assigned columns must be distinct")
        for kind, w in self.weights.items():
            if not 0.0 < w <= 1.0:
                raise ValueError(f"weight for {kind} outside (0, 1]")

    def impact(self, shock: ShockKind) -> np.ndarray:
        """Signed impact column of one identified shock."""
        return self.signs[shock] * self.b[:, self.columns[shock]]


@dataclass(frozen=True)
class IdentifiedSet:
    """Accepted rotations with their parent draws and the estimation data."""

    results: tuple[RotationResult, ...]
    draws: tuple[PosteriorDraw, ...]
    roles: VariableRoleMap
    delta: float
    p: int
    total_rotations: int
    var_names: tuple[str, ...]
    y: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    dates: np.ndarray = field(repr=False)

    @property
    def accepted_count(self) -> int:
        return len(self.results)

    @property
    def acceptance_rate(self) -> float:
        return self.accepted_count / self.total_rotations

    def weight_array(self, shock: ShockKind) -> np.ndarray:
        return np.array([r.weights[shock] for r in self.results])

    def ess(self, shock: ShockKind) -> float:
        w = self.weight_array(shock)
        return float(w.sum() ** 2 / (w ** 2).sum())

    def model_for(self, result: RotationResult):
        return self.draws[result.draw_index].model


def draw_rotation(n: int, seed=None) -> np.ndarray:
    """Haar-distributed orthogonal matrix via sign-normalized QR.

    An n x n standard-normal matrix is QR-factorized and the factor pair is
    normalized so the triangular factor has a positive diagonal. The 1 x 1
    case returns the identity, the only proper rotation of the line.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if n == 1:
        return np.ones((1, 1))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def _irf_rows(psis: np.ndarray, b: np.ndarray,
              rows: Sequence[int]) -> np.ndarray:
    """IRFs of selected rows: array (n_rows, horizons, n_cols)."""
    return np.stack([(psis @ b)[:, r, :] for r in rows])


def _candidate_table(b: np.ndarray, psis: np.ndarray,
                     roles: VariableRoleMap,
                     patterns: Mapping[ShockKind, SignPattern]) -> np.ndarray:
    """Boolean validity of (shock, column, sign) candidates.

    Shape (3, n, 2) over SHOCK_ORDER, columns, and signs (+1 first). A
    candidate is valid when every restricted impact entry of the signed
    column matches the pattern and the expectation rows' dynamic responses
    match at the four-quarter horizon. The policy-rate expectation row is
    checked through the average of its responses at h = 1..4, the output
    and inflation expectation rows at h = 4 exactly.
    """
    n = b.shape[0]
    dyn = psis @ b  # (CHECK_HORIZON + 1, n, n)
    exp_checks = {
        "exp_rate": dyn[1:CHECK_HORIZON + 1, roles.exp_rate, :].mean(axis=0),
        "exp_output": dyn[CHECK_HORIZON, roles.exp_output, :],
        "exp_inflation": dyn[CHECK_HORIZON, roles.exp_inflation, :],
    }
    table = np.zeros((len(SHOCK_ORDER), n, 2), dtype=bool)
    for k, kind in enumerate(SHOCK_ORDER):
        restricted = patterns[kind].restricted_roles()
        for s, sigma in enumerate((1, -1)):
            ok = np.ones(n, dtype=bool)
            for role, wanted in restricted.items():
                idx = roles.get(role)
                if idx is None:
                    continue
                ok &= sigma * wanted * b[idx, :] > 0
                if role in _EXPECTATION_ROLES:
                    ok &= sigma * wanted * exp_checks[role] > 0
            table[k, :, s] = ok
    return table


def match_signs(draw: PosteriorDraw, q: np.ndarray, roles: VariableRoleMap,
                patterns: Mapping[ShockKind, SignPattern] | None = None,
                ) -> tuple[dict[ShockKind, int], dict[ShockKind, int]] | None:
    """First valid (column, sign) assignment for the three shocks, or None.

    Candidates are scanned in lexicographic order (columns ascending, the
    positive sign before the negative) shock by shock in SHOCK_ORDER, and
    assigned columns must be distinct. Acceptance is all-or-nothing: a
    rotation with no complete assignment is discarded.
    """
    if patterns is None:
        patterns = {kind: sign_pattern(kind) for kind in SHOCK_ORDER}
    sigma_chol = np.linalg.cholesky(draw.model.sigma)
    b = sigma_chol @ q
    psis = ma_coefficients(draw.model, CHECK_HORIZON + 1)
    return _assign(_candidate_table(b, psis, roles, patterns))


def _assign(table: np.ndarray
            ) -> tuple[dict[ShockKind, int], dict[ShockKind, int]] | None:
    n = table.shape[1]
    signs = (1, -1)
    for c0 in range(n):
        for s0 in range(2):
            if not table[0, c0, s0]:
                continue
            for c1 in range(n):
                if c1 == c0:
                    continue
                for s1 in range(2):
                    if not table[1, c1, s1]:
                        continue
                    for c2 in range(n):
                        if c2 == c0 or c2 == c1:
                            continue
                        for s2 in range(2):
                            if not table[2, c2, s2]:
                                continue
                            cols = dict(zip(SHOCK_ORDER, (c0, c1, c2)))
                            sgns = dict(zip(
                                SHOCK_ORDER,
                                (signs[s0], signs[s1], signs[s2])))
                            return cols, sgns
    return None


def loose_weight(draw: PosteriorDraw, b: np.ndarray,
                 assignment: tuple[Mapping[ShockKind, int],
                                   Mapping[ShockKind, int]],
                 roles: VariableRoleMap,
                 delta: float = 0.5) -> dict[ShockKind, float]:
    """Distance between expectation impacts and model-implied forecasts.

    For each identified column j the weight is

        w_j = exp(-(1/2 delta) * [(B[E_r, j] - rbar_j)^2
                                  + (B[E_x, j] - x_j(4))^2
                                  + (B[E_pi, j] - pi_j(4))^2])

    where rbar_j averages the realized-rate response over h = 1..4 and
    x_j(4), pi_j(4) are the realized output and inflation responses at
    h = 4, all from the same draw and column. Terms whose realized role is
    absent are skipped. Exact agreement gives w = 1 and the weight never
    exceeds 1.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    columns, signs = assignment
    psis = ma_coefficients(draw.model, CHECK_HORIZON + 1)
    dyn = psis @ b
    weights: dict[ShockKind, float] = {}
    for kind in columns:
        c = columns[kind]
        total = 0.0
        if roles.rate is not None:
            rbar = dyn[1:CHECK_HORIZON + 1, roles.rate, c].mean()
            total += (b[roles.exp_rate, c] - rbar) ** 2
        if roles.output is not None:
            total += (b[roles.exp_output, c]
                      - dyn[CHECK_HORIZON, roles.output, c]) ** 2
        if roles.inflation is not None:
            total += (b[roles.exp_inflation, c]
                      - dyn[CHECK_HORIZON, roles.inflation, c]) ** 2
        w = float(np.exp(-total / (2.0 * delta)))
        weights[kind] = max(w, np.finfo(float).tiny)
    return weights


def identify(frame: TimeSeriesFrame, roles: VariableRoleMap, p: int = 2,
             draws: int = 100, rotations_per_draw: int = 2000,
             delta: float = 0.5, seed: int | None = None,
             shrink: float = 4.0,
             patterns: Mapping[ShockKind, SignPattern] | None = None,
             ) -> IdentifiedSet:
    """Full pipeline: OLS, posterior sampling, rotation search, weighting.

    Rotation i of draw d uses its own substream seeded by the tuple
    (seed, d, i), so the accepted set is bit-identical for a given seed no
    matter how the rotation loop is scheduled or batched. Raises
    EmptyIdentifiedSet when no rotation is accepted.
    """
    if draws < 1 or rotations_per_draw < 1:
        raise ValueError("draws and rotations_per_draw must be >= 1")
    ols = fit_ols_var(frame, p)
    n = ols.model.n
    roles.check_range(n)
    posterior = sample_posterior(ols, draws, shrink=shrink, seed=seed)
    if patterns is None:
        patterns = {kind: sign_pattern(kind) for kind in SHOCK_ORDER}

    results: list[RotationResult] = []
    for d, pdraw in enumerate(posterior):
        sigma_chol = np.linalg.cholesky(pdraw.model.sigma)
        psis = ma_coefficients(pdraw.model, CHECK_HORIZON + 1)
        for i in range(rotations_per_draw):
            sub = (seed, d, i) if seed is not None else None
            q = draw_rotation(n, sub)
            b = sigma_chol @ q
            assignment = _assign(_candidate_table(b, psis, roles, patterns))
            if assignment is None:
                continue
            columns, sgns = assignment
            weights = loose_weight(pdraw, b, assignment, roles, delta)
            results.append(RotationResult(
                draw_index=d, rotation_index=i, q=q, b=b,
                columns=columns, signs=sgns, weights=weights,
            ))
    if not results:
        raise EmptyIdentifiedSet(
            f"no acceptances in {draws * rotations_per_draw} rotations"
        )
    return IdentifiedSet(
        results=tuple(results), draws=tuple(posterior), roles=roles,
        delta=delta, p=p, total_rotations=draws * rotations_per_draw,
        var_names=ols.var_names, y=ols.y, x=ols.x, dates=ols.dates,
    )
