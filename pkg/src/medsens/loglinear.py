"""Collider-bias sensitivity parameter under a binary-mediator log-linear model.

Model: a binary mediator with

    pr(M=1 | a, c, u) = exp(beta0 + beta1*a + beta_c + beta3*u),

where u is an unmeasured Bernoulli(1/2) confounder independent of the
covariates and beta_c collapses the covariate contribution to a scalar
offset.  Marginalizing u leaves another log-linear model whose intercept
shifts by the cumulant value K(beta3) = log((1 + e^beta3)/2).

Under this model the exposure-confounder association created by
conditioning on the mediator has a closed form: it is exactly 1 within the
M=1 stratum (ratio-scale effects of a on M=1 do not involve u), and within
M=0 it is a ratio of four survivor terms 1 - e^(linear predictor) evaluated
at the worst-case u, which is u=0 when beta1*beta3 >= 0 and u=1 otherwise.

:func:`rr_au_loglinear` implements the closed form;
:func:`rr_au_loglinear_bruteforce` evaluates the defining posterior ratio on
the same two-point model and must agree to ~1e-10, which pins down the
intercept convention: ``beta0`` is the conditional intercept and the
marginal intercept is derived from it.

:func:`interaction_bound` is model-free: for any positive mediator
probability grid p[a][u] it bounds the collider ratio by the worst
ratio-scale interaction of a and u, whatever the prior on u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    BadParameter,
    Infeasible,
    InternalCheckError,
    OutOfRangeProbability,
    ZeroProbability,
)

#: closed form and brute force must agree within this
EQUIV_TOL = 1e-10

#: the (beta0, beta1) pairs and beta3 values of the reference grid emitted
#: by the CLI `parametric` subcommand
DEFAULT_INTERCEPT_EXPOSURE_PAIRS = (
    (-2.3, 0.2),
    (-2.0, 0.2),
    (-2.3, 0.4),
    (-2.0, 0.4),
    (-2.3, 0.7),
    (-2.0, 0.7),
)
DEFAULT_CONFOUNDER_COEFFS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)


def cumulant_k(t: float) -> float:
    """log((1 + e^t) / 2), evaluated stably for large |t|."""
    if not math.isfinite(t):
        if math.isinf(t):
            return math.inf if t > 0 else -math.log(2.0)
        raise BadParameter(f"t must be a real number, got {t!r}")
    if t > 0:
        return t + math.log1p(math.exp(-t)) - math.log(2.0)
    return math.log1p(math.exp(t)) - math.log(2.0)


@dataclass(frozen=True)
class LogLinearSpec:
    """Coefficients of the conditional log-linear mediator model.

    beta0 is the conditional intercept (given u); the marginal intercept is
    beta0 + K(beta3).  beta_c is the per-stratum covariate offset.
    """

    beta0: float
    beta1: float
    beta3: float
    beta_c: float = 0.0

    def __post_init__(self) -> None:
        for name in ("beta0", "beta1", "beta3", "beta_c"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise BadParameter(f"{name} must be a finite real, got {v!r}")

    def marginal_intercept(self) -> float:
        return self.beta0 + cumulant_k(self.beta3)


def _checked_exp(lp: float, what: str) -> float:
    """e^lp as a probability; the M=0 formulas need it strictly below 1."""
    p = math.exp(lp)
    if p >= 1.0:
        raise Infeasible(f"{what}: linear predictor {lp!r} gives probability {p!r} >= 1")
    return p


def rr_au_loglinear(spec: LogLinearSpec) -> float:
    """Closed-form collider-bias parameter max{1, ratio within M=0}.

    Within M=0 the ratio compares the conditional effect of the exposure on
    the mediator at the worst-case confounder level against the marginal
    effect; within M=1 the log-linear structure cancels it to 1.
    """
    b0p = spec.marginal_intercept()
    worst_u = 0.0 if spec.beta1 * spec.beta3 >= 0 else 1.0
    lp_base = spec.beta0 + spec.beta_c + spec.beta3 * worst_u
    num = (1.0 - _checked_exp(lp_base + spec.beta1, "conditional model, exposed")) / (
        1.0 - _checked_exp(lp_base, "conditional model, unexposed")
    )
    den = (1.0 - _checked_exp(b0p + spec.beta_c + spec.beta1, "marginal model, exposed")) / (
        1.0 - _checked_exp(b0p + spec.beta_c, "marginal model, unexposed")
    )
    return max(1.0, num / den)


def rr_au_loglinear_bruteforce(spec: LogLinearSpec) -> float:
    """Collider-bias parameter from the defining posterior ratio.

    Builds the exact two-point model (u ~ Bernoulli(1/2), exposure
    independent of u) and maximizes pr(u|a=1,m)/pr(u|a=0,m) over both
    mediator levels and both confounder levels.  Serves as the independent
    check of :func:`rr_au_loglinear`.
    """
    p_m1 = {}
    for a in (0, 1):
        for u in (0, 1):
            lp = spec.beta0 + spec.beta1 * a + spec.beta_c + spec.beta3 * u
            p_m1[(a, u)] = _checked_exp(lp, f"cell a={a}, u={u}")
    best = 1.0
    for m in (0, 1):
        cell = {au: (p if m == 1 else 1.0 - p) for au, p in p_m1.items()}
        marg = {a: 0.5 * cell[(a, 0)] + 0.5 * cell[(a, 1)] for a in (0, 1)}
        for u in (0, 1):
            post1 = 0.5 * cell[(1, u)] / marg[1]
            post0 = 0.5 * cell[(0, u)] / marg[0]
            if post0 == 0.0:
                raise ZeroProbability(f"posterior for u={u} given a=0, m={m} is zero")
            best = max(best, post1 / post0)
    return best


@dataclass(frozen=True)
class MediatorProbGrid:
    """pr(m | a, u) for one fixed mediator level over a in {0,1} and finite u.

    Entries must be strictly positive so that every ratio below is finite.
    """

    p: tuple[tuple[float, ...], tuple[float, ...]]

    def __post_init__(self) -> None:
        if len(self.p) != 2 or len(self.p[0]) != len(self.p[1]) or not self.p[0]:
            raise BadParameter("grid needs rows for a=0 and a=1 over a common u range")
        for a in (0, 1):
            for u, v in enumerate(self.p[a]):
                if not (isinstance(v, (int, float)) and math.isfinite(v)) or v > 1.0:
                    raise OutOfRangeProbability(f"pr(m|a={a},u={u}) = {v!r}")
                if v <= 0.0:
                    raise ZeroProbability(f"pr(m|a={a},u={u}) must be strictly positive")

    @property
    def u_card(self) -> int:
        return len(self.p[0])


def interaction_bound(grid: MediatorProbGrid) -> float:
    """Worst ratio-scale a-u interaction: an upper bound for the collider ratio.

    max over u != u' of p[1][u] p[0][u'] / (p[0][u] p[1][u']).  Whatever
    prior sits on u (with exposure independent of u), the posterior-ratio
    collider parameter for this mediator level never exceeds this value.
    A single confounder level admits no interaction and returns 1.
    """
    p0, p1 = grid.p
    best = 1.0
    for u in range(grid.u_card):
        for v in range(grid.u_card):
            if u == v:
                continue
            best = max(best, (p1[u] * p0[v]) / (p0[u] * p1[v]))
    return best


def collider_ratio_grid(
    pairs: tuple[tuple[float, float], ...] = DEFAULT_INTERCEPT_EXPOSURE_PAIRS,
    beta3_values: tuple[float, ...] = DEFAULT_CONFOUNDER_COEFFS,
    beta_c: float = 0.0,
    check_tol: float = EQUIV_TOL,
) -> list[dict[str, float]]:
    """Evaluate the closed form over a coefficient grid, brute-force checked.

    Each row carries the raw parameter and its ratios to e^beta3 and
    e^beta1 (both below 1 across the default grid: conditioning on the
    mediator attenuates the association relative to either coefficient).
    Raises :class:`InternalCheckError` if the closed form and the brute
    force disagree beyond ``check_tol`` anywhere on the grid.
    """
    rows = []
    for beta0, beta1 in pairs:
        for beta3 in beta3_values:
            spec = LogLinearSpec(beta0=beta0, beta1=beta1, beta3=beta3, beta_c=beta_c)
            rr = rr_au_loglinear(spec)
            brute = rr_au_loglinear_bruteforce(spec)
            if abs(rr - brute) > check_tol * max(1.0, abs(brute)):
                raise InternalCheckError(
                    f"closed form {rr!r} and brute force {brute!r} disagree at "
                    f"beta0={beta0}, beta1={beta1}, beta3={beta3}"
                )
            rows.append(
                {
                    "beta0": beta0,
                    "beta1": beta1,
                    "beta3": beta3,
                    "rr_au": rr,
                    "ratio_to_exp_beta3": rr / math.exp(beta3),
                    "ratio_to_exp_beta1": rr / math.exp(beta1),
                }
            )
    return rows
