"""Sensitivity bounds and Cornfield-type thresholds for natural effects.

Two nonnegative sensitivity parameters describe a hypothesized unmeasured
mediator-outcome confounder U within a covariate stratum:

    rr_uy : maximal risk ratio of U on the outcome among the exposed,
            within any mediator level (how strongly U moves Y),
    rr_au : maximal ratio of the U-posterior between exposure arms within
            mediator levels, i.e. the collider-bias magnitude induced by
            conditioning on the mediator (how strongly U and A associate
            once M is held fixed).

Their combination

    bf(x, y) = x * y / (x + y - 1)

is the bounding factor: the largest multiplicative bias the confounding can
inflict on the observed ratio-scale natural direct effect.  It is symmetric,
nondecreasing in each argument on [1, inf)^2, and never exceeds either
parameter.  The adjusted quantities

    nde_rr_obs / bf   (lower bound on the true direct effect, ratio scale)
    nie_rr_obs * bf   (upper bound on the true indirect effect)

are sharp: some admissible confounder attains them (see the oracle module's
sharpness search).  Difference-scale analogues divide only the cross-world
term sum_m pr(Y=1|1,m,c) pr(m|0,c) by bf.

Inverting the bound gives Cornfield-type thresholds: to push an observed
direct effect down to a hypothesized true value, both parameters must exceed
the ratio r = observed/true, and the larger must exceed r + sqrt(r (r - 1)).

Everything here is a pure function of floats and small frozen dataclasses.
When an observed effect is below its null (protective direction), relabel
the exposure first; the CLI exposes a flag for that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .effects import Effects, observed_effects
from .errors import BadParameter, BadTarget, Infeasible, ZeroDenominator
from .tables import ConditionalModel


def _check_param(value: float, name: str) -> float:
    value = float(value)
    if math.isnan(value) or value < 1.0:
        raise BadParameter(f"{name} must be >= 1 (or +inf), got {value!r}")
    return value


@dataclass(frozen=True)
class SensitivitySpec:
    """The two sensitivity parameters; either may be +inf (unconstrained)."""

    rr_au: float
    rr_uy: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "rr_au", _check_param(self.rr_au, "rr_au"))
        object.__setattr__(self, "rr_uy", _check_param(self.rr_uy, "rr_uy"))


@dataclass(frozen=True)
class CornfieldThresholds:
    """Minimal confounder strength needed to explain an effect down to a target.

    ``both_must_exceed`` applies to each sensitivity parameter separately;
    ``max_must_exceed`` applies to the larger of the two.  Degenerate targets
    (nothing to explain) give (1, 1).
    """

    both_must_exceed: float
    max_must_exceed: float

    def __post_init__(self) -> None:
        if self.max_must_exceed < self.both_must_exceed:
            raise BadParameter("threshold ordering violated")


def bounding_factor(spec: SensitivitySpec) -> float:
    """Maximal multiplicative bias bf = rr_au*rr_uy / (rr_au + rr_uy - 1).

    If either parameter is 1 the result is exactly 1; if either is +inf the
    result is the other parameter.
    """
    x, y = spec.rr_au, spec.rr_uy
    if x == 1.0 or y == 1.0:
        return 1.0
    if math.isinf(x):
        return y
    if math.isinf(y):
        return x
    return x * y / (x + y - 1.0)


def adjust_nde_rr(nde_rr_obs: float, bf: float) -> float:
    """Lower bound on the true ratio-scale direct effect: observed / bf."""
    if not (isinstance(nde_rr_obs, (int, float)) and nde_rr_obs > 0):
        raise BadParameter(f"observed ratio-scale effect must be positive, got {nde_rr_obs!r}")
    _check_param(bf, "bf")
    return nde_rr_obs / bf


def adjust_nie_rr(nie_rr_obs: float, bf: float) -> float:
    """Upper bound on the true ratio-scale indirect effect: observed * bf."""
    if not (isinstance(nie_rr_obs, (int, float)) and nie_rr_obs > 0):
        raise BadParameter(f"observed ratio-scale effect must be positive, got {nie_rr_obs!r}")
    _check_param(bf, "bf")
    return nie_rr_obs * bf


def _crossworld_sum(model: ConditionalModel, c: int) -> float:
    """sum_m pr(Y=1|1,m,c) pr(m|0,c): the only term the bounding factor rescales."""
    s = model.stratum(c)
    return math.fsum(a * b for a, b in zip(s.y_prob[1], s.m_prob[0]))


def _y_marg(model: ConditionalModel, c: int, a: int) -> float:
    s = model.stratum(c)
    if s.y_marg is not None:
        return s.y_marg[a]
    return math.fsum(yp * mp for yp, mp in zip(s.y_prob[a], s.m_prob[a]))


def bound_nde_rd(model: ConditionalModel, c: int, bf: float) -> float:
    """Lower bound on the true difference-scale direct effect."""
    _check_param(bf, "bf")
    cross = _crossworld_sum(model, c)
    term = 0.0 if math.isinf(bf) else cross / bf
    return term - _y_marg(model, c, 0)


def bound_nie_rd(model: ConditionalModel, c: int, bf: float) -> float:
    """Upper bound on the true difference-scale indirect effect."""
    _check_param(bf, "bf")
    cross = _crossworld_sum(model, c)
    term = 0.0 if math.isinf(bf) else cross / bf
    return _y_marg(model, c, 1) - term


def _thresholds_from_ratio(r: float) -> CornfieldThresholds:
    if r <= 1.0:
        return CornfieldThresholds(1.0, 1.0)
    return CornfieldThresholds(r, r + math.sqrt(r * (r - 1.0)))


def cornfield_rr(nde_rr_obs: float, nde_rr_true: float = 1.0) -> CornfieldThresholds:
    """Thresholds to reduce an observed ratio-scale direct effect to a target.

    With r = observed/true, both parameters must exceed r and the larger
    must exceed r + sqrt(r (r - 1)); targets at or above the observed value
    need no confounding at all and give (1, 1).
    """
    if not (isinstance(nde_rr_true, (int, float)) and nde_rr_true > 0) or math.isnan(nde_rr_true):
        raise BadTarget(f"target effect must be a positive real, got {nde_rr_true!r}")
    if not (isinstance(nde_rr_obs, (int, float)) and nde_rr_obs > 0) or math.isnan(nde_rr_obs):
        raise BadParameter(f"observed effect must be a positive real, got {nde_rr_obs!r}")
    return _thresholds_from_ratio(nde_rr_obs / nde_rr_true)


def cornfield_rd(model: ConditionalModel, c: int, nde_rd_true: float) -> CornfieldThresholds:
    """Thresholds to reduce the observed difference-scale direct effect.

    The bounding factor must exceed
    Delta = sum_m pr(Y=1|1,m,c) pr(m|0,c) / (target + pr(Y=1|0,c)),
    and the thresholds follow from Delta exactly as on the ratio scale.
    A target of zero recovers the ratio-scale thresholds at the null: both
    scales then demand the same confounder strength.
    """
    if math.isnan(nde_rd_true):
        raise BadTarget("target effect must be a real number")
    denom = nde_rd_true + _y_marg(model, c, 0)
    if denom <= 0.0:
        raise ZeroDenominator(
            f"target {nde_rd_true!r} plus pr(Y=1|a=0,c={c}) is not positive"
        )
    return _thresholds_from_ratio(_crossworld_sum(model, c) / denom)


def required_partner(fixed: float, target_bf: float) -> float:
    """Smallest partner value y with bf(fixed, y) >= target_bf.

    The bounding factor is capped strictly below the fixed parameter for
    any finite partner, so a target at or above the fixed parameter is
    unattainable and raises :class:`Infeasible`.  The solve is exact:
    bf(fixed, result) == target_bf.
    """
    fixed = _check_param(fixed, "fixed")
    target_bf = _check_param(target_bf, "target_bf")
    if math.isinf(target_bf):
        raise Infeasible("no finite bounding factor reaches an infinite target")
    if target_bf == 1.0:
        return 1.0
    if math.isinf(fixed):
        return target_bf
    if fixed <= target_bf:
        raise Infeasible(
            f"fixed parameter {fixed} caps the bounding factor below {target_bf}; "
            f"no finite partner exists (the fixed parameter itself must exceed the target)"
        )
    return target_bf * (fixed - 1.0) / (fixed - target_bf)


@dataclass(frozen=True)
class BoundReport:
    """Observed effects, bounding factor, adjusted bounds, and thresholds for one stratum.

    The Cornfield thresholds are at the null (ratio-scale target 1,
    difference-scale target 0).
    """

    c: int
    observed: Effects
    spec: SensitivitySpec
    bf: float
    nde_rr_lower: float
    nie_rr_upper: float
    nde_rd_lower: float
    nie_rd_upper: float
    cornfield_rr: CornfieldThresholds
    cornfield_rd: CornfieldThresholds


def bound_report(model: ConditionalModel, c: int, spec: SensitivitySpec) -> BoundReport:
    """Full per-stratum sensitivity report for a conditional model."""
    obs = observed_effects(model, c)
    bf = bounding_factor(spec)
    return BoundReport(
        c=c,
        observed=obs,
        spec=spec,
        bf=bf,
        nde_rr_lower=obs.nde_rr / bf if not math.isinf(bf) else 0.0,
        nie_rr_upper=obs.nie_rr * bf,
        nde_rd_lower=bound_nde_rd(model, c, bf),
        nie_rd_upper=bound_nie_rd(model, c, bf),
        cornfield_rr=cornfield_rr(obs.nde_rr),
        cornfield_rd=cornfield_rd(model, c, 0.0),
    )


def stratum_envelopes(reports: Sequence[BoundReport]) -> dict[str, dict[str, float]]:
    """Envelopes of the ratio-scale bounds across strata.

    The population-level direct effect is at least the minimum of the
    per-stratum lower bounds ("heterogeneous" case) and, when one common
    stratum effect is assumed, at least the maximum ("homogeneous" case).
    The indirect-effect upper bound flips accordingly.
    """
    if not reports:
        raise BadParameter("need at least one stratum report")
    nde_low = [r.nde_rr_lower for r in reports]
    nie_up = [r.nie_rr_upper for r in reports]
    return {
        "nde_rr_lower": {"heterogeneous": min(nde_low), "homogeneous": max(nde_low)},
        "nie_rr_upper": {"heterogeneous": max(nie_up), "homogeneous": min(nie_up)},
    }
