import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medsens.bounds import (
    CornfieldThresholds,
    SensitivitySpec,
    adjust_nde_rr,
    adjust_nie_rr,
    bound_nde_rd,
    bound_nie_rd,
    bound_report,
    bounding_factor,
    cornfield_rd,
    cornfield_rr,
    required_partner,
    stratum_envelopes,
)
from medsens.effects import nde_rd_obs, nie_rd_obs, observed_effects
from medsens.errors import BadParameter, BadTarget, Infeasible, ZeroDenominator
from medsens.tables import ConditionalModel, StratumTable, validate

params = st.floats(min_value=1.0, max_value=1e6, allow_nan=False)


def worked_model():
    return validate(
        ConditionalModel(
            strata=(
                StratumTable(c=0, y_prob=((0.2, 0.5), (0.4, 0.8)), m_prob=((0.75, 0.25), (0.25, 0.75))),
                StratumTable(c=1, y_prob=((0.1, 0.3), (0.2, 0.6)), m_prob=((0.5, 0.5), (0.4, 0.6))),
            )
        )
    )


class TestBoundingFactor:
    def test_point_values(self):
        assert bounding_factor(SensitivitySpec(2, 3)) == 1.5
        assert math.isclose(bounding_factor(SensitivitySpec(1.4, 8.933)), 1.34, abs_tol=1e-3)

    @given(params)
    def test_unit_parameter_gives_unit_factor(self, x):
        assert bounding_factor(SensitivitySpec(1.0, x)) == 1.0
        assert bounding_factor(SensitivitySpec(x, 1.0)) == 1.0

    def test_infinite_parameter_gives_the_other(self):
        assert bounding_factor(SensitivitySpec(math.inf, 3.5)) == 3.5
        assert bounding_factor(SensitivitySpec(3.5, math.inf)) == 3.5
        assert bounding_factor(SensitivitySpec(math.inf, math.inf)) == math.inf

    @given(params, params)
    def test_symmetry(self, x, y):
        assert bounding_factor(SensitivitySpec(x, y)) == bounding_factor(SensitivitySpec(y, x))

    @given(params, params, st.floats(min_value=0.0, max_value=10.0))
    def test_monotone_in_each_argument(self, x, y, bump):
        base = bounding_factor(SensitivitySpec(x, y))
        assert bounding_factor(SensitivitySpec(x + bump, y)) >= base - 1e-12 * base
        assert bounding_factor(SensitivitySpec(x, y + bump)) >= base - 1e-12 * base

    @given(params, params)
    def test_capped_by_smaller_parameter(self, x, y):
        bf = bounding_factor(SensitivitySpec(x, y))
        assert bf <= min(x, y) * (1 + 1e-12)
        if min(x, y) > 1.001:
            # equality only with a unit parameter or an infinite partner
            assert bf < min(x, y)

    def test_rejects_bad_parameters(self):
        for bad in (0.5, -2.0, math.nan):
            with pytest.raises(BadParameter):
                SensitivitySpec(bad, 2.0)


class TestAdjust:
    def test_unit_factor_is_identity(self):
        assert adjust_nde_rr(1.72, 1.0) == 1.72
        assert adjust_nie_rr(1.03, 1.0) == 1.03

    def test_point_values(self):
        assert math.isclose(adjust_nde_rr(1.72, 1.5), 1.146667, abs_tol=5e-7)
        assert adjust_nie_rr(1.4, 1.5) == 1.4 * 1.5

    def test_interval_endpoints_divide_elementwise(self):
        lo, hi = (adjust_nde_rr(v, 1.2) for v in (1.34, 2.21))
        assert math.isclose(lo, 1.116667, abs_tol=5e-7)
        assert math.isclose(hi, 1.841667, abs_tol=5e-7)

    def test_rejects_nonpositive_effect(self):
        with pytest.raises(BadParameter):
            adjust_nde_rr(0.0, 1.5)


class TestRdBounds:
    def test_unit_factor_recovers_observed(self):
        model = worked_model()
        assert math.isclose(bound_nde_rd(model, 0, 1.0), nde_rd_obs(model, 0), abs_tol=1e-15)
        assert math.isclose(bound_nie_rd(model, 0, 1.0), nie_rd_obs(model, 0), abs_tol=1e-15)

    def test_hand_value(self):
        model = worked_model()
        assert math.isclose(bound_nde_rd(model, 0, 1.25), 0.4 - 0.275, abs_tol=1e-12)
        assert math.isclose(bound_nie_rd(model, 0, 1.25), 0.7 - 0.4, abs_tol=1e-12)

    def test_infinite_factor_limit(self):
        model = worked_model()
        assert math.isclose(bound_nde_rd(model, 0, math.inf), -0.275, abs_tol=1e-15)
        assert math.isclose(bound_nie_rd(model, 0, math.inf), 0.7, abs_tol=1e-15)

    @given(st.floats(min_value=1.0, max_value=50.0))
    def test_complementarity_matches_total_effect(self, bf):
        model = worked_model()
        e = observed_effects(model, 0)
        total = bound_nde_rd(model, 0, bf) + bound_nie_rd(model, 0, bf)
        assert math.isclose(total, e.te_rd, abs_tol=1e-12)


class TestCornfieldRr:
    def test_explains_away_point_estimate(self):
        th = cornfield_rr(1.72, 1.0)
        assert th.both_must_exceed == 1.72
        assert math.isclose(th.max_must_exceed, 1.72 + math.sqrt(1.72 * 0.72), rel_tol=1e-15)

    def test_lower_confidence_limit(self):
        th = cornfield_rr(1.34, 1.0)
        assert th.both_must_exceed == 1.34
        assert math.isclose(th.max_must_exceed, 1.34 + math.sqrt(1.34 * 0.34), rel_tol=1e-15)

    def test_nothing_to_explain(self):
        assert cornfield_rr(1.5, 1.5) == CornfieldThresholds(1.0, 1.0)
        assert cornfield_rr(1.2, 2.0) == CornfieldThresholds(1.0, 1.0)

    def test_rejects_bad_target(self):
        with pytest.raises(BadTarget):
            cornfield_rr(1.5, 0.0)
        with pytest.raises(BadTarget):
            cornfield_rr(1.5, -1.0)

    @settings(max_examples=1000)
    @given(st.floats(min_value=1.0 + 1e-9, max_value=100.0))
    def test_threshold_solves_the_symmetric_equation(self, r):
        # the max threshold t satisfies bf(t, t) = r
        t = cornfield_rr(r, 1.0).max_must_exceed
        assert math.isclose(bounding_factor(SensitivitySpec(t, t)), r, rel_tol=1e-9)


class TestCornfieldRd:
    def test_null_target_matches_ratio_scale(self):
        model = worked_model()
        rd = cornfield_rd(model, 0, 0.0)
        rr = cornfield_rr(0.5 / 0.275, 1.0)
        assert math.isclose(rd.both_must_exceed, rr.both_must_exceed, rel_tol=1e-12)
        assert math.isclose(rd.max_must_exceed, rr.max_must_exceed, rel_tol=1e-12)

    def test_observed_target_needs_no_confounding(self):
        model = worked_model()
        assert cornfield_rd(model, 0, nde_rd_obs(model, 0)) == CornfieldThresholds(1.0, 1.0)

    def test_hand_value(self):
        th = cornfield_rd(worked_model(), 0, 0.125)
        assert math.isclose(th.both_must_exceed, 1.25, rel_tol=1e-12)
        assert math.isclose(th.max_must_exceed, 1.809017, abs_tol=5e-7)

    def test_zero_denominator(self):
        with pytest.raises(ZeroDenominator):
            cornfield_rd(worked_model(), 0, -0.275)


class TestRequiredPartner:
    def test_reproduces_lower_limit_solve(self):
        assert math.isclose(required_partner(1.40, 1.34), 8.93, abs_tol=5e-3)

    def test_unit_target(self):
        assert required_partner(1.0, 1.0) == 1.0
        assert required_partner(7.3, 1.0) == 1.0

    def test_capped_fixed_parameter_is_infeasible(self):
        with pytest.raises(Infeasible):
            required_partner(1.40, 1.72)
        with pytest.raises(Infeasible):
            required_partner(1.72, 1.72)

    def test_infinite_fixed_parameter(self):
        assert required_partner(math.inf, 2.5) == 2.5

    @settings(max_examples=500)
    @given(
        st.floats(min_value=1.0 + 1e-6, max_value=1e3),
        st.floats(min_value=1.0 + 1e-9, max_value=1e3),
    )
    def test_inverse_consistency(self, fixed, target):
        try:
            partner = required_partner(fixed, target)
        except Infeasible:
            assert fixed <= target
            return
        bf = bounding_factor(SensitivitySpec(fixed, partner))
        assert math.isclose(bf, target, rel_tol=1e-9, abs_tol=1e-9)

    def test_thousand_random_ratios_match_quadratic(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            r = float(rng.uniform(1.0 + 1e-9, 100.0))
            t = r + math.sqrt(r * (r - 1.0))
            assert math.isclose(bounding_factor(SensitivitySpec(t, t)), r, rel_tol=1e-9)


class TestReportAndEnvelopes:
    def test_report_fields_are_consistent(self):
        model = worked_model()
        spec = SensitivitySpec(2.0, 3.0)
        rep = bound_report(model, 0, spec)
        assert rep.bf == 1.5
        assert math.isclose(rep.nde_rr_lower, rep.observed.nde_rr / 1.5, rel_tol=1e-15)
        assert math.isclose(rep.nie_rr_upper, rep.observed.nie_rr * 1.5, rel_tol=1e-15)
        assert math.isclose(rep.nde_rd_lower, bound_nde_rd(model, 0, 1.5), abs_tol=1e-15)
        assert math.isclose(rep.nie_rd_upper, bound_nie_rd(model, 0, 1.5), abs_tol=1e-15)

    def test_envelopes_order_min_and_max(self):
        model = worked_model()
        spec = SensitivitySpec(2.0, 2.0)
        reports = [bound_report(model, c, spec) for c in (0, 1)]
        env = stratum_envelopes(reports)
        lows = [r.nde_rr_lower for r in reports]
        ups = [r.nie_rr_upper for r in reports]
        assert env["nde_rr_lower"] == {"heterogeneous": min(lows), "homogeneous": max(lows)}
        assert env["nie_rr_upper"] == {"heterogeneous": max(ups), "homogeneous": min(ups)}
