import math

import numpy as np
import pytest

from medsens.bounds import SensitivitySpec, bounding_factor
from medsens.effects import observed_effects
from medsens.errors import BadParameter, UnreachableCell, ZeroDenominator, ZeroProbability
from medsens.loglinear import MediatorProbGrid, interaction_bound
from medsens.oracle import (
    DiscreteRatioInstance,
    Scm,
    bernoulli_instance,
    check_ratio_bound,
    observed_model,
    outcome_marginal,
    recipe_scm,
    rr_au_mediator_ratio,
    rr_au_posterior,
    rr_au_posterior_per_mediator,
    rr_uy,
    sample_ratio_instance,
    sample_scm,
    sharpness_search,
    true_effects,
    unexposed_nde_check,
    verify_bounds,
)


def flat_scm(y_given, m_given, u_prior=(0.4, 0.6), a_given_u=None, **kw) -> Scm:
    return Scm(
        u_prior=u_prior,
        a_given_u=a_given_u if a_given_u is not None else (0.5,) * len(u_prior),
        m_given=m_given,
        y_given=y_given,
        **kw,
    )


def u_irrelevant_scm() -> Scm:
    """Outcome and mediator tables constant in u: no confounding at all."""
    m_row0 = ((0.75, 0.25), (0.75, 0.25))
    m_row1 = ((0.25, 0.75), (0.25, 0.75))
    y0 = ((0.2, 0.2), (0.5, 0.5))
    y1 = ((0.4, 0.4), (0.8, 0.8))
    return flat_scm(y_given=(y0, y1), m_given=(m_row0, m_row1))


def assert_tables_close(got, want, tol=1e-15):
    for a in (0, 1):
        for x, y in zip(got[a], want[a]):
            assert math.isclose(x, y, abs_tol=tol)


class TestObservedModel:
    def test_u_irrelevant_matches_flat_tables(self):
        model = observed_model(u_irrelevant_scm())
        s = model.stratum(0)
        assert_tables_close(s.m_prob, ((0.75, 0.25), (0.25, 0.75)))
        assert_tables_close(s.y_prob, ((0.2, 0.5), (0.4, 0.8)))

    def test_degenerate_prior_picks_one_slice(self):
        scm = flat_scm(
            u_prior=(0.0, 1.0),
            m_given=(((0.5, 0.5), (0.7, 0.3)), ((0.5, 0.5), (0.2, 0.8))),
            y_given=(((0.1, 0.3), (0.2, 0.4)), ((0.3, 0.5), (0.4, 0.9))),
        )
        s = observed_model(scm).stratum(0)
        assert_tables_close(s.m_prob, ((0.7, 0.3), (0.2, 0.8)))
        assert_tables_close(s.y_prob, ((0.3, 0.4), (0.5, 0.9)))

    def test_uniform_everything_gives_uniform_tables(self):
        half = ((0.5, 0.5), (0.5, 0.5))
        scm = flat_scm(u_prior=(0.5, 0.5), m_given=(half, half),
                       y_given=(half, half))
        s = observed_model(scm).stratum(0)
        assert s.m_prob == half
        assert s.y_prob == half

    def test_two_summation_orders_agree(self):
        rng = np.random.default_rng(31)
        for i in range(2000):
            scm = sample_scm(rng, u_card=2 + i % 2, m_card=2 + i % 2)
            s = observed_model(scm).stratum(0)
            for a in (0, 1):
                assert math.isclose(s.y_marg[a], outcome_marginal(scm, a), abs_tol=1e-12)

    def test_unreachable_cell_raises(self):
        # m=1 possible under a=0 but never under a=1
        scm = flat_scm(
            m_given=(((0.5, 0.5), (0.5, 0.5)), ((1.0, 0.0), (1.0, 0.0))),
            y_given=(((0.1, 0.1), (0.2, 0.2)), ((0.3, 0.3), (0.4, 0.4))),
        )
        with pytest.raises(UnreachableCell):
            observed_model(scm)


class TestTrueEffects:
    def test_no_confounder_means_true_equals_observed(self):
        scm = u_irrelevant_scm()
        true = true_effects(scm)
        obs = observed_effects(observed_model(scm), 0)
        for field in ("nde_rr", "nie_rr", "te_rr", "nde_rd", "nie_rd", "te_rd"):
            assert math.isclose(getattr(true, field), getattr(obs, field), rel_tol=1e-12, abs_tol=1e-12)

    def test_null_scm(self):
        same_m = ((0.6, 0.4), (0.3, 0.7))
        same_y = ((0.2, 0.5), (0.4, 0.1))
        scm = flat_scm(m_given=(same_m, same_m), y_given=(same_y, same_y))
        true = true_effects(scm)
        assert math.isclose(true.nde_rr, 1.0, rel_tol=1e-15)
        assert math.isclose(true.nie_rr, 1.0, rel_tol=1e-15)
        assert math.isclose(true.te_rr, 1.0, rel_tol=1e-15)
        assert abs(true.nde_rd) < 1e-15 and abs(true.nie_rd) < 1e-15

    def test_matches_full_joint_enumeration(self):
        # independent oracle: build the joint tensor with numpy and contract it
        rng = np.random.default_rng(37)
        for _ in range(300):
            scm = sample_scm(rng, u_card=3, m_card=3)
            prior = np.array(scm.u_prior)
            m = np.array(scm.m_given)   # [a][u][m]
            y = np.array(scm.y_given)   # [a][m][u]
            cross = {
                (ay, am): float(np.einsum("u,um,mu->", prior, m[am], y[ay]))
                for ay in (0, 1)
                for am in (0, 1)
            }
            true = true_effects(scm)
            assert math.isclose(true.nde_rr, cross[(1, 0)] / cross[(0, 0)], rel_tol=1e-12)
            assert math.isclose(true.nie_rr, cross[(1, 1)] / cross[(1, 0)], rel_tol=1e-12)
            assert math.isclose(true.nde_rd, cross[(1, 0)] - cross[(0, 0)], abs_tol=1e-12)
            assert math.isclose(true.nie_rd, cross[(1, 1)] - cross[(1, 0)], abs_tol=1e-12)

    def test_loglinear_mediator_scm_agrees_across_modules(self):
        # mediator tables generated by the binary-mediator log-linear model:
        # the posterior-ratio parameter of the joint model must equal the
        # closed form evaluated on the same coefficients
        from medsens.loglinear import LogLinearSpec, rr_au_loglinear

        rng = np.random.default_rng(97)
        for _ in range(200):
            b1 = float(rng.uniform(-1.0, 1.0))
            b3 = float(rng.uniform(-1.0, 1.0))
            b0 = -float(rng.uniform(0.1, 2.5)) - max(b1, 0.0) - max(b3, 0.0)
            spec = LogLinearSpec(beta0=b0, beta1=b1, beta3=b3)
            m_given = tuple(
                tuple(
                    (1.0 - math.exp(b0 + b1 * a + b3 * u), math.exp(b0 + b1 * a + b3 * u))
                    for u in (0, 1)
                )
                for a in (0, 1)
            )
            y_given = tuple(
                tuple(tuple(float(v) for v in rng.uniform(0.05, 0.95, 2)) for _ in (0, 1))
                for _ in (0, 1)
            )
            scm = flat_scm(u_prior=(0.5, 0.5), m_given=m_given, y_given=y_given)
            assert math.isclose(rr_au_posterior(scm), rr_au_loglinear(spec), rel_tol=1e-10)
            report = verify_bounds(scm)
            assert report.all_hold

    def test_decomposition_identities(self):
        rng = np.random.default_rng(41)
        for _ in range(2000):
            true = true_effects(sample_scm(rng, 2, 3))
            assert math.isclose(true.te_rr, true.nde_rr * true.nie_rr, rel_tol=1e-12)
            assert math.isclose(true.te_rd, true.nde_rd + true.nie_rd, abs_tol=1e-12)

    def test_requires_independent_exposure(self):
        rng = np.random.default_rng(43)
        scm = sample_scm(rng, dependent_exposure=True)
        with pytest.raises(BadParameter):
            true_effects(scm)


class TestSensitivityParameters:
    def test_outcome_constant_in_u(self):
        assert rr_uy(u_irrelevant_scm()) == 1.0

    def test_binary_ratio(self):
        scm = flat_scm(
            m_given=(((0.5, 0.5), (0.5, 0.5)), ((0.4, 0.6), (0.3, 0.7))),
            y_given=(((0.1, 0.1), (0.2, 0.2)), ((0.3, 0.3), (0.2, 0.5))),
        )
        assert math.isclose(rr_uy(scm), 2.5, rel_tol=1e-15)

    def test_zero_outcome_cell_rejected(self):
        scm = flat_scm(
            m_given=(((0.5, 0.5), (0.5, 0.5)), ((0.4, 0.6), (0.3, 0.7))),
            y_given=(((0.1, 0.1), (0.2, 0.2)), ((0.0, 0.3), (0.2, 0.5))),
        )
        with pytest.raises(ZeroProbability):
            rr_uy(scm)

    def test_pairwise_enumeration_matches(self):
        rng = np.random.default_rng(47)
        for _ in range(500):
            scm = sample_scm(rng, u_card=3, m_card=3)
            brute = max(
                scm.y_given[1][m][u] / scm.y_given[1][m][v]
                for m in range(3)
                for u in range(3)
                for v in range(3)
            )
            assert math.isclose(rr_uy(scm), brute, rel_tol=1e-12)

    def test_mediator_constant_in_a_gives_one(self):
        same = ((0.6, 0.4), (0.3, 0.7))
        scm = flat_scm(m_given=(same, same), y_given=(((0.2, 0.3), (0.4, 0.1)), ((0.5, 0.2), (0.6, 0.7))))
        assert math.isclose(rr_au_posterior(scm), 1.0, rel_tol=1e-12)
        assert math.isclose(rr_au_mediator_ratio(scm), 1.0, rel_tol=1e-12)

    def test_mediator_constant_in_u_gives_one(self):
        scm = flat_scm(
            m_given=(((0.6, 0.4), (0.6, 0.4)), ((0.3, 0.7), (0.3, 0.7))),
            y_given=(((0.2, 0.3), (0.4, 0.1)), ((0.5, 0.2), (0.6, 0.7))),
        )
        assert math.isclose(rr_au_posterior(scm), 1.0, rel_tol=1e-12)

    def test_two_definitions_agree(self):
        rng = np.random.default_rng(53)
        worst = 0.0
        for i in range(2000):
            scm = sample_scm(rng, u_card=2 + i % 2, m_card=2 + i % 2)
            a, b = rr_au_posterior(scm), rr_au_mediator_ratio(scm)
            worst = max(worst, abs(a - b) / max(1.0, a))
        assert worst <= 1e-10

    def test_posterior_form_never_exceeds_interaction_bound(self):
        rng = np.random.default_rng(59)
        for _ in range(1000):
            scm = sample_scm(rng, u_card=2, m_card=3)
            per_m = rr_au_posterior_per_mediator(scm)
            for m, value in per_m.items():
                grid = MediatorProbGrid(
                    p=(
                        tuple(scm.m_given[0][u][m] for u in range(scm.u_card)),
                        tuple(scm.m_given[1][u][m] for u in range(scm.u_card)),
                    )
                )
                assert value <= interaction_bound(grid) * (1 + 1e-12)

    def test_mediator_ratio_needs_independent_exposure(self):
        rng = np.random.default_rng(61)
        scm = sample_scm(rng, dependent_exposure=True)
        with pytest.raises(BadParameter):
            rr_au_mediator_ratio(scm)


class TestVerifyBounds:
    def test_thousand_random_scms_hold(self):
        from medsens.bounds import adjust_nde_rr, adjust_nie_rr

        rng = np.random.default_rng(67)
        for i in range(1000):
            report = verify_bounds(sample_scm(rng, 2, 2 + i % 2))
            assert report.all_hold, report.checks
            # the adjusted quantities themselves never cross the truth
            tol = 1e-10 * max(1.0, report.bf)
            assert report.true.nde_rr >= adjust_nde_rr(report.observed.nde_rr, report.bf) - tol
            assert report.true.nie_rr <= adjust_nie_rr(report.observed.nie_rr, report.bf) + tol

    def test_u_irrelevant_bounds_are_tight(self):
        report = verify_bounds(u_irrelevant_scm())
        assert report.bf == 1.0
        assert math.isclose(report.nde_rr_attainment, 1.0, rel_tol=1e-12)
        assert math.isclose(report.nde_rd_lower, report.true.nde_rd, abs_tol=1e-12)
        assert math.isclose(report.nie_rd_upper, report.true.nie_rd, abs_tol=1e-12)

    def test_observed_side_reuses_identification_bit_for_bit(self):
        rng = np.random.default_rng(71)
        scm = sample_scm(rng)
        report = verify_bounds(scm)
        assert report.observed == observed_effects(observed_model(scm), 0)

    def test_recipe_scm_attains_the_bound(self):
        report = verify_bounds(recipe_scm(2.5, 3.5, posterior_mass=0.999))
        assert report.all_hold
        assert report.nde_rr_attainment >= 0.999

    def test_recipe_parameters_are_exact(self):
        scm = recipe_scm(2.5, 3.5, posterior_mass=0.999)
        assert math.isclose(rr_au_posterior(scm), 2.5, rel_tol=1e-12)
        assert math.isclose(rr_uy(scm), 3.5, rel_tol=1e-12)


class TestSharpnessSearch:
    def test_deterministic(self):
        assert sharpness_search(seed=5, iterations=20) == sharpness_search(seed=5, iterations=20)

    def test_attainment_close_below_one(self):
        report = sharpness_search(seed=5, iterations=50)
        for value in (report.nde_rr, report.nie_rr, report.nde_rd, report.nie_rd):
            assert 0.999 <= value <= 1.0 + 1e-10


class TestRatioBound:
    def test_constant_weight(self):
        inst = DiscreteRatioInstance(f0=(0.3, 0.7), f1=(0.6, 0.4), r=(2.0, 2.0))
        res = check_ratio_bound(inst)
        assert res.lhs == 1.0
        assert res.weight_spread == 1.0
        assert res.holds

    def test_equal_measures(self):
        inst = DiscreteRatioInstance(f0=(0.3, 0.7), f1=(0.3, 0.7), r=(1.0, 5.0))
        res = check_ratio_bound(inst)
        assert res.lhs == 1.0 and res.density_ratio == 1.0
        assert res.holds

    def test_bernoulli_family_attains_equality(self):
        rng = np.random.default_rng(73)
        for _ in range(200):
            density_ratio = float(rng.uniform(1.0, 20.0))
            spread = float(rng.uniform(1.0, 20.0))
            res = check_ratio_bound(bernoulli_instance(density_ratio, spread))
            assert abs(res.lhs - res.rhs) <= 1e-12 * max(1.0, res.rhs)
            assert res.holds

    def test_random_instances_hold_strictly(self):
        # non-degenerate instances never attain the bound; equality needs
        # the two-point structure
        rng = np.random.default_rng(79)
        for _ in range(2000):
            res = check_ratio_bound(sample_ratio_instance(rng, int(rng.integers(2, 7))))
            assert res.holds
            assert res.lhs < res.rhs

    def test_absolute_continuity_required(self):
        inst = DiscreteRatioInstance(f0=(1.0, 0.0), f1=(0.5, 0.5), r=(1.0, 2.0))
        with pytest.raises(ZeroDenominator):
            check_ratio_bound(inst)

    def test_zero_minimum_weight_rejected_when_nonconstant(self):
        inst = DiscreteRatioInstance(f0=(0.5, 0.5), f1=(0.5, 0.5), r=(0.0, 2.0))
        with pytest.raises(BadParameter):
            check_ratio_bound(inst)


class TestUnexposedBound:
    def test_independent_exposure_reduces_to_overall_check(self):
        rng = np.random.default_rng(83)
        scm = sample_scm(rng)
        unexposed = unexposed_nde_check(scm)
        overall = verify_bounds(scm)
        assert math.isclose(unexposed.nde_rr_unexposed, overall.true.nde_rr, rel_tol=1e-12)
        assert math.isclose(unexposed.nde_rd_unexposed, overall.true.nde_rd, abs_tol=1e-12)
        assert unexposed.bf == overall.bf

    def test_thousand_dependent_scms_hold(self):
        rng = np.random.default_rng(89)
        for _ in range(1000):
            report = unexposed_nde_check(sample_scm(rng, dependent_exposure=True))
            assert report.all_hold, report.checks

    def test_strong_dependence_with_u_irrelevant_to_y_is_tight(self):
        scm = flat_scm(
            a_given_u=(0.05, 0.95),
            m_given=(((0.8, 0.2), (0.3, 0.7)), ((0.5, 0.5), (0.1, 0.9))),
            y_given=(((0.2, 0.2), (0.5, 0.5)), ((0.4, 0.4), (0.7, 0.7))),
            a_independent_u=False,
        )
        report = unexposed_nde_check(scm)
        assert report.bf == 1.0
        for check in report.checks:
            assert abs(check.slack) < 1e-12
        assert report.all_hold
