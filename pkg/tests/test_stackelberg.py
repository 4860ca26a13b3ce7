import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from carbongame import decentralized, stackelberg
from carbongame.config import reference_scenario, validate
from carbongame.pricing import equilibrium_prices
from carbongame.sampling import sample_config, solvable
from carbongame.solution import (
    GameError,
    InteriorSolutionWarning,
    NoAdmissibleValueFunction,
    SingularSubsidyError,
    SubsidyLaw,
    check_efforts,
    subsidy_at,
)
from carbongame.verify import hjb_residual, stationarity_report


def test_reference_values(eq_s, eq_d):
    c = eq_s.coeffs
    assert c.A == pytest.approx(0.068544, rel=1e-4)
    assert c.B == pytest.approx(311.403, rel=1e-5)
    assert eq_s.Gs == pytest.approx(9.90812, rel=1e-5)
    x = eq_s.strategies.subsidy(eq_s.Gs)
    assert np.all((0 < x) & (x < 1))
    assert x[0] == pytest.approx(0.89598, rel=1e-4)
    assert eq_s.Gs > eq_d.Gs
    tot_s = eq_s.coeffs.value_m(eq_s.Gs) + sum(eq_s.coeffs.value_r(i, eq_s.Gs) for i in range(6))
    tot_d = eq_d.coeffs.value_m(eq_d.Gs) + sum(eq_d.coeffs.value_r(i, eq_d.Gs) for i in range(6))
    assert tot_s > tot_d
    assert not eq_s.diagnostics


def test_cooperation_is_self_enforcing(eq_s, eq_d):
    assert eq_s.coeffs.value_m(eq_s.Gs) >= eq_d.coeffs.value_m(eq_d.Gs)
    for i in range(6):
        assert eq_s.coeffs.value_r(i, eq_s.Gs) >= eq_d.coeffs.value_r(i, eq_d.Gs)


def test_subsidy_identity_at_steady_state(eq_s):
    c, Gs = eq_s.coeffs, eq_s.Gs
    slope = 2 * c.A * Gs + c.B  # V_m'(Gs)
    expected = (2 * slope - c.D) / (2 * slope + c.D)
    np.testing.assert_allclose(eq_s.strategies.subsidy(Gs), expected, rtol=1e-12)
    assert subsidy_at(eq_s.subsidy, 0, Gs) == pytest.approx(expected[0], rel=1e-12)


def test_complement_identity_on_grid(eq_s):
    G = np.linspace(0, 2 * eq_s.Gs, 101)
    law = eq_s.subsidy
    np.testing.assert_allclose(1.0 - law(G), law.complement(G), rtol=1e-12, atol=1e-12)


def test_zero_subsidy_when_marginal_values_match(scn, eq_s):
    A, B, G = eq_s.coeffs.A, eq_s.coeffs.B, 3.0
    D = np.array([2 * (2 * A * G + B)])
    law = SubsidyLaw(A=A, B=B, D=D)
    assert subsidy_at(law, 0, G) == 0.0
    # leader's follower-effort law equals the unsubsidized best response there
    follower = scn.mu_r * (2 * (2 * A * G + B) + D[0]) / (2 * scn.lambda_r)
    assert follower == pytest.approx(scn.mu_r * D[0] / scn.lambda_r, rel=1e-15)


def test_vanishing_retailer_slope_pushes_rate_to_one(eq_s):
    law = SubsidyLaw(A=eq_s.coeffs.A, B=eq_s.coeffs.B, D=np.array([1e-5]))
    with pytest.warns(InteriorSolutionWarning, match="near 1"):
        x = subsidy_at(law, 0, eq_s.Gs)
    assert 1 - 1e-6 < x < 1


def test_negative_rate_warns():
    law = SubsidyLaw(A=0.0, B=1.0, D=np.array([5.0]))
    with pytest.warns(InteriorSolutionWarning, match="outside"):
        assert subsidy_at(law, 0, 0.0) < 0


def test_singular_rate():
    law = SubsidyLaw(A=0.0, B=-0.5, D=np.array([1.0]))
    with pytest.raises(SingularSubsidyError):
        law(1.0)


def test_in_range_rate_is_silent(eq_s):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        subsidy_at(eq_s.subsidy, 0, eq_s.Gs)


def test_no_trading():
    scn = validate(reference_scenario(p_c=0.0))
    eq = stackelberg.solve(scn)
    assert eq.coeffs.A == 0.0
    assert np.all(eq.strategies.subsidy(eq.Gs) > 0)
    assert eq.Gs == pytest.approx(9.551, rel=1e-3)


def test_plus_root_rejected(scn):
    prices = equilibrium_prices(scn)
    coeffs = stackelberg.match_coefficients(scn, prices, root=+1)
    strat = stackelberg.feedback_laws(scn, prices, coeffs)
    assert strat.delta_eff < 0
    with pytest.raises(GameError):
        check_efforts("stackelberg", strat)


def test_nonpositive_discriminant_is_reported():
    with pytest.raises(NoAdmissibleValueFunction) as exc:
        stackelberg.solve(validate(reference_scenario(p_c=20.0)))
    assert exc.value.discriminant <= 0


def test_leader_and_follower_stationarity(scn, eq_s):
    G = np.linspace(0, 2 * eq_s.Gs, 41)
    report = stationarity_report(scn, "stackelberg", eq_s.coeffs, eq_s.strategies, G)
    assert {"E_m", "x_1", "E_r_1", "p_1"} <= report.keys()
    assert max(report.values()) < 1e-6


@settings(max_examples=40, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 2**32 - 1))
def test_random_scenarios(seed):
    scn = validate(sample_config(np.random.default_rng(seed)))
    if not solvable(scn):
        return
    eq = stackelberg.solve(scn)
    assert eq.strategies.delta_eff > 0
    G = np.linspace(0, 2 * eq.Gs, 101)
    assert hjb_residual(scn, "stackelberg", eq.coeffs, eq.strategies, G) < 1e-8
    np.testing.assert_allclose(1.0 - eq.subsidy(G), eq.subsidy.complement(G), rtol=1e-12, atol=1e-12)
    assert eq.Gs >= decentralized.solve(scn).Gs
