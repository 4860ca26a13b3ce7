import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from carbongame import decentralized
from carbongame.config import assume_valid, reference_scenario, validate
from carbongame.pricing import equilibrium_prices
from carbongame.sampling import sample_config, solvable
from carbongame.solution import GameError, NoAdmissibleValueFunction, check_efforts
from carbongame.verify import hjb_residual


def test_reference_coefficients(eq_d):
    c = eq_d.coeffs
    assert c.A == pytest.approx(0.068477, rel=1e-4)
    assert c.B == pytest.approx(310.955, rel=1e-5)
    assert eq_d.Gs == pytest.approx(3.99744, rel=1e-5)
    assert eq_d.Gs > 0
    assert eq_d.strategies.delta_eff == pytest.approx(0.7509, rel=1e-3)
    assert not eq_d.diagnostics


def test_reference_residual(scn, eq_d):
    G = np.linspace(0, 2 * eq_d.Gs, 101)
    assert hjb_residual(scn, "decentralized", eq_d.coeffs, eq_d.strategies, G) < 1e-8


def test_no_trading_forces_flat_manufacturer_effort():
    scn = validate(reference_scenario(p_c=0.0))
    eq = decentralized.solve(scn)
    assert eq.coeffs.A == 0.0
    assert eq.strategies.Em.slope == 0.0
    assert eq.strategies.Em.intercept == pytest.approx(eq.coeffs.B * scn.mu_m / scn.lambda_m, rel=1e-15)
    B_oracle = scn.p * scn.theta * eq.prices.sum_q / (scn.rho + scn.delta)
    assert abs(eq.coeffs.B - B_oracle) / B_oracle < 1e-12


def test_no_trading_constant_has_no_quota_term():
    scn = validate(reference_scenario(p_c=0.0, F0=12345.0))
    c = decentralized.solve(scn).coeffs
    expected = c.B**2 * scn.mu_m**2 / (2 * scn.lambda_m * scn.rho) + c.B * scn.mu_r**2 * c.D.sum() / (scn.lambda_r * scn.rho)
    assert c.C == pytest.approx(expected, rel=1e-13)
    other = decentralized.solve(scn.replace(F0=1.0)).coeffs
    assert other.C == c.C


def test_retailer_channel_removed(eq_d):
    scn = assume_valid(reference_scenario(mu_r=0.0))
    eq = decentralized.solve(scn)
    np.testing.assert_allclose(eq.coeffs.D, eq_d.coeffs.D, rtol=1e-14)
    assert all(law.slope == 0 and law.intercept == 0 for law in eq.strategies.Er)
    em = eq.strategies.Em
    assert eq.Gs == pytest.approx(scn.mu_m * em.intercept / (scn.delta - scn.mu_m * em.slope), rel=1e-13)


def test_plus_root_rejected(scn):
    prices = equilibrium_prices(scn)
    coeffs = decentralized.match_coefficients(scn, prices, root=+1)
    strat = decentralized.feedback_laws(scn, prices, coeffs)
    assert (strat.efforts_r(strat.Gs) < 0).all()
    assert strat.delta_eff < 0
    with pytest.raises(GameError):
        check_efforts("decentralized", strat)


def test_closed_loop_rate_identity(scn, eq_d):
    rate = decentralized.closed_loop_rate(scn, eq_d.prices, eq_d.coeffs)
    expected = (2 * scn.lambda_m * scn.rho + math.sqrt(eq_d.coeffs.discriminant)) / 4
    assert rate == pytest.approx(expected, rel=1e-12)


def test_nonpositive_discriminant_is_reported():
    scn = validate(reference_scenario(p_c=20.0))
    with pytest.raises(NoAdmissibleValueFunction) as exc:
        decentralized.solve(scn)
    assert exc.value.discriminant <= 0


def test_value_at_zero(eq_d):
    c = eq_d.coeffs
    assert c.value_m(0.0) == c.C
    for i in range(6):
        assert c.value_r(i, 0.0) == c.H[i]


def test_higher_price_does_not_lower_manufacturer_value(eq_d):
    hi = decentralized.solve(validate(reference_scenario(p=16.0)))
    assert hi.coeffs.value_m(hi.Gs) >= eq_d.coeffs.value_m(eq_d.Gs)


@settings(max_examples=40, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 2**32 - 1))
def test_random_scenarios(seed):
    scn = validate(sample_config(np.random.default_rng(seed)))
    if not solvable(scn):
        return
    eq = decentralized.solve(scn)
    assert eq.strategies.delta_eff > 0  # transversality
    G = np.linspace(0, 2 * eq.Gs, 101)
    assert hjb_residual(scn, "decentralized", eq.coeffs, eq.strategies, G) < 1e-8
