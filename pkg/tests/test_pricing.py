import numpy as np
import pytest
from hypothesis import given, strategies as st

from carbongame.config import assume_valid, reference_scenario, validate
from carbongame.pricing import (
    base_demand,
    best_response_prices,
    demand,
    equilibrium_prices,
    solve_price_system,
)


def scenario(**kw):
    return validate(reference_scenario(**kw))


@st.composite
def price_scenarios(draw):
    n = draw(st.integers(1, 12))
    a = draw(st.lists(st.floats(0.5, 50.0), min_size=n, max_size=n))
    return scenario(
        n=n,
        a=a,
        b=draw(st.floats(0.05, 5.0)),
        c=draw(st.floats(0.0, 1.0)),
    )


def test_symmetric_closed_form(scn):
    eq = equilibrium_prices(scn)
    np.testing.assert_allclose(eq.p_star, 10 / (0.9 * 1.2), rtol=1e-12)
    np.testing.assert_allclose(eq.q, 10 / 1.2, rtol=1e-12)


def test_no_cross_effect():
    scn = scenario(n=4, a=(5.0, 8.0, 9.0, 12.0), c=0.0)
    np.testing.assert_allclose(equilibrium_prices(scn).p_star, np.array(scn.a) / (2 * scn.b), rtol=1e-15)


def test_asymmetric_matches_dense_solve():
    scn = scenario(n=3, a=(8.0, 10.0, 12.0))
    closed = equilibrium_prices(scn).p_star
    # independent oracle: assemble and solve the 3x3 system here
    b, c = scn.b, scn.c
    M = np.array([[2 * b, -c * b / 2, -c * b / 2], [-c * b / 2, 2 * b, -c * b / 2], [-c * b / 2, -c * b / 2, 2 * b]])
    oracle = np.linalg.solve(M, np.array([8.0, 10.0, 12.0]))
    np.testing.assert_allclose(closed, oracle, rtol=1e-12)


def test_single_retailer_is_a_monopolist():
    scn = scenario(n=1, a=(10.0,), c=0.5)
    eq = equilibrium_prices(scn)
    np.testing.assert_allclose(eq.p_star, [10 / (2 * 0.9)])
    np.testing.assert_allclose(solve_price_system(scn), eq.p_star)


def test_sum_of_base_demands(scn):
    scn = scenario(n=4, a=(5.0, 8.0, 9.0, 12.0))
    eq = equilibrium_prices(scn)
    assert eq.sum_q == pytest.approx(sum(scn.a) - (1 - scn.c) * scn.b * eq.p_star.sum(), rel=1e-13)
    assert not eq.diagnostics


def test_demand_is_linear_in_reputation_and_preference(scn):
    eq = equilibrium_prices(scn)
    np.testing.assert_array_equal(demand(eq, 0.6, 0.0), 0.0)
    np.testing.assert_allclose(demand(eq, 1.2, 2.5), 2 * demand(eq, 0.6, 2.5))
    # q_i = a / (2 - c) = 10 / 1.2, so Q_i(G = 1) = 5
    np.testing.assert_allclose(demand(eq, scn.theta, 1.0), 5.0, rtol=1e-12)
    with pytest.raises(ValueError):
        demand(eq, 0.6, -1.0)


@given(price_scenarios())
def test_fixed_point_of_best_responses(scn):
    p = equilibrium_prices(scn).p_star
    np.testing.assert_allclose(best_response_prices(scn, p), p, rtol=1e-12)


@given(price_scenarios())
def test_closed_form_matches_linear_solve(scn):
    np.testing.assert_allclose(equilibrium_prices(scn).p_star, solve_price_system(scn), rtol=1e-10)


@given(price_scenarios())
def test_base_demand_equals_b_times_price(scn):
    eq = equilibrium_prices(scn)
    np.testing.assert_allclose(eq.q, scn.b * eq.p_star, rtol=1e-10)
    np.testing.assert_allclose(base_demand(scn, eq.p_star), eq.q)


@given(
    st.floats(0.01, 10.0), st.floats(0.0, 5.0), st.floats(1.0, 2000.0), st.floats(0.1, 5.0), st.floats(0.01, 1.0)
)
def test_prices_ignore_reputation_and_manufacturer(theta, G0, lambda_m, mu_m, omega):
    base = equilibrium_prices(scenario())
    other = equilibrium_prices(scenario(theta=theta, G0=G0, lambda_m=lambda_m, mu_m=mu_m, omega=omega, p=3.0, F0=7.0))
    assert base.p_star.tobytes() == other.p_star.tobytes()
    assert base.q.tobytes() == other.q.tobytes()


def test_nonpositive_demand_is_diagnosed():
    # unreachable with positive potential sales, so bypass validation
    scn = assume_valid(reference_scenario(n=3, a=(-30.0, 1.0, 1.0), c=0.2))
    eq = equilibrium_prices(scn)
    assert (eq.q <= 0).any()
    assert eq.diagnostics and "q_" in eq.diagnostics[0]
