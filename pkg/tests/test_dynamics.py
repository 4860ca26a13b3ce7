import csv
import io
import logging
import math

import numpy as np
import pytest

from carbongame import decentralized
from carbongame.config import assume_valid, reference_scenario
from carbongame.dynamics import (
    TruncationError,
    discounted_profit,
    simulate,
    simulate_equilibrium,
    trajectory_csv,
)
from carbongame.solution import AffineLaw, FeedbackStrategies, UnstableLoopError


def idle(scn):
    zero = AffineLaw(0.0, 0.0)
    return FeedbackStrategies.from_laws(scn, zero, (zero,) * scn.n)


def test_steady_start_is_flat(eq):
    scn = eq.scenario.replace(G0=eq.Gs)
    traj = simulate(scn, eq.strategies, prices=eq.prices)
    for series in (traj.G, traj.Em, traj.F, traj.pi_m):
        assert np.ptp(series) <= 1e-12 * max(1.0, np.abs(series).max())
    assert np.ptp(traj.Er, axis=0).max() <= 1e-12 * np.abs(traj.Er).max()
    assert np.ptp(traj.x, axis=0).max() <= 1e-12


def test_rises_from_zero(eq):
    traj = simulate_equilibrium(eq)
    assert np.all(np.diff(traj.G) > 0)
    assert traj.G[-1] == pytest.approx(eq.Gs, rel=1e-10)


def test_idle_players_give_pure_decay(scn):
    s = scn.replace(G0=2.5)
    traj = simulate(s, idle(s))
    np.testing.assert_allclose(traj.G, 2.5 * np.exp(-s.delta * traj.times), rtol=1e-9, atol=1e-12)


def test_rk4_matches_affine_solution(eq):
    traj = simulate_equilibrium(eq, dt=1e-3)
    G_exact = eq.Gs * (1 - np.exp(-eq.strategies.delta_eff * traj.times))
    assert np.max(np.abs(traj.G - G_exact)) < 1e-8


def test_constant_flow_annuity(eq):
    scn = eq.scenario.replace(G0=eq.Gs)
    traj = simulate(scn, eq.strategies, prices=eq.prices)
    f = traj.pi_m[0]
    assert discounted_profit(traj, scn, "manufacturer") == pytest.approx(f / scn.rho, rel=1e-8)
    f1 = traj.pi_r[0, 0]
    assert discounted_profit(traj, scn, 0) == pytest.approx(f1 / scn.rho, rel=1e-8)


def test_quadrature_matches_value_function(eq):
    scn = eq.scenario
    traj = simulate_equilibrium(eq)
    V0 = float(eq.coeffs.value_m(scn.G0))
    assert abs(discounted_profit(traj, scn, "manufacturer") - V0) < 1e-5 * max(1.0, abs(V0))
    for i in range(scn.n):
        Vi = float(eq.coeffs.value_r(i, scn.G0))
        assert abs(discounted_profit(traj, scn, i) - Vi) < 1e-5 * max(1.0, abs(Vi))


def test_quota_annuity_alone():
    scn = assume_valid(reference_scenario(p=0.0, theta=0.0))
    eq = decentralized.solve(scn)
    traj = simulate_equilibrium(eq)
    expected = scn.p_c * scn.F0 / scn.rho
    assert discounted_profit(traj, scn, "m") == pytest.approx(expected, rel=1e-8)
    assert eq.coeffs.value_m(0.0) == pytest.approx(expected, rel=1e-15)


def test_carbon_account_identity(eq):
    traj = simulate_equilibrium(eq)
    F0 = eq.scenario.F0
    recon = traj.F + (1 - eq.scenario.omega * traj.Em) * traj.Q.sum(axis=1)
    assert np.max(np.abs(recon - F0)) <= 4 * np.finfo(float).eps * F0


def test_short_horizon_is_a_truncation_error(eq):
    traj = simulate_equilibrium(eq, T=5.0)
    with pytest.raises(TruncationError, match="tail_tol"):
        discounted_profit(traj, eq.scenario, "manufacturer")


def test_unstable_loop_rejected(scn):
    strat = FeedbackStrategies.from_laws(scn, AffineLaw(1.0, 0.0), (AffineLaw(0.0, 0.0),) * scn.n)
    assert strat.delta_eff < 0
    with pytest.raises(UnstableLoopError):
        simulate(scn, strat)


def test_step_too_large(eq):
    with pytest.raises(ValueError, match="dt"):
        simulate_equilibrium(eq, dt=1.0)


def test_open_loop_divergence_is_logged(eq, caplog):
    with caplog.at_level(logging.INFO, logger="carbongame"):
        traj = simulate_equilibrium(eq)
    assert traj.open_loop_divergence > 0
    assert any("divergence" in r.message for r in caplog.records)


def test_csv_layout_and_round_trip(eq_s):
    traj = simulate_equilibrium(eq_s, T=1.0)
    text = trajectory_csv(traj)
    assert text == trajectory_csv(simulate_equilibrium(eq_s, T=1.0))
    rows = list(csv.reader(io.StringIO(text)))
    n = 6
    header = ["t", "G", "Em"] + [f"Er_{i}" for i in range(1, n + 1)] + [f"Q_{i}" for i in range(1, n + 1)]
    header += ["F"] + [f"x_{i}" for i in range(1, n + 1)] + ["pi_m"] + [f"pi_r_{i}" for i in range(1, n + 1)]
    assert rows[0] == header
    assert len(rows) == len(traj.times) + 1
    G = np.array([float(r[1]) for r in rows[1:]])
    assert G.tobytes() == traj.G.tobytes()
    assert float(rows[-1][3 + 2 * n + 1]) == traj.x[-1, 0]


def test_decentralized_has_zero_subsidy_columns(eq_d):
    traj = simulate_equilibrium(eq_d, T=1.0)
    assert not traj.subsidized
    assert np.all(traj.x == 0)


def test_tail_tolerance_formula(scn):
    need = -math.log(scn.tail_tol) / scn.rho
    assert scn.T > need
