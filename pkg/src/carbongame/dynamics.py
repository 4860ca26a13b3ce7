"""Closed-loop reputation paths, profit flows and discounted profits.

Under affine feedback laws the reputation ODE is scalar and affine,
Gdot = -delta_eff (G - Gs), so every path has an exact exponential form. The
numerical path (fixed-step RK4) is kept alongside it as a cross-check.
"""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.integrate import simpson

from .config import ValidatedScenario
from .pricing import PriceEquilibrium, equilibrium_prices
from .solution import Equilibrium, FeedbackStrategies, SubsidyLaw, UnstableLoopError

log = logging.getLogger(__name__)

Role = Union[str, int]

# RK4 and the exact solution must agree to this fraction of the state scale
_RK4_AGREEMENT = 1e-3


class TruncationError(RuntimeError):
    """The simulated horizon is too short for the requested tail tolerance."""


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    G: np.ndarray  # RK4
    G_exact: np.ndarray  # closed-loop exponential with delta_eff
    G_open_loop: np.ndarray  # same steady state, decaying at the open-loop rate delta
    Em: np.ndarray
    Er: np.ndarray  # (len(times), n)
    Q: np.ndarray  # (len(times), n)
    F: np.ndarray
    x: np.ndarray  # (len(times), n); zeros without a subsidy law
    pi_m: np.ndarray
    pi_r: np.ndarray  # (len(times), n)
    Gs: float
    delta_eff: float
    subsidized: bool
    pi_m_ss: float  # flows at the steady state, used for the analytic tail
    pi_r_ss: np.ndarray

    @property
    def rk4_error(self) -> float:
        return float(np.max(np.abs(self.G - self.G_exact)))

    @property
    def open_loop_divergence(self) -> float:
        """max_t |G with decay delta - G with decay delta_eff|."""
        return float(np.max(np.abs(self.G_open_loop - self.G_exact)))


def profit_flows(
    scn: ValidatedScenario,
    prices: PriceEquilibrium,
    G: np.ndarray,
    Em: np.ndarray,
    Er: np.ndarray,
    x: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Instantaneous (pi_m, pi_r, Q, F) for arrays of states and controls.

    The subsidy terms vanish when ``x`` is zero, which recovers the
    decentralized payoffs.
    """
    G = np.asarray(G, dtype=float)
    Q = np.multiply.outer(G, prices.q) * scn.theta
    total_Q = Q.sum(axis=-1)
    F = scn.F0 - (1.0 - scn.omega * Em) * total_Q
    pi_m = scn.p * total_Q + scn.p_c * F - 0.5 * scn.lambda_m * Em**2 - 0.5 * scn.lambda_r * (x * Er**2).sum(axis=-1)
    pi_r = prices.p_star * Q - 0.5 * (1.0 - x) * scn.lambda_r * Er**2
    return pi_m, pi_r, Q, F


def _drift(scn: ValidatedScenario, strat: FeedbackStrategies, G: float) -> float:
    er = sum(law(G) for law in strat.Er)
    return float(scn.mu_m * strat.Em(G) + scn.mu_r * er - scn.delta * G)


def simulate(
    scn: ValidatedScenario,
    strategies: FeedbackStrategies,
    subsidy: Optional[SubsidyLaw] = None,
    *,
    prices: Optional[PriceEquilibrium] = None,
    T: Optional[float] = None,
    dt: Optional[float] = None,
) -> Trajectory:
    """Integrate the closed loop from ``scn.G0`` on the grid 0, dt, ..., T.

    ``subsidy`` defaults to the law carried by ``strategies`` (Stackelberg);
    without one the decentralized payoffs are used.
    """
    prices = equilibrium_prices(scn) if prices is None else prices
    subsidy = strategies.x if subsidy is None else subsidy
    T = scn.T if T is None else T
    dt = scn.dt if dt is None else dt
    d_eff = strategies.delta_eff
    if d_eff <= 0:
        raise UnstableLoopError(f"closed-loop decay rate {d_eff!r} <= 0; reputation diverges")
    if dt * abs(d_eff) >= 0.5:
        raise ValueError(f"dt={dt} too large for decay rate {d_eff}: need dt * delta_eff < 0.5")

    steps = int(round(T / dt))
    times = np.arange(steps + 1) * dt
    G = np.empty(steps + 1)
    G[0] = g = scn.G0
    for k in range(steps):
        k1 = _drift(scn, strategies, g)
        k2 = _drift(scn, strategies, g + 0.5 * dt * k1)
        k3 = _drift(scn, strategies, g + 0.5 * dt * k2)
        k4 = _drift(scn, strategies, g + dt * k3)
        g = g + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        G[k + 1] = g

    Gs = strategies.Gs
    G_exact = Gs + (scn.G0 - Gs) * np.exp(-d_eff * times)
    G_open_loop = Gs + (scn.G0 - Gs) * np.exp(-scn.delta * times)
    scale = max(1.0, abs(Gs), abs(scn.G0))
    err = float(np.max(np.abs(G - G_exact)))
    if err > _RK4_AGREEMENT * scale:
        raise RuntimeError(f"RK4 path departs from the exact solution by {err!r}")

    Em = strategies.Em(G)
    Er = strategies.efforts_r(G)
    x = subsidy(G) if subsidy is not None else np.zeros_like(Er)
    pi_m, pi_r, Q, F = profit_flows(scn, prices, G, Em, Er, x)

    Gs_arr = np.array(Gs)
    x_ss = subsidy(Gs_arr) if subsidy is not None else np.zeros(scn.n)
    pi_m_ss, pi_r_ss, _, _ = profit_flows(scn, prices, Gs_arr, strategies.Em(Gs_arr), strategies.efforts_r(Gs_arr), x_ss)

    traj = Trajectory(
        times=times, G=G, G_exact=G_exact, G_open_loop=G_open_loop,
        Em=Em, Er=Er, Q=Q, F=F, x=x, pi_m=pi_m, pi_r=pi_r,
        Gs=float(Gs), delta_eff=float(d_eff), subsidized=subsidy is not None,
        pi_m_ss=float(pi_m_ss), pi_r_ss=np.asarray(pi_r_ss, dtype=float),
    )  # fmt: skip
    log.info("open-loop trajectory divergence max|G(delta) - G(delta_eff)| = %.6g", traj.open_loop_divergence)
    return traj


def simulate_equilibrium(eq: Equilibrium, **kw) -> Trajectory:
    return simulate(eq.scenario, eq.strategies, prices=eq.prices, **kw)


def discounted_profit(traj: Trajectory, scn: ValidatedScenario, role: Role) -> float:
    """Discounted profit over [0, inf): Simpson on the path plus an analytic tail.

    ``role`` is ``"manufacturer"`` or a zero-based retailer index. Past the
    horizon the flow is taken at its steady-state value, so the tail is
    exp(-rho T) * flow(Gs) / rho.
    """
    T = float(traj.times[-1])
    decay = math.exp(-scn.rho * T)
    if not decay < scn.tail_tol:
        raise TruncationError(
            f"exp(-rho T) = {decay:.3g} >= tail_tol = {scn.tail_tol:.3g}; "
            f"need T > {-math.log(scn.tail_tol) / scn.rho:.4g}"
        )
    if role in ("manufacturer", "m"):
        flow, flow_ss = traj.pi_m, traj.pi_m_ss
    else:
        flow, flow_ss = traj.pi_r[:, int(role)], float(traj.pi_r_ss[int(role)])
    body = simpson(np.exp(-scn.rho * traj.times) * flow, x=traj.times)
    return float(body + decay * flow_ss / scn.rho)


def trajectory_csv(traj: Trajectory) -> str:
    """CSV with fixed column order and 17 significant digits per value."""
    n = traj.Er.shape[1]
    header = (
        ["t", "G", "Em"]
        + [f"Er_{i}" for i in range(1, n + 1)]
        + [f"Q_{i}" for i in range(1, n + 1)]
        + ["F"]
        + [f"x_{i}" for i in range(1, n + 1)]
        + ["pi_m"]
        + [f"pi_r_{i}" for i in range(1, n + 1)]
    )
    cols = np.column_stack(
        [traj.times, traj.G, traj.Em, traj.Er, traj.Q, traj.F, traj.x, traj.pi_m, traj.pi_r]
    )
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in cols:
        buf.write(",".join(format(float(v), ".17g") for v in row) + "\n")
    return buf.getvalue()
