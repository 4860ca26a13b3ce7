"""Independent checks of solved equilibria.

Nothing here reuses the coefficient-matching algebra. The HJB brackets are
written directly from the players' payoffs and the reputation dynamics, and
the dynamic-programming oracle solves each player's problem by brute-force
backward induction on a grid with the other players frozen at their feedback
laws.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Union

import numpy as np

from .config import ValidatedScenario
from .pricing import PriceEquilibrium, base_demand, equilibrium_prices, solve_price_system
from .solution import FeedbackStrategies, ValueCoefficients

Agent = Union[Literal["manufacturer"], int]

HJB_TOL = 1e-8
STATIONARITY_TOL = 1e-6
VALUE_TOL = 1e-5
PRICE_TOL = 1e-10
DP_VALUE_TOL = 0.02


class GridCoverageError(ValueError):
    """The control grid does not bracket the optimum."""


# ---------------------------------------------------------------------------
# HJB brackets, straight from the payoffs


def _controls(strat: FeedbackStrategies, G: np.ndarray):
    Em = strat.Em(G)
    Er = strat.efforts_r(G)
    x = strat.subsidy(G)
    return Em, Er, x


def _gdot(scn: ValidatedScenario, G, Em, Er):
    return scn.mu_m * Em + scn.mu_r * np.sum(Er, axis=-1) - scn.delta * G


def manufacturer_bracket(scn, q, G, Em, Er, x, dVm):
    """Flow payoff plus V_m' * Gdot for the manufacturer.

    ``q`` are the base demand intensities; ``x`` the subsidy rates (zero in
    the decentralized game).
    """
    total_Q = scn.theta * G * np.sum(q)
    emissions = (1.0 - scn.omega * Em) * total_Q
    flow = (
        scn.p * total_Q
        + scn.p_c * (scn.F0 - emissions)
        - 0.5 * scn.lambda_m * Em**2
        - 0.5 * scn.lambda_r * np.sum(x * Er**2, axis=-1)
    )
    return flow + dVm * _gdot(scn, G, Em, Er)


def retailer_bracket(scn, prices_vec, i, G, Em, Er, x, dVr):
    q = base_demand(scn, prices_vec)
    flow = prices_vec[i] * q[i] * scn.theta * G - 0.5 * (1.0 - x[..., i]) * scn.lambda_r * Er[..., i] ** 2
    return flow + dVr * _gdot(scn, G, Em, Er)


def hjb_residuals(
    scn: ValidatedScenario,
    coeffs: ValueCoefficients,
    strategies: FeedbackStrategies,
    G_grid: np.ndarray,
    prices: Optional[PriceEquilibrium] = None,
) -> dict[str, float]:
    """Max over the grid of |rho V - bracket| / max(1, |rho V|), per player."""
    prices = equilibrium_prices(scn) if prices is None else prices
    G = np.asarray(G_grid, dtype=float)
    Em, Er, x = _controls(strategies, G)
    A, B, C = coeffs.A, coeffs.B, coeffs.C
    rhoV = scn.rho * (A * G**2 + B * G + C)
    rhs = manufacturer_bracket(scn, prices.q, G, Em, Er, x, 2 * A * G + B)
    out = {"manufacturer": float(np.max(np.abs(rhoV - rhs) / np.maximum(1.0, np.abs(rhoV))))}
    for i in range(scn.n):
        rhoV = scn.rho * (coeffs.D[i] * G + coeffs.H[i])
        rhs = retailer_bracket(scn, prices.p_star, i, G, Em, Er, x, coeffs.D[i])
        out[f"retailer_{i + 1}"] = float(np.max(np.abs(rhoV - rhs) / np.maximum(1.0, np.abs(rhoV))))
    return out


def hjb_residual(scn, model, coeffs, strategies, G_grid, prices=None) -> float:
    """Worst relative HJB residual across all players.

    ``model`` is accepted for symmetry with the other checks; the subsidy
    terms are switched on by the presence of a subsidy law in ``strategies``.
    """
    del model
    return max(hjb_residuals(scn, coeffs, strategies, G_grid, prices).values())


# ---------------------------------------------------------------------------
# first-order conditions by central differences


def _central(f: Callable[[float], np.ndarray], u: np.ndarray, h: np.ndarray) -> np.ndarray:
    return (f(u + h) - f(u - h)) / (2.0 * h)


def stationarity_report(
    scn: ValidatedScenario,
    model: str,
    coeffs: ValueCoefficients,
    strategies: FeedbackStrategies,
    G_grid: np.ndarray,
    prices: Optional[PriceEquilibrium] = None,
    price_vec: Optional[np.ndarray] = None,
) -> dict[str, float]:
    """Scaled finite-difference gradient of each bracket in each own control.

    Each entry is max over the grid of |d bracket / d u| * max(1, |u|) /
    max(1, |rho V|); steps are 1e-5 * max(1, |u|), or 1e-5 * (1 - x) for
    subsidy rates. ``price_vec`` overrides the retail prices (to probe a
    deliberately wrong price).
    """
    prices = equilibrium_prices(scn) if prices is None else prices
    p_vec = prices.p_star if price_vec is None else np.asarray(price_vec, dtype=float)
    q = base_demand(scn, p_vec)
    G = np.asarray(G_grid, dtype=float)
    Em, Er, x = _controls(strategies, G)
    dVm = coeffs.dvalue_m(G)
    rhoVm = np.maximum(1.0, np.abs(scn.rho * coeffs.value_m(G)))
    report: dict[str, float] = {}

    def scaled(grad, u, norm):
        return float(np.max(np.abs(grad) * np.maximum(1.0, np.abs(u)) / norm))

    def step(u):
        return 1e-5 * np.maximum(1.0, np.abs(u))

    report["E_m"] = scaled(
        _central(lambda u: manufacturer_bracket(scn, q, G, u, Er, x, dVm), Em, step(Em)), Em, rhoVm
    )

    for i in range(scn.n):
        rhoVr = np.maximum(1.0, np.abs(scn.rho * coeffs.value_r(i, G)))
        D_i = coeffs.D[i]

        def with_er(u, i=i):
            er = Er.copy()
            er[..., i] = u
            return er

        u = Er[..., i]
        g = _central(lambda v: retailer_bracket(scn, p_vec, i, G, Em, with_er(v), x, D_i), u, step(u))
        report[f"E_r_{i + 1}"] = scaled(g, u, rhoVr)

        p_i = np.full_like(G, p_vec[i])

        def with_price(v, i=i):
            # v is an array over the grid; evaluate pointwise
            out = np.empty_like(G)
            for k, vk in enumerate(v):
                pv = p_vec.copy()
                pv[i] = vk
                out[k] = retailer_bracket(scn, pv, i, G[k], Em[k], Er[k], x[k], D_i)
            return out

        report[f"p_{i + 1}"] = scaled(_central(with_price, p_i, step(p_i)), p_i, rhoVr)

        if model == "stackelberg":
            # leader's choice of x_i, with the follower responding to it
            def leader_x(v, i=i):
                xx = x.copy()
                xx[..., i] = v
                er = Er.copy()
                er[..., i] = scn.mu_r * D_i / (scn.lambda_r * (1.0 - v))
                return manufacturer_bracket(scn, q, G, Em, er, xx, dVm)

            # the bracket has a pole at x = 1, so step relative to the distance from it
            xi = x[..., i]
            report[f"x_{i + 1}"] = scaled(_central(leader_x, xi, 1e-5 * (1.0 - xi)), xi, rhoVm)
    return report


def stationarity_check(scn, model, coeffs, strategies, G_grid, prices=None, price_vec=None) -> float:
    return max(stationarity_report(scn, model, coeffs, strategies, G_grid, prices, price_vec).values())


def price_oracle_error(scn: ValidatedScenario) -> float:
    """Relative gap between closed-form prices and the dense linear solve."""
    closed = equilibrium_prices(scn).p_star
    dense = solve_price_system(scn)
    return float(np.max(np.abs(closed - dense) / np.abs(dense)))


# ---------------------------------------------------------------------------
# dynamic-programming best response


@dataclass(frozen=True)
class GridSpec:
    g_min: float
    g_max: float
    n_g: int
    u_min: float
    u_max: float
    n_u: int
    dt: float
    steps: int
    # "implicit": beta = 1/(1 + rho dt), flow weight beta dt (consistent to first order
    # in the policy); "exponential": beta = exp(-rho dt), flow weight dt.
    discount: Literal["implicit", "exponential"] = "implicit"
    interior: float = 0.1  # fraction of the G grid excluded at each end for comparisons


@dataclass(frozen=True)
class DPResult:
    G: np.ndarray
    controls: np.ndarray
    policy: np.ndarray
    value: np.ndarray
    interior: np.ndarray = field(repr=False)

    @property
    def cell(self) -> float:
        return float(self.controls[1] - self.controls[0])

    def policy_gap_cells(self, law: Callable[[np.ndarray], np.ndarray]) -> float:
        """Max interior |DP policy - law(G)| in units of the control-grid spacing."""
        gap = np.abs(self.policy - law(self.G))[self.interior]
        return float(gap.max() / self.cell)

    def value_gap(self, value_fn: Callable[[np.ndarray], np.ndarray]) -> float:
        """Max interior relative gap between the DP value and ``value_fn``."""
        ref = value_fn(self.G)
        return float((np.abs(self.value - ref) / np.maximum(1.0, np.abs(ref)))[self.interior].max())

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("G,policy,value\n")
        for g, u, v in zip(self.G, self.policy, self.value):
            buf.write(f"{g:.17g},{u:.17g},{v:.17g}\n")
        return buf.getvalue()


def _interp_linear(xq: np.ndarray, x0: float, h: float, values: np.ndarray) -> np.ndarray:
    """Linear interpolation on a uniform grid, extrapolating linearly past the ends."""
    pos = (xq - x0) / h
    idx = np.clip(np.floor(pos).astype(int), 0, values.size - 2)
    w = pos - idx
    return values[idx] * (1.0 - w) + values[idx + 1] * w


def dp_best_response(
    scn: ValidatedScenario,
    model: str,
    agent: Agent,
    grid: GridSpec,
    strategies: FeedbackStrategies,
    prices: Optional[PriceEquilibrium] = None,
) -> DPResult:
    """Finite-horizon backward induction for one player's effort.

    The other players follow ``strategies``. Reputation advances by one Euler
    step per stage; the terminal value is zero. In the Stackelberg game the
    retailer takes the leader's subsidy law as given, and the manufacturer
    optimizes effort with the subsidy law and follower responses fixed.
    """
    del model  # subsidy terms follow from strategies.x
    prices = equilibrium_prices(scn) if prices is None else prices
    G = np.linspace(grid.g_min, grid.g_max, grid.n_g)
    U = np.linspace(grid.u_min, grid.u_max, grid.n_u)
    h = G[1] - G[0]
    dt = grid.dt
    if grid.discount == "implicit":
        beta = 1.0 / (1.0 + scn.rho * dt)
        weight = beta * dt
    else:
        beta = math.exp(-scn.rho * dt)
        weight = dt

    Em, Er, x = _controls(strategies, G)
    theta_G = scn.theta * G
    g = G[:, None]
    u = U[None, :]
    if agent == "manufacturer":
        total_Q = (theta_G * prices.sum_q)[:, None]
        subsidy_cost = 0.5 * scn.lambda_r * np.sum(x * Er**2, axis=-1)[:, None]
        flow = scn.p * total_Q + scn.p_c * (scn.F0 - (1.0 - scn.omega * u) * total_Q) - 0.5 * scn.lambda_m * u**2 - subsidy_cost
        others = (scn.mu_r * Er.sum(axis=-1))[:, None]
        G_next = g + dt * (scn.mu_m * u + others - scn.delta * g)
    else:
        i = int(agent)
        revenue = (prices.p_star[i] * prices.q[i] * theta_G)[:, None]
        flow = revenue - 0.5 * (1.0 - x[:, i])[:, None] * scn.lambda_r * u**2
        others = (scn.mu_m * Em + scn.mu_r * (Er.sum(axis=-1) - Er[:, i]))[:, None]
        G_next = g + dt * (scn.mu_r * u + others - scn.delta * g)

    flow = flow * weight
    V = np.zeros(grid.n_g)
    best = np.zeros(grid.n_g, dtype=int)
    rows = np.arange(grid.n_g)
    for _ in range(grid.steps):
        total = flow + beta * _interp_linear(G_next, G[0], h, V)
        best = total.argmax(axis=1)
        V = total[rows, best]

    cut = int(round(grid.interior * (grid.n_g - 1)))
    interior = np.zeros(grid.n_g, dtype=bool)
    interior[cut : grid.n_g - cut] = True
    edge = interior & ((best == 0) | (best == grid.n_u - 1))
    if edge.any():
        raise GridCoverageError(
            f"optimal control hits the grid edge at G={G[edge][:3]}... ; widen [{grid.u_min}, {grid.u_max}]"
        )
    return DPResult(G=G, controls=U, policy=U[best], value=V, interior=interior)


def bracketing_grid(
    strategies: FeedbackStrategies,
    agent: Agent,
    g_max: float,
    *,
    n_g: int = 201,
    n_u: int = 201,
    spread: float = 0.5,
    dt: float = 0.05,
    steps: int = 400,
    discount: Literal["implicit", "exponential"] = "implicit",
) -> GridSpec:
    """Grid on [0, g_max] whose control range brackets the feedback law by +-spread."""
    law = strategies.Em if agent == "manufacturer" else strategies.Er[int(agent)]
    ends = law(np.array([0.0, g_max]))
    return GridSpec(
        g_min=0.0, g_max=g_max, n_g=n_g,
        u_min=(1 - spread) * float(ends.min()), u_max=(1 + spread) * float(ends.max()), n_u=n_u,
        dt=dt, steps=steps, discount=discount,
    )  # fmt: skip
