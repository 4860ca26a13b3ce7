"""Retail price equilibrium and base demand intensities.

Retailers choose prices once and for all: the pricing first-order condition
does not involve reputation, so the same price vector applies in both game
models. Demand at reputation ``G`` is ``Q_i = q_i * theta * G``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ValidatedScenario


@dataclass(frozen=True)
class PriceEquilibrium:
    p_star: np.ndarray
    q: np.ndarray
    sum_q: float

    @property
    def diagnostics(self) -> list[str]:
        return [
            f"nonpositive base demand q_{i + 1}={qi!r}"
            for i, qi in enumerate(self.q)
            if not qi > 0
        ]


def _cross_weight(n: int) -> float:
    # a lone retailer has no rivals, so the cross-price term is empty
    return 0.0 if n == 1 else 1.0 / (n - 1)


def base_demand(scn: ValidatedScenario, prices: np.ndarray) -> np.ndarray:
    """q_i = a_i - b p_i + c * sum_{k != i} b p_k / (n - 1), for arbitrary prices."""
    prices = np.asarray(prices, dtype=float)
    a = np.asarray(scn.a)
    rivals = prices.sum() - prices
    return a - scn.b * prices + scn.c * scn.b * rivals * _cross_weight(scn.n)


def best_response_prices(scn: ValidatedScenario, prices: np.ndarray) -> np.ndarray:
    """Each retailer's profit-maximizing price given the others' prices."""
    prices = np.asarray(prices, dtype=float)
    a = np.asarray(scn.a)
    rivals = prices.sum() - prices
    return (a + scn.c * scn.b * rivals * _cross_weight(scn.n)) / (2.0 * scn.b)


def equilibrium_prices(scn: ValidatedScenario) -> PriceEquilibrium:
    """Closed-form Nash prices of the retail stage.

    For n >= 2 summing the best responses gives sum(p) = sum(a) / (b (2 - c)),
    which decouples each retailer's condition. A single retailer is a
    monopolist and charges a / (2b).
    """
    a = np.asarray(scn.a, dtype=float)
    n, b, c = scn.n, scn.b, scn.c
    if n == 1:
        p_star = a / (2.0 * b)
    else:
        p_star = ((n - 1) * (2 - c) * a + c * a.sum()) / (b * (2 - c) * (2 * n - 2 + c))
    q = base_demand(scn, p_star)
    return PriceEquilibrium(p_star=p_star, q=q, sum_q=float(q.sum()))


def solve_price_system(scn: ValidatedScenario) -> np.ndarray:
    """Dense linear solve of the stacked best-response conditions.

    Kept as an independent check of :func:`equilibrium_prices`:
    2b p_i - (c b / (n - 1)) sum_{k != i} p_k = a_i.
    """
    n = scn.n
    w = scn.c * scn.b * _cross_weight(n)
    M = np.full((n, n), -w)
    np.fill_diagonal(M, 2.0 * scn.b)
    return np.linalg.solve(M, np.asarray(scn.a, dtype=float))


def demand(prices: PriceEquilibrium, theta: float, G: float | np.ndarray) -> np.ndarray:
    """Q_i = q_i * theta * G. Vectorizes over ``G`` on the leading axis."""
    G = np.asarray(G, dtype=float)
    if np.any(G < 0):
        raise ValueError("reputation G must be nonnegative")
    return np.multiply.outer(G, prices.q) * theta
