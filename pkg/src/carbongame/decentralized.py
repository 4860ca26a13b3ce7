"""Feedback Nash equilibrium when manufacturer and retailers act independently.

With V_m = A G^2 + B G + C and V_{r_i} = D_i G + H_i, the maximized HJB
right-hand sides are polynomials in G. Writing s = p_c theta omega sum(q),
the manufacturer's effort is E_m = ((s + 2 A mu_m) G + B mu_m) / lambda_m and
each retailer's is the constant mu_r D_i / lambda_r. Matching powers of G:

    G^2 (manufacturer):  4 mu_m^2 A^2 + (4 s mu_m - 2 lambda_m (rho + 2 delta)) A + s^2 = 0
    G^1 (retailer i):    D_i (rho + delta - mu_m (s + 2 A mu_m) / lambda_m) = p_i q_i theta
    G^1 (manufacturer):  B (rho + delta - (s mu_m + 2 A mu_m^2) / lambda_m)
                             = (p - p_c) theta sum(q) + 2 A mu_r^2 sum(D) / lambda_r
    G^0:                 rho C   = p_c F0 + B^2 mu_m^2 / (2 lambda_m) + B mu_r^2 sum(D) / lambda_r
                         rho H_i = -mu_r^2 D_i^2 / (2 lambda_r) + B D_i mu_m^2 / lambda_m
                                   + mu_r^2 D_i sum(D) / lambda_r
"""

from __future__ import annotations

import math

from .config import ValidatedScenario
from .pricing import PriceEquilibrium, equilibrium_prices
from .solution import (
    AffineLaw,
    Equilibrium,
    FeedbackStrategies,
    InteriorSolutionError,
    NoAdmissibleValueFunction,
    ValueCoefficients,
    carbon_intensity,
    check_efforts,
    common_diagnostics,
)


def discriminant(scn: ValidatedScenario, prices: PriceEquilibrium) -> float:
    s = carbon_intensity(scn, prices)
    lm, mm = scn.lambda_m, scn.mu_m
    return (4 * s * mm - 4 * lm * scn.delta - 2 * lm * scn.rho) ** 2 - 16 * (mm * s) ** 2


def match_coefficients(scn: ValidatedScenario, prices: PriceEquilibrium, root: int = -1) -> ValueCoefficients:
    """Coefficients for either root of the quadratic in A (``root`` = -1 or +1).

    No admissibility checks beyond a positive discriminant; see
    :func:`solve_decentralized` for the equilibrium proper.
    """
    disc = discriminant(scn, prices)
    if not disc > 0:
        raise NoAdmissibleValueFunction("decentralized", disc)
    s = carbon_intensity(scn, prices)
    lm, lr, mm, mr = scn.lambda_m, scn.lambda_r, scn.mu_m, scn.mu_r
    rho, delta = scn.rho, scn.delta

    A = (2 * lm * (rho + 2 * delta) - 4 * s * mm + root * math.sqrt(disc)) / (8 * mm**2)
    if s == 0 and root < 0:
        A = 0.0  # cancellation leaves roundoff otherwise

    closed_loop = lm * (rho + delta) - s * mm - 2 * A * mm**2
    D = lm * prices.p_star * prices.q * scn.theta / closed_loop
    sum_D = float(D.sum())
    B = ((scn.p - scn.p_c) * scn.theta * prices.sum_q + 2 * A * mr**2 * sum_D / lr) / (
        rho + delta - (s * mm + 2 * A * mm**2) / lm
    )
    C = scn.p_c * scn.F0 / rho + B**2 * mm**2 / (2 * lm * rho) + B * mr**2 * sum_D / (lr * rho)
    H = (-(mr**2) * D**2 / (2 * lr) + B * D * mm**2 / lm + mr**2 * D * sum_D / lr) / rho
    return ValueCoefficients(A=float(A), B=float(B), C=float(C), D=D, H=H, discriminant=float(disc))


def feedback_laws(scn: ValidatedScenario, prices: PriceEquilibrium, coeffs: ValueCoefficients) -> FeedbackStrategies:
    """Maximizers of the decentralized HJB brackets for given coefficients."""
    s = carbon_intensity(scn, prices)
    em = AffineLaw(
        slope=(s + 2 * coeffs.A * scn.mu_m) / scn.lambda_m,
        intercept=coeffs.B * scn.mu_m / scn.lambda_m,
    )
    er = tuple(AffineLaw(0.0, scn.mu_r * float(d) / scn.lambda_r) for d in coeffs.D)
    return FeedbackStrategies.from_laws(scn, em, er)


def solve_decentralized(
    scn: ValidatedScenario, prices: PriceEquilibrium | None = None
) -> tuple[ValueCoefficients, FeedbackStrategies]:
    prices = equilibrium_prices(scn) if prices is None else prices
    coeffs = match_coefficients(scn, prices)
    if not closed_loop_rate(scn, prices, coeffs) > 0:
        raise InteriorSolutionError("decentralized: retailer value slope denominator is not positive")
    strat = feedback_laws(scn, prices, coeffs)
    check_efforts("decentralized", strat)
    return coeffs, strat


def solve(scn: ValidatedScenario, prices: PriceEquilibrium | None = None) -> Equilibrium:
    prices = equilibrium_prices(scn) if prices is None else prices
    coeffs, strat = solve_decentralized(scn, prices)
    return Equilibrium(
        model="decentralized",
        scenario=scn,
        prices=prices,
        coeffs=coeffs,
        strategies=strat,
        diagnostics=tuple(common_diagnostics(scn, prices, strat)),
    )


def closed_loop_rate(scn: ValidatedScenario, prices: PriceEquilibrium, coeffs: ValueCoefficients) -> float:
    """lambda_m (rho + delta) - s mu_m - 2 A mu_m^2; equals (2 lambda_m rho + sqrt(disc)) / 4 on the minus root."""
    s = carbon_intensity(scn, prices)
    return scn.lambda_m * (scn.rho + scn.delta) - s * scn.mu_m - 2 * coeffs.A * scn.mu_m**2

