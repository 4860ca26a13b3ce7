"""Feedback Stackelberg equilibrium with a manufacturer-paid promotion subsidy.

Backward induction. Retailer i, facing subsidy rate x_i, picks
E_{r_i} = mu_r D_i / (lambda_r (1 - x_i)) and the same retail price as in the
decentralized game. The manufacturer anticipates that response; maximizing
over x_i gives

    x_i(G) = (2 V_m'(G) - D_i) / (2 V_m'(G) + D_i),   V_m'(G) = 2 A G + B,

after which the retailer effort is affine in G:
E_{r_i}(G) = mu_r (2 V_m'(G) + D_i) / (2 lambda_r). Net of the subsidy it
pays, the manufacturer's bracket gains mu_r^2 (2 V_m' + D_i)^2 / (8 lambda_r)
per retailer. Matching powers of G, with K = lambda_r mu_m^2 + n lambda_m mu_r^2:

    G^2:  4 K A^2 + lambda_r (4 s mu_m - 2 lambda_m (rho + 2 delta)) A + lambda_r s^2 = 0
    d_eff = delta - mu_m (s + 2 A mu_m) / lambda_m - 2 n A mu_r^2 / lambda_r
    D_i   = p_i q_i theta / (rho + d_eff + A mu_r^2 / lambda_r)
    B     = ((p - p_c) theta sum(q) + A mu_r^2 sum(D) / lambda_r) / (rho + d_eff)
    rho C = p_c F0 + B^2 mu_m^2 / (2 lambda_m) + mu_r^2 sum((2B + D_i)^2) / (8 lambda_r)
    rho H_i = D_i (mu_r^2 (4nB + 2 sum(D) - 2B - D_i) / (4 lambda_r) + B mu_m^2 / lambda_m)
"""

from __future__ import annotations

import math

from .config import ValidatedScenario
from .pricing import PriceEquilibrium, equilibrium_prices
from .solution import (
    AffineLaw,
    Equilibrium,
    FeedbackStrategies,
    NoAdmissibleValueFunction,
    SubsidyLaw,
    SubsidyRangeError,
    ValueCoefficients,
    carbon_intensity,
    check_efforts,
    common_diagnostics,
)


def discriminant(scn: ValidatedScenario, prices: PriceEquilibrium) -> float:
    s = carbon_intensity(scn, prices)
    lm, lr, mm, mr = scn.lambda_m, scn.lambda_r, scn.mu_m, scn.mu_r
    K = lr * mm**2 + scn.n * lm * mr**2
    lin = 4 * lm * lr * scn.delta + 2 * lm * lr * scn.rho - 4 * lr * mm * s
    return lin**2 - 16 * lr * K * s**2


def effective_decay(scn: ValidatedScenario, prices: PriceEquilibrium, A: float) -> float:
    s = carbon_intensity(scn, prices)
    return (
        scn.delta
        - scn.mu_m * (s + 2 * A * scn.mu_m) / scn.lambda_m
        - 2 * scn.n * A * scn.mu_r**2 / scn.lambda_r
    )


def match_coefficients(scn: ValidatedScenario, prices: PriceEquilibrium, root: int = -1) -> ValueCoefficients:
    disc = discriminant(scn, prices)
    if not disc > 0:
        raise NoAdmissibleValueFunction("stackelberg", disc)
    s = carbon_intensity(scn, prices)
    lm, lr, mm, mr, n = scn.lambda_m, scn.lambda_r, scn.mu_m, scn.mu_r, scn.n
    rho = scn.rho
    K = lr * mm**2 + n * lm * mr**2

    A = (4 * lm * lr * scn.delta + 2 * lm * lr * rho - 4 * lr * mm * s + root * math.sqrt(disc)) / (8 * K)
    if s == 0 and root < 0:
        A = 0.0

    d_eff = effective_decay(scn, prices, A)
    D = prices.p_star * prices.q * scn.theta / (rho + d_eff + A * mr**2 / lr)
    sum_D = float(D.sum())
    B = ((scn.p - scn.p_c) * scn.theta * prices.sum_q + A * mr**2 * sum_D / lr) / (rho + d_eff)
    C = (
        scn.p_c * scn.F0 / rho
        + B**2 * mm**2 / (2 * lm * rho)
        + mr**2 * float(((2 * B + D) ** 2).sum()) / (8 * lr * rho)
    )
    H = D * (mr**2 * (4 * n * B + 2 * sum_D - 2 * B - D) / (4 * lr) + B * mm**2 / lm) / rho
    return ValueCoefficients(A=float(A), B=float(B), C=float(C), D=D, H=H, discriminant=float(disc))


def feedback_laws(scn: ValidatedScenario, prices: PriceEquilibrium, coeffs: ValueCoefficients) -> FeedbackStrategies:
    s = carbon_intensity(scn, prices)
    A, B = coeffs.A, coeffs.B
    em = AffineLaw(slope=(s + 2 * A * scn.mu_m) / scn.lambda_m, intercept=B * scn.mu_m / scn.lambda_m)
    er = tuple(
        AffineLaw(
            slope=2 * A * scn.mu_r / scn.lambda_r,
            intercept=scn.mu_r * (2 * B + float(d)) / (2 * scn.lambda_r),
        )
        for d in coeffs.D
    )
    return FeedbackStrategies.from_laws(scn, em, er, x=SubsidyLaw(A=A, B=B, D=coeffs.D))


def solve_stackelberg(
    scn: ValidatedScenario, prices: PriceEquilibrium | None = None
) -> tuple[ValueCoefficients, FeedbackStrategies, SubsidyLaw]:
    prices = equilibrium_prices(scn) if prices is None else prices
    coeffs = match_coefficients(scn, prices)
    strat = feedback_laws(scn, prices, coeffs)
    check_efforts("stackelberg", strat)
    x_s = strat.subsidy(strat.Gs)
    bad = [(i, float(x)) for i, x in enumerate(x_s) if not 0.0 <= x < 1.0]
    if bad:
        raise SubsidyRangeError(
            "stackelberg: subsidy rate outside [0, 1) at Gs: "
            + ", ".join(f"x_{i + 1}={x!r}" for i, x in bad)
        )
    return coeffs, strat, strat.x


def solve(scn: ValidatedScenario, prices: PriceEquilibrium | None = None) -> Equilibrium:
    prices = equilibrium_prices(scn) if prices is None else prices
    coeffs, strat, _ = solve_stackelberg(scn, prices)
    return Equilibrium(
        model="stackelberg",
        scenario=scn,
        prices=prices,
        coeffs=coeffs,
        strategies=strat,
        diagnostics=tuple(common_diagnostics(scn, prices, strat)),
    )
