"""Published closed forms for both models, evaluated verbatim.

These expressions are not used to drive anything. They exist so reports can
diff them against the coefficients obtained by matching powers of G, and so
the HJB residual check can demonstrate where they disagree. Known
discrepancies with the matched values:

* decentralized B: denominator ``2 lm lr rho + sqrt(disc)`` where matching
  gives ``lr (2 lm rho + sqrt(disc))``;
* decentralized H: cross-retailer term carries an extra factor 1/2;
* both steady states: ``lm lr rho`` where the closed loop gives ``2 lm lr rho``;
* stackelberg C and D_i: garbled constant term and a missing factor 4 on the
  ``A lm mu_r^2`` term;
* stackelberg subsidy rate uses ``2 (A Gs + B)`` rather than ``2 (2 A Gs + B)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import decentralized, stackelberg
from .config import ValidatedScenario
from .pricing import PriceEquilibrium
from .solution import Equilibrium, FeedbackStrategies, ValueCoefficients, carbon_intensity


@dataclass(frozen=True)
class Transcribed:
    coeffs: ValueCoefficients
    Gs: float
    x_at_Gs: Optional[np.ndarray] = None


def transcribed_decentralized(scn: ValidatedScenario, prices: PriceEquilibrium) -> Transcribed:
    disc = decentralized.discriminant(scn, prices)
    root = math.sqrt(disc)
    s = carbon_intensity(scn, prices)
    lm, lr, mm, mr, rho = scn.lambda_m, scn.lambda_r, scn.mu_m, scn.mu_r, scn.rho
    S = prices.sum_q

    A = (4 * lm * scn.delta + 2 * lm * rho - 4 * s * mm - root) / (8 * mm**2)
    D = lm * prices.p_star * prices.q * scn.theta / (lm * (rho + scn.delta) - s * mm - 2 * A * mm**2)
    sum_D = float(D.sum())
    B = (4 * lm * lr * scn.theta * (scn.p - scn.p_c) * S + 8 * A * lm * mr**2 * sum_D) / (2 * lm * lr * rho + root)
    sum_Er = float((mr * D / lr).sum())
    C = scn.p_c * scn.F0 / rho + B**2 * mm**2 / (2 * lm * rho) + B * mr * sum_Er / rho
    H = -(mr**2) * D**2 / (2 * lr * rho) + B * D * mm**2 / (lm * rho) + mr**2 * D * sum_D / (2 * lr * rho)
    Gs = (4 * B * lr * mm**2 + 4 * lm * mr**2 * sum_D) / (lr * root - lm * lr * rho)
    coeffs = ValueCoefficients(A=float(A), B=float(B), C=float(C), D=D, H=H, discriminant=float(disc))
    return Transcribed(coeffs=coeffs, Gs=float(Gs))


def transcribed_stackelberg(scn: ValidatedScenario, prices: PriceEquilibrium) -> Transcribed:
    disc = stackelberg.discriminant(scn, prices)
    root = math.sqrt(disc)
    s = carbon_intensity(scn, prices)
    lm, lr, mm, mr, rho, n = scn.lambda_m, scn.lambda_r, scn.mu_m, scn.mu_r, scn.rho, scn.n
    S = prices.sum_q

    A = (4 * scn.delta * lm * lr + 2 * lm * lr * rho - 4 * lr * mm * s - root) / (8 * (lr * mm**2 + n * lm * mr**2))
    D = 4 * lm * lr * scn.theta * prices.p_star * prices.q / (2 * lm * lr * rho + A * lm * mr**2 + root)
    sum_D = float(D.sum())
    B = (4 * lm * lr * scn.theta * (scn.p - scn.p_c) * S + 4 * A * lm * mr**2 * sum_D) / (2 * lm * lr * rho + root)
    C = (
        scn.p_c * scn.F0 / rho
        + B**2 * mm**2 / (2 * lm * rho)
        + (4 * n * B**2 * mr**2 - 4 * B * mr**2 * float((D**2).sum()) + mr**2 * sum_D) / (8 * lr * rho)
    )
    H = D * mr**2 * (4 * n * B + 2 * sum_D - 2 * B - D) / (4 * rho * lr) + B * D * mm**2 / (rho * lm)
    Gs = (4 * B * lr * mm**2 + 4 * n * B * lm * mr**2 + 2 * lm * mr**2 * sum_D) / (root - lm * lr * rho)
    x = (2 * (A * Gs + B) - D) / (2 * (A * Gs + B) + D)
    coeffs = ValueCoefficients(A=float(A), B=float(B), C=float(C), D=D, H=H, discriminant=float(disc))
    return Transcribed(coeffs=coeffs, Gs=float(Gs), x_at_Gs=x)


def transcribed(eq: Equilibrium) -> Transcribed:
    if eq.model == "decentralized":
        return transcribed_decentralized(eq.scenario, eq.prices)
    return transcribed_stackelberg(eq.scenario, eq.prices)


def transcribed_strategies(scn: ValidatedScenario, prices: PriceEquilibrium, model: str, t: Transcribed) -> FeedbackStrategies:
    """Feedback laws implied by transcribed coefficients (for residual checks)."""
    module = decentralized if model == "decentralized" else stackelberg
    return module.feedback_laws(scn, prices, t.coeffs)


def coefficient_diff(canonical: ValueCoefficients, other: ValueCoefficients) -> dict:
    """Absolute and relative gaps, field by field."""

    def gap(a, b):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        absd = np.abs(a - b)
        rel = absd / np.maximum(np.abs(a), 1e-300)
        return {"abs": float(absd.max()), "rel": float(rel.max())}

    return {k: gap(getattr(canonical, k), getattr(other, k)) for k in ("A", "B", "C", "D", "H")}
