"""Value-function coefficients, feedback laws and the solver error hierarchy."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .config import ValidatedScenario
from .pricing import PriceEquilibrium

Model = Literal["decentralized", "stackelberg"]
MODELS: tuple[Model, ...] = ("decentralized", "stackelberg")


class GameError(RuntimeError):
    """Base class for scenarios that admit no interior feedback equilibrium."""


class NoAdmissibleValueFunction(GameError):
    def __init__(self, model: str, discriminant: float):
        self.model = model
        self.discriminant = discriminant
        super().__init__(
            f"{model}: no admissible quadratic value function "
            f"(discriminant {discriminant!r} <= 0)"
        )


class InteriorSolutionError(GameError):
    """An equilibrium control leaves its admissible range."""


class SubsidyRangeError(InteriorSolutionError):
    pass


class SingularSubsidyError(GameError):
    pass


class UnstableLoopError(GameError):
    """Closed-loop reputation dynamics do not decay (effective rate <= 0)."""


class InteriorSolutionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AffineLaw:
    """A control expressed as ``slope * G + intercept``."""

    slope: float
    intercept: float

    def __call__(self, G):
        return self.slope * np.asarray(G, dtype=float) + self.intercept


@dataclass(frozen=True)
class ValueCoefficients:
    """V_m(G) = A G^2 + B G + C and V_{r_i}(G) = D_i G + H_i."""

    A: float
    B: float
    C: float
    D: np.ndarray
    H: np.ndarray
    discriminant: float

    def value_m(self, G):
        G = np.asarray(G, dtype=float)
        return self.A * G**2 + self.B * G + self.C

    def dvalue_m(self, G):
        return 2.0 * self.A * np.asarray(G, dtype=float) + self.B

    def value_r(self, i: int, G):
        return self.D[i] * np.asarray(G, dtype=float) + self.H[i]

    def as_dict(self) -> dict:
        return {
            "A": float(self.A),
            "B": float(self.B),
            "C": float(self.C),
            "D": [float(v) for v in self.D],
            "H": [float(v) for v in self.H],
            "discriminant": float(self.discriminant),
        }


def value_m(coeffs: ValueCoefficients, G):
    return coeffs.value_m(G)


def value_r(coeffs: ValueCoefficients, i: int, G):
    return coeffs.value_r(i, G)


@dataclass(frozen=True)
class SubsidyLaw:
    """Leader's cost-share rule x_i(G) = (2 V_m'(G) - D_i) / (2 V_m'(G) + D_i)."""

    A: float
    B: float
    D: np.ndarray

    def _parts(self, G):
        vp = 2.0 * np.multiply.outer(2.0 * self.A * np.asarray(G, dtype=float) + self.B, np.ones_like(self.D))
        denom = vp + self.D
        if np.any(denom == 0):
            raise SingularSubsidyError("2 V_m'(G) + D_i = 0: subsidy rate undefined")
        return vp, denom

    def __call__(self, G) -> np.ndarray:
        vp, denom = self._parts(G)
        return (vp - self.D) / denom

    def complement(self, G) -> np.ndarray:
        """1 - x_i(G), computed as 2 D_i / (2 V_m'(G) + D_i)."""
        _, denom = self._parts(G)
        return 2.0 * self.D / denom


def subsidy_at(law: SubsidyLaw, i: int, G: float) -> float:
    """x_i(G); warns when the rate leaves [0, 1) or approaches full coverage."""
    x = float(law(G)[i])
    if not 0.0 <= x < 1.0:
        warnings.warn(f"subsidy rate x_{i + 1}({G})={x!r} outside [0, 1)", InteriorSolutionWarning, stacklevel=2)
    elif 1.0 - x < 1e-6:
        warnings.warn(
            f"subsidy rate x_{i + 1}({G})={x!r} near 1: follower effort unbounded",
            InteriorSolutionWarning,
            stacklevel=2,
        )
    return x


@dataclass(frozen=True)
class FeedbackStrategies:
    """Affine feedback laws and the closed loop they induce.

    ``delta_eff`` is the decay rate of the closed-loop reputation ODE
    Gdot = -delta_eff * (G - Gs).
    """

    Em: AffineLaw
    Er: tuple[AffineLaw, ...]
    Gs: float
    delta_eff: float
    x: Optional[SubsidyLaw] = None

    @classmethod
    def from_laws(
        cls,
        scn: ValidatedScenario,
        Em: AffineLaw,
        Er: tuple[AffineLaw, ...],
        x: Optional[SubsidyLaw] = None,
    ) -> "FeedbackStrategies":
        drift_slope = scn.mu_m * Em.slope + scn.mu_r * sum(e.slope for e in Er) - scn.delta
        drift_const = scn.mu_m * Em.intercept + scn.mu_r * sum(e.intercept for e in Er)
        delta_eff = -drift_slope
        Gs = drift_const / delta_eff if delta_eff != 0 else float("inf")
        return cls(Em=Em, Er=tuple(Er), Gs=float(Gs), delta_eff=float(delta_eff), x=x)

    def efforts_r(self, G) -> np.ndarray:
        """Retailer efforts, shape ``G.shape + (n,)``."""
        G = np.asarray(G, dtype=float)
        return np.stack([law(G) for law in self.Er], axis=-1)

    def subsidy(self, G) -> np.ndarray:
        if self.x is None:
            return np.zeros(np.shape(G) + (len(self.Er),))
        return self.x(G)


@dataclass(frozen=True)
class Equilibrium:
    model: Model
    scenario: ValidatedScenario = field(repr=False)
    prices: PriceEquilibrium
    coeffs: ValueCoefficients
    strategies: FeedbackStrategies
    diagnostics: tuple[str, ...] = ()

    @property
    def subsidy(self) -> Optional[SubsidyLaw]:
        return self.strategies.x

    @property
    def Gs(self) -> float:
        return self.strategies.Gs


def carbon_intensity(scn: ValidatedScenario, prices: PriceEquilibrium) -> float:
    """s = p_c theta omega sum(q): marginal carbon-market gain of effort per unit reputation."""
    return scn.p_c * scn.theta * scn.omega * prices.sum_q


def common_diagnostics(scn: ValidatedScenario, prices: PriceEquilibrium, strat: FeedbackStrategies) -> list[str]:
    diags = list(prices.diagnostics)
    em = float(strat.Em(strat.Gs))
    if scn.omega * em > 1.0:
        diags.append(f"omega * E_m(Gs) = {scn.omega * em!r} > 1: negative per-unit emission")
    return diags


def check_efforts(model: str, strat: FeedbackStrategies) -> None:
    if strat.delta_eff <= 0:
        raise UnstableLoopError(f"{model}: effective decay rate {strat.delta_eff!r} <= 0")
    em = float(strat.Em(strat.Gs))
    er = strat.efforts_r(strat.Gs)
    if em < 0 or np.any(er < 0):
        raise InteriorSolutionError(
            f"{model}: negative effort at Gs={strat.Gs!r} (E_m={em!r}, E_r min={float(er.min())!r})"
        )
