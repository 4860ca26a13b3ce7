"""Feedback equilibria of a manufacturer-retailer low-carbon differential game."""

from .config import (
    ScenarioConfig,
    ValidatedScenario,
    ValidationError,
    load_scenario,
    reference_scenario,
    validate,
)
from .decentralized import solve_decentralized
from .dynamics import Trajectory, discounted_profit, simulate
from .pricing import PriceEquilibrium, demand, equilibrium_prices
from .reports import solve
from .solution import (
    Equilibrium,
    FeedbackStrategies,
    GameError,
    SubsidyLaw,
    ValueCoefficients,
    subsidy_at,
    value_m,
    value_r,
)
from .stackelberg import solve_stackelberg

__version__ = "0.1.0"
