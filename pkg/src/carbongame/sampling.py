"""Random scenario draws around the reference parameter set.

Each positive coefficient is drawn uniformly within +-30% of its reference
value; the cross-price coefficient c is uniform on [0, 1], the retailer count
uniform on 1..10, potential sales uniform on [7, 13] per retailer, and the
carbon price uniform on [0.5, 1.5].
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .config import ScenarioConfig, ValidatedScenario, reference_scenario, validate
from .reports import solve
from .solution import MODELS, GameError

SPREAD = 0.3
_SCALED = ("lambda_m", "lambda_r", "mu_m", "mu_r", "omega", "p", "theta", "b", "F0", "delta", "rho")


def sample_config(rng: np.random.Generator) -> ScenarioConfig:
    ref = reference_scenario().flat()
    kw = {k: float(ref[k] * rng.uniform(1 - SPREAD, 1 + SPREAD)) for k in _SCALED}
    n = int(rng.integers(1, 11))
    kw["n"] = n
    kw["a"] = tuple(float(v) for v in rng.uniform(7.0, 13.0, n))
    kw["c"] = float(rng.uniform(0.0, 1.0))
    kw["p_c"] = float(rng.uniform(0.5, 1.5))
    return reference_scenario().with_values(**kw)


def solvable(scn: ValidatedScenario, with_no_trading: bool = False) -> bool:
    variants = [scn, scn.replace(p_c=0.0)] if with_no_trading else [scn]
    try:
        for s in variants:
            for model in MODELS:
                solve(s, model)
    except GameError:
        return False
    return True


def solvable_scenarios(seed: int, with_no_trading: bool = False) -> Iterator[ValidatedScenario]:
    """Endless stream of valid scenarios on which both models solve."""
    rng = np.random.default_rng(seed)
    while True:
        scn = validate(sample_config(rng))
        if solvable(scn, with_no_trading):
            yield scn
