"""JSON report builders, the model comparison, and the verification runner."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import decentralized, stackelberg, verify
from .config import ValidatedScenario
from .dynamics import Trajectory, TruncationError, discounted_profit, simulate_equilibrium
from .pricing import equilibrium_prices
from .solution import MODELS, Equilibrium, GameError
from .transcribed import coefficient_diff, transcribed, transcribed_strategies

SCHEMA_VERSION = "1.0"

SOLVERS = {"decentralized": decentralized.solve, "stackelberg": stackelberg.solve}


def solve(scn: ValidatedScenario, model: str) -> Equilibrium:
    return SOLVERS[model](scn)


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _floats(a) -> list[float]:
    return [float(v) for v in np.atleast_1d(a)]


def values_at(eq: Equilibrium, G: float) -> dict:
    return {
        "G": float(G),
        "manufacturer": float(eq.coeffs.value_m(G)),
        "retailers": [float(eq.coeffs.value_r(i, G)) for i in range(eq.scenario.n)],
    }


def model_report(eq: Equilibrium, traj: Trajectory) -> dict:
    scn = eq.scenario
    strat = eq.strategies
    tr = transcribed(eq)
    try:
        quad = {
            "manufacturer": discounted_profit(traj, scn, "manufacturer"),
            "retailers": [discounted_profit(traj, scn, i) for i in range(scn.n)],
        }
        truncation = None
    except TruncationError as exc:
        quad, truncation = None, str(exc)
    diagnostics = list(eq.diagnostics)
    if truncation:
        diagnostics.append(truncation)
    x_s = strat.subsidy(strat.Gs) if strat.x is not None else None
    return {
        "schema_version": SCHEMA_VERSION,
        "model": eq.model,
        "carbon_trading": scn.carbon_trading,
        "scenario": {k: (list(v) if isinstance(v, tuple) else v) for k, v in scn.config.flat().items()},
        "prices": {
            "p_star": _floats(eq.prices.p_star),
            "q": _floats(eq.prices.q),
            "sum_q": float(eq.prices.sum_q),
        },
        "coefficients": {
            "canonical": eq.coeffs.as_dict(),
            "transcription": {**tr.coeffs.as_dict(), "Gs": tr.Gs, "subsidy_at_Gs": None if tr.x_at_Gs is None else _floats(tr.x_at_Gs)},
            "diff": coefficient_diff(eq.coeffs, tr.coeffs),
        },
        "strategies": {
            "Em": {"slope": strat.Em.slope, "intercept": strat.Em.intercept},
            "Er": [{"slope": law.slope, "intercept": law.intercept} for law in strat.Er],
        },
        "Gs": strat.Gs,
        "delta_eff": strat.delta_eff,
        "subsidy_at_Gs": None if x_s is None else _floats(x_s),
        "value_at_G0": values_at(eq, scn.G0),
        "value_at_Gs": values_at(eq, strat.Gs),
        "discounted_profit": quad,
        "trajectory": {
            "T": float(traj.times[-1]),
            "dt": scn.dt,
            "rk4_max_error": traj.rk4_error,
            "open_loop_divergence": traj.open_loop_divergence,
        },
        "diagnostics": diagnostics,
    }


# ---------------------------------------------------------------------------
# comparison across models and carbon-trading regimes

CELLS = (
    ("decentralized", False),
    ("stackelberg", False),
    ("decentralized", True),
    ("stackelberg", True),
)


def cell_name(model: str, no_trading: bool) -> str:
    return f"{model}_no_trading" if no_trading else model


@dataclass
class CellResult:
    name: str
    equilibrium: Optional[Equilibrium] = None
    trajectory: Optional[Trajectory] = None
    error: Optional[str] = None

    def summary(self) -> dict:
        if self.equilibrium is None:
            return {"solved": False, "error": self.error}
        eq = self.equilibrium
        at = values_at(eq, eq.Gs)
        at0 = values_at(eq, eq.scenario.G0)
        return {
            "solved": True,
            "Gs": eq.Gs,
            "V_m": at["manufacturer"],
            "V_r": at["retailers"],
            "sum_V_r": float(sum(at["retailers"])),
            "total": at["manufacturer"] + float(sum(at["retailers"])),
            "value_at_G0": {"V_m": at0["manufacturer"], "sum_V_r": float(sum(at0["retailers"]))},
            "subsidy_at_Gs": None if eq.subsidy is None else _floats(eq.strategies.subsidy(eq.Gs)),
        }


def solve_cell(scn: ValidatedScenario, model: str, no_trading: bool, simulate: bool = True) -> CellResult:
    name = cell_name(model, no_trading)
    try:
        s = scn.replace(p_c=0.0) if no_trading else scn
        eq = solve(s, model)
        traj = simulate_equilibrium(eq) if simulate else None
    except (GameError, ValueError) as exc:
        return CellResult(name, error=f"{type(exc).__name__}: {exc}")
    return CellResult(name, equilibrium=eq, trajectory=traj)


def orderings(cells: dict[str, dict]) -> dict[str, Optional[bool]]:
    """Ordering checks between cells; None wherever an involved cell failed."""
    D, S = cells["decentralized"], cells["stackelberg"]
    DN, SN = cells["decentralized_no_trading"], cells["stackelberg_no_trading"]

    def ok(*cs):
        return all(c["solved"] for c in cs)

    out: dict[str, Optional[bool]] = {
        "stackelberg_ge_decentralized_manufacturer": None,
        "stackelberg_ge_decentralized_retailers": None,
        "stackelberg_ge_decentralized_total": None,
        "trading_ge_no_trading_Gs": None,
    }
    if ok(D, S):
        out["stackelberg_ge_decentralized_manufacturer"] = S["V_m"] >= D["V_m"]
        out["stackelberg_ge_decentralized_retailers"] = all(s >= d for s, d in zip(S["V_r"], D["V_r"]))
        out["stackelberg_ge_decentralized_total"] = S["total"] >= D["total"]
    if ok(D, S, DN, SN):
        out["trading_ge_no_trading_Gs"] = D["Gs"] >= DN["Gs"] and S["Gs"] >= SN["Gs"]
    return out


def compare(scn: ValidatedScenario, simulate: bool = True) -> tuple[dict, dict[str, CellResult]]:
    results = {cell_name(m, nt): solve_cell(scn, m, nt, simulate) for m, nt in CELLS}
    table = {name: r.summary() for name, r in results.items()}
    report = {
        "schema_version": SCHEMA_VERSION,
        "carbon_trading": scn.carbon_trading,
        "p_c": scn.p_c,
        "cells": table,
        "orderings": orderings(table),
    }
    return report, results


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.3e} (threshold {self.threshold:.1e}){' ' + self.note if self.note else ''}"

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold, "passed": self.passed, "note": self.note}


def _below(name, value, threshold, note="") -> Check:
    return Check(name, float(value), threshold, bool(value < threshold), note)


def run_checks(
    scn: ValidatedScenario,
    *,
    with_dp: bool = False,
    transcription: bool = False,
    models: tuple[str, ...] = MODELS,
) -> list[Check]:
    """Every oracle target for ``scn``; raises GameError if a model does not solve."""
    checks = [_below("price_linear_solve", verify.price_oracle_error(scn), verify.PRICE_TOL)]
    prices = equilibrium_prices(scn)
    for model in models:
        eq = solve(scn, model)
        G = np.linspace(0.0, 2.0 * eq.Gs, 101)
        checks.append(_below(f"{model}.hjb_residual", verify.hjb_residual(scn, model, eq.coeffs, eq.strategies, G, prices), verify.HJB_TOL))
        checks.append(
            _below(
                f"{model}.stationarity",
                verify.stationarity_check(scn, model, eq.coeffs, eq.strategies, G, prices),
                verify.STATIONARITY_TOL,
            )
        )
        traj = simulate_equilibrium(eq)
        for role in ["manufacturer", *range(scn.n)]:
            label = role if role == "manufacturer" else f"retailer_{role + 1}"
            V0 = float(eq.coeffs.value_m(scn.G0) if role == "manufacturer" else eq.coeffs.value_r(role, scn.G0))
            try:
                quad = discounted_profit(traj, scn, role)
            except TruncationError as exc:
                checks.append(Check(f"{model}.value_consistency.{label}", float("inf"), verify.VALUE_TOL, False, str(exc)))
                continue
            rel = abs(quad - V0) / max(1.0, abs(V0))
            checks.append(_below(f"{model}.value_consistency.{label}", rel, verify.VALUE_TOL))
        if with_dp:
            for agent in ("manufacturer", 0):
                label = "manufacturer" if agent == "manufacturer" else "retailer_1"
                grid = verify.bracketing_grid(eq.strategies, agent, 2.0 * eq.Gs)
                try:
                    res = verify.dp_best_response(scn, model, agent, grid, eq.strategies, prices)
                except verify.GridCoverageError as exc:
                    checks.append(Check(f"{model}.dp.{label}.policy_cells", float("inf"), 1.0, False, str(exc)))
                    continue
                if agent == "manufacturer":
                    law, vf = eq.strategies.Em, eq.coeffs.value_m
                else:
                    law, vf = eq.strategies.Er[0], (lambda g, c=eq.coeffs: c.value_r(0, g))
                gap = res.policy_gap_cells(law)
                checks.append(Check(f"{model}.dp.{label}.policy_cells", gap, 1.0, gap <= 1.0))
                checks.append(_below(f"{model}.dp.{label}.value_rel", res.value_gap(vf), verify.DP_VALUE_TOL))
        if transcription:
            tr = transcribed(eq)
            strat = transcribed_strategies(scn, prices, model, tr)
            res = verify.hjb_residual(scn, model, tr.coeffs, strat, G, prices)
            checks.append(_below(f"{model}.transcription.hjb_residual", res, verify.HJB_TOL, "published closed forms"))
    return checks
