"""Grid-refinement table for the dynamic-programming oracle.

For each model and agent, solves the best-response DP on successively finer
grids and prints the max interior policy deviation from the feedback law
(absolute and in control cells) and the relative value gap.

Usage: python scripts/dp_refinement.py [scenario] [--levels 51,101,201,401]
"""

import argparse
from pathlib import Path

import numpy as np

from carbongame import reports
from carbongame.config import load_scenario, validate
from carbongame.verify import bracketing_grid, dp_best_response

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("scenario", nargs="?", default=str(ROOT / "scenarios" / "reference.txt"))
    ap.add_argument("--levels", default="51,101,201,401")
    ap.add_argument("--discount", choices=["implicit", "exponential"], default="implicit")
    args = ap.parse_args()
    levels = [int(v) for v in args.levels.split(",")]

    scn = validate(load_scenario(args.scenario))
    print(f"{'model':<15}{'agent':<14}{'grid':>6}{'max |dev|':>12}{'cells':>8}{'value gap':>12}")
    for model in reports.SOLVERS:
        eq = reports.solve(scn, model)
        for agent in ("manufacturer", 0):
            if agent == "manufacturer":
                law, vf = eq.strategies.Em, eq.coeffs.value_m
            else:
                law, vf = eq.strategies.Er[0], (lambda g, c=eq.coeffs: c.value_r(0, g))
            for n in levels:
                grid = bracketing_grid(eq.strategies, agent, 2 * eq.Gs, n_g=n, n_u=n, discount=args.discount)
                res = dp_best_response(scn, model, agent, grid, eq.strategies, eq.prices)
                dev = float(np.max(np.abs(res.policy - law(res.G))[res.interior]))
                label = "manufacturer" if agent == "manufacturer" else "retailer_1"
                print(f"{model:<15}{label:<14}{n:>6}{dev:>12.3e}{res.policy_gap_cells(law):>8.2f}{res.value_gap(vf):>12.2e}")


if __name__ == "__main__":
    main()
