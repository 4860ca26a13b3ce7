"""Plot-ready series comparing the two games with and without carbon trading.

Writes, for the chosen scenario:
  reputation.csv  t, G for each of the four cells
  profits.csv     t, manufacturer and total retailer profit flow per cell
  summary.json    the comparison table and ordering checks

Usage: python scripts/reproduce_comparison.py [scenario] [--out DIR]
"""

import argparse
from pathlib import Path

import numpy as np

from carbongame import reports
from carbongame.config import load_scenario, validate

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("scenario", nargs="?", default=str(ROOT / "scenarios" / "reference.txt"))
    ap.add_argument("--out", default="out/comparison_series")
    args = ap.parse_args()

    scn = validate(load_scenario(args.scenario))
    report, results = reports.compare(scn)
    out = Path(args.out)

    solved = {name: r.trajectory for name, r in results.items() if r.trajectory is not None}
    if not solved:
        raise SystemExit("no cell solved")
    times = next(iter(solved.values())).times

    rep_cols = {"t": times} | {name: tr.G for name, tr in solved.items()}
    prof_cols = {"t": times}
    for name, tr in solved.items():
        prof_cols[f"{name}.pi_m"] = tr.pi_m
        prof_cols[f"{name}.sum_pi_r"] = tr.pi_r.sum(axis=1)

    for fname, cols in (("reputation.csv", rep_cols), ("profits.csv", prof_cols)):
        body = np.column_stack(list(cols.values()))
        lines = [",".join(cols)] + [",".join(format(float(v), ".17g") for v in row) for row in body]
        reports.atomic_write(out / fname, "\n".join(lines) + "\n")
    reports.atomic_write(out / "summary.json", reports.dumps(report))

    print(f"{'cell':<28}{'Gs':>10}{'V_m(Gs)':>14}{'sum V_r(Gs)':>14}")
    for name, row in report["cells"].items():
        if row["solved"]:
            print(f"{name:<28}{row['Gs']:>10.4f}{row['V_m']:>14.2f}{row['sum_V_r']:>14.2f}")
        else:
            print(f"{name:<28}  {row['error']}")
    for k, v in report["orderings"].items():
        print(f"{k}: {v}")
    print(f"wrote {out}/")


if __name__ == "__main__":
    main()
