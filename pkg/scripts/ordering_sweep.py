"""How often do the model orderings hold on random scenarios?

Draws scenarios around the reference set (see carbongame.sampling), keeps
those that solve in all four cells, and counts each ordering. For the
trading ordering it also prints the sign of mu_m*theta*omega*sum(q)*p -
lambda_m*delta, a first-order predictor of whether trading raises Gs.

Usage: python scripts/ordering_sweep.py [--count 100] [--seed 20240601] [--spread 0.3]
"""

import argparse
import itertools

from carbongame import reports, sampling
from carbongame.pricing import equilibrium_prices


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--spread", type=float, default=sampling.SPREAD)
    ap.add_argument("--show-failures", action="store_true")
    args = ap.parse_args()

    sampling.SPREAD = args.spread
    held: dict[str, int] = {}
    agree = 0
    for scn in itertools.islice(sampling.solvable_scenarios(args.seed, with_no_trading=True), args.count):
        report, _ = reports.compare(scn, simulate=False)
        for k, v in report["orderings"].items():
            held[k] = held.get(k, 0) + bool(v)
        trading = report["orderings"]["trading_ge_no_trading_Gs"]
        sum_q = equilibrium_prices(scn).sum_q
        predictor = scn.mu_m * scn.theta * scn.omega * sum_q * scn.p - scn.lambda_m * scn.delta
        agree += (predictor > 0) == trading
        if args.show_failures and not trading:
            print(f"trading ordering fails (predictor {predictor:+.1f}): n={scn.n}, {scn.config.flat()}")

    print(f"spread +-{args.spread:.0%}, seed {args.seed}, {args.count} scenarios")
    for k, v in held.items():
        print(f"  {k:<45}{v:>4}/{args.count}")
    print(f"  linear predictor agrees with trading ordering on {agree}/{args.count}")


if __name__ == "__main__":
    main()
