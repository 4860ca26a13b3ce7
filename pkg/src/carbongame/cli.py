"""Command line entry point: ``carbongame {run,compare,verify}``.

Exit codes: 0 success, 1 verification failed, 2 invalid scenario,
3 no admissible/interior equilibrium, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import reports
from .config import ScenarioFileError, ValidatedScenario, ValidationError, load_scenario, validate
from .dynamics import simulate_equilibrium, trajectory_csv
from .solution import MODELS, GameError
from .transcribed import transcribed

EXIT_OK, EXIT_VERIFY, EXIT_INVALID, EXIT_NO_EQUILIBRIUM, EXIT_IO = 0, 1, 2, 3, 4

log = logging.getLogger("carbongame")


class CliError(Exception):
    def __init__(self, code: int, message: str, block: dict):
        super().__init__(message)
        self.code = code
        self.block = block


def _fail(code: int, kind: str, message: str, **extra) -> CliError:
    return CliError(code, message, {"error": kind, "message": message, **extra})


def load(path: str, no_trading: bool = False) -> ValidatedScenario:
    try:
        cfg = load_scenario(path)
    except OSError as exc:
        raise _fail(EXIT_IO, "io", f"cannot read scenario {path}: {exc}") from exc
    except ScenarioFileError as exc:
        raise _fail(EXIT_INVALID, "validation", str(exc), violations=[]) from exc
    if no_trading:
        cfg = cfg.with_values(p_c=0.0)
    try:
        return validate(cfg)
    except ValidationError as exc:
        violations = [{"field": v.field, "value": repr(v.value), "constraint": v.constraint} for v in exc.violations]
        raise _fail(EXIT_INVALID, "validation", str(exc), violations=violations) from exc


def parse_sweep(spec: Optional[str]) -> Optional[tuple[str, list[float]]]:
    if not spec:
        return None
    key, sep, vals = spec.partition("=")
    if not sep:
        raise _fail(EXIT_INVALID, "validation", f"--sweep expects key=v1,v2,..., got {spec!r}")
    try:
        return key.strip(), [float(v) for v in vals.split(",") if v.strip()]
    except ValueError as exc:
        raise _fail(EXIT_INVALID, "validation", f"--sweep values must be numbers: {vals!r}") from exc


def sweep_scenarios(base: ValidatedScenario, sweep) -> list[tuple[str, ValidatedScenario]]:
    key, values = sweep
    out = []
    for v in values:
        value = int(v) if key == "n" else v
        try:
            out.append((f"{key}={v:g}", base.replace(**{key: value})))
        except KeyError as exc:
            raise _fail(EXIT_INVALID, "validation", f"unknown sweep key {key!r}") from exc
        except ValidationError as exc:
            raise _fail(EXIT_INVALID, "validation", f"sweep {key}={v:g}: {exc}") from exc
    return out


def _write(path: Path, text: str) -> None:
    try:
        reports.atomic_write(path, text)
    except OSError as exc:
        raise _fail(EXIT_IO, "io", f"cannot write {path}: {exc}") from exc


def _parallel(fn: Callable, items: list) -> list:
    with ThreadPoolExecutor() as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# subcommands


def run_one(scn: ValidatedScenario, model: str, out: Path, show_diff: bool = False) -> dict:
    try:
        eq = reports.solve(scn, model)
        traj = simulate_equilibrium(eq)
    except GameError as exc:
        raise _fail(EXIT_NO_EQUILIBRIUM, type(exc).__name__, str(exc), diagnostics=[str(exc)]) from exc
    except ValueError as exc:
        raise _fail(EXIT_INVALID, "validation", str(exc)) from exc
    report = reports.model_report(eq, traj)
    _write(out / "report.json", reports.dumps(report))
    _write(out / "trajectory.csv", trajectory_csv(traj))
    if show_diff:
        tr = transcribed(eq)
        print(f"{model}: canonical vs transcription (Gs {eq.Gs:.10g} vs {tr.Gs:.10g})")
        for k, gap in report["coefficients"]["diff"].items():
            print(f"  {k}: abs {gap['abs']:.3e} rel {gap['rel']:.3e}")
    return report


def cmd_run(args) -> int:
    base = load(args.scenario, args.no_trading)
    out = Path(args.out)
    sweep = parse_sweep(args.sweep)
    if sweep is None:
        report = run_one(base, args.model, out, args.transcription_diff)
        _summary(report)
        return EXIT_OK
    cells = sweep_scenarios(base, sweep)
    results = _parallel(lambda c: _guarded(lambda: run_one(c[1], args.model, out / c[0])), cells)
    summary = {
        "schema_version": reports.SCHEMA_VERSION,
        "sweep": {"key": sweep[0], "values": sweep[1]},
        "cells": {name: res for (name, _), res in zip(cells, results)},
    }
    _write(out / "sweep.json", reports.dumps(summary))
    return EXIT_OK


def _guarded(fn: Callable[[], dict]) -> dict:
    try:
        report = fn()
    except CliError as exc:
        return {"solved": False, **exc.block}
    return {"solved": True, "Gs": report["Gs"], "value_at_Gs": report["value_at_Gs"], "diagnostics": report["diagnostics"]}


def _summary(report: dict) -> None:
    v = report["value_at_Gs"]
    line = f"{report['model']}: Gs={report['Gs']:.6g} V_m(Gs)={v['manufacturer']:.6g} V_r1(Gs)={v['retailers'][0]:.6g}"
    if report["subsidy_at_Gs"] is not None:
        line += f" x1(Gs)={report['subsidy_at_Gs'][0]:.6g}"
    print(line)
    for d in report["diagnostics"]:
        print(f"  diagnostic: {d}")


def compare_one(scn: ValidatedScenario, out: Path) -> dict:
    report, results = reports.compare(scn)
    for name, res in results.items():
        if res.trajectory is not None:
            _write(out / name / "trajectory.csv", trajectory_csv(res.trajectory))
    _write(out / "comparison.json", reports.dumps(report))
    return report


def _print_comparison(report: dict) -> None:
    print(f"{'cell':<28}{'V_m':>14}{'sum V_r':>14}{'total':>14}{'Gs':>12}")
    for name, c in report["cells"].items():
        if c["solved"]:
            print(f"{name:<28}{c['V_m']:>14.6g}{c['sum_V_r']:>14.6g}{c['total']:>14.6g}{c['Gs']:>12.6g}")
        else:
            print(f"{name:<28}  failed: {c['error']}")
    for k, v in report["orderings"].items():
        print(f"  {k}: {v}")


def cmd_compare(args) -> int:
    base = load(args.scenario, args.no_trading)
    out = Path(args.out)
    sweep = parse_sweep(args.sweep)
    if sweep is None:
        _print_comparison(compare_one(base, out))
        return EXIT_OK
    cells = sweep_scenarios(base, sweep)
    results = _parallel(lambda c: compare_one(c[1], out / c[0]), cells)
    per_cell = {}
    for cell in results[0]["cells"]:
        gs = [r["cells"][cell].get("Gs") for r in results]
        solved = all(g is not None for g in gs)
        per_cell[cell] = {
            "Gs": gs,
            "Gs_nondecreasing": all(a <= b for a, b in zip(gs, gs[1:])) if solved else None,
        }
    summary = {
        "schema_version": reports.SCHEMA_VERSION,
        "sweep": {"key": sweep[0], "values": sweep[1]},
        "cells": per_cell,
        "orderings": {name: r["orderings"] for (name, _), r in zip(cells, results)},
    }
    _write(out / "sweep.json", reports.dumps(summary))
    for cell, row in per_cell.items():
        print(f"{cell:<28} Gs={row['Gs']} nondecreasing={row['Gs_nondecreasing']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    scn = load(args.scenario, args.no_trading)
    try:
        checks = reports.run_checks(scn, with_dp=args.with_dp, transcription=args.transcription_diff)
    except GameError as exc:
        raise _fail(EXIT_NO_EQUILIBRIUM, type(exc).__name__, str(exc), diagnostics=[str(exc)]) from exc
    for c in checks:
        print(c.line())
    failed = [c.name for c in checks if not c.passed]
    if args.out:
        payload = {
            "schema_version": reports.SCHEMA_VERSION,
            "checks": [c.as_dict() for c in checks],
            "failed": failed,
        }
        _write(Path(args.out) / "verification.json", reports.dumps(payload))
    if failed:
        print("failed checks: " + ", ".join(failed))
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="carbongame", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("scenario", help="scenario file (key = value lines)")
        p.add_argument("--no-trading", action="store_true", help="force p_c = 0")

    p = sub.add_parser("run", help="solve one model, write report.json and trajectory.csv")
    common(p)
    p.add_argument("--model", choices=MODELS, default="stackelberg")
    p.add_argument("--out", default="out")
    p.add_argument("--sweep", metavar="KEY=V1,V2,...")
    p.add_argument("--transcription-diff", action="store_true", help="print canonical vs published coefficients")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="both models with and without carbon trading")
    common(p)
    p.add_argument("--out", default="out")
    p.add_argument("--sweep", metavar="KEY=V1,V2,...")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="run every oracle check; exit 0 iff all pass")
    common(p)
    p.add_argument("--with-dp", action="store_true", help="include the dynamic-programming oracle (slow)")
    p.add_argument("--transcription-diff", action="store_true", help="also check the published closed forms")
    p.add_argument("--out", help="directory for verification.json")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps(exc.block, indent=2, sort_keys=True))
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
