"""Scenario parameters, the flat scenario file format, and range validation.

A scenario bundles every exogenous quantity of the manufacturer-retailer game
(cost and influence coefficients, demand parameters, the carbon market, the
reputation process) together with the controls used for simulation.
``validate`` is the only way to obtain a :class:`ValidatedScenario`, which is
what the solvers consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence


@dataclass(frozen=True)
class ManufacturerParams:
    lambda_m: float  # effort cost coefficient
    mu_m: float  # effort influence on reputation
    omega: float  # effort influence on per-unit emission reduction
    p: float  # wholesale price
    F0: float  # initial carbon quota


@dataclass(frozen=True)
class RetailerParams:
    n: int
    a: tuple[float, ...]  # potential sales, one per retailer
    b: float  # own-price sensitivity
    c: float  # cross-price coefficient in [0, 1]
    lambda_r: float
    mu_r: float


@dataclass(frozen=True)
class EnvironmentParams:
    theta: float  # consumer low-carbon preference
    p_c: float  # carbon credit price; 0 means no carbon trading
    rho: float  # discount rate
    delta: float  # reputation decay rate
    G0: float  # initial reputation


@dataclass(frozen=True)
class SimConfig:
    T: float = 40.0
    dt: float = 1e-2
    tail_tol: float = 1e-8


@dataclass(frozen=True)
class ScenarioConfig:
    manufacturer: ManufacturerParams
    retailers: RetailerParams
    environment: EnvironmentParams
    sim: SimConfig = field(default_factory=SimConfig)

    def with_values(self, **overrides: Any) -> "ScenarioConfig":
        """Return a copy with flat keys (``theta=0.3``, ``n=3`` ...) replaced.

        Changing ``n`` without giving ``a`` resizes ``a`` by repeating its
        first entry.
        """
        groups: dict[str, dict[str, Any]] = {g: {} for g in _GROUPS}
        for key, value in overrides.items():
            if key not in _KEY_GROUP:
                raise KeyError(f"unknown scenario key {key!r}")
            groups[_KEY_GROUP[key]][key] = value
        r = groups["retailers"]
        if "a" in r:
            r["a"] = _as_tuple(r["a"])
        if "n" in r and "a" not in r:
            r["a"] = (self.retailers.a[0],) * int(r["n"])
        if "a" in r and "n" not in r:
            r["n"] = len(r["a"])
        return replace(
            self,
            **{g: replace(getattr(self, g), **kw) for g, kw in groups.items() if kw},
        )

    def flat(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for group in _GROUPS:
            obj = getattr(self, group)
            for f in fields(obj):
                out[f.name] = getattr(obj, f.name)
        return out


_GROUPS = ("manufacturer", "retailers", "environment", "sim")
_GROUP_TYPES = {
    "manufacturer": ManufacturerParams,
    "retailers": RetailerParams,
    "environment": EnvironmentParams,
    "sim": SimConfig,
}
_KEY_GROUP = {f.name: g for g, t in _GROUP_TYPES.items() for f in fields(t)}

# File order; also the order used when writing scenario files.
SCENARIO_KEYS = (
    "lambda_m", "mu_m", "omega", "p", "F0",
    "lambda_r", "mu_r", "b", "c", "n", "a",
    "theta", "p_c", "rho", "delta", "G0",
    "T", "dt", "tail_tol",
)  # fmt: skip


def reference_scenario(a: float | Sequence[float] = 10.0, **overrides: Any) -> ScenarioConfig:
    """The numerical-experiment parameter set with carbon trading (p_c = 1).

    Potential sales ``a`` are not part of the published parameter set; 10 per
    retailer is this package's default.
    """
    n = int(overrides.pop("n", 6))
    a_tuple = _as_tuple(a)
    if len(a_tuple) == 1:
        a_tuple = a_tuple * n
    cfg = ScenarioConfig(
        manufacturer=ManufacturerParams(lambda_m=500.0, mu_m=2.0, omega=0.4, p=15.0, F0=500.0),
        retailers=RetailerParams(n=n, a=a_tuple, b=0.9, c=0.8, lambda_r=100.0, mu_r=0.5),
        environment=EnvironmentParams(theta=0.6, p_c=1.0, rho=0.6, delta=0.8, G0=0.0),
    )
    return cfg.with_values(**overrides) if overrides else cfg


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    field: str
    value: Any
    constraint: str

    def __str__(self) -> str:
        return f"{self.field}={self.value!r}: {self.constraint}"


class ValidationError(ValueError):
    """Raised by :func:`validate`; ``violations`` is the full report."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = tuple(violations)
        super().__init__("invalid scenario: " + "; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class ValidatedScenario:
    """Flat, immutable view of a scenario whose ranges have been checked."""

    lambda_m: float
    mu_m: float
    omega: float
    p: float
    F0: float
    lambda_r: float
    mu_r: float
    b: float
    c: float
    n: int
    a: tuple[float, ...]
    theta: float
    p_c: float
    rho: float
    delta: float
    G0: float
    T: float
    dt: float
    tail_tol: float
    config: ScenarioConfig = field(repr=False, compare=False)

    @property
    def carbon_trading(self) -> bool:
        return self.p_c > 0

    def replace(self, **overrides: Any) -> "ValidatedScenario":
        return validate(self.config.with_values(**overrides))


_POSITIVE = ("lambda_m", "mu_m", "omega", "p", "lambda_r", "mu_r", "b", "theta", "rho", "delta", "T", "dt")
_NONNEGATIVE = ("F0", "p_c", "G0")


def check(config: ScenarioConfig) -> list[Violation]:
    """List every violated range constraint (empty when the scenario is valid)."""
    flat = config.flat()
    out: list[Violation] = []
    numeric_ok = set()
    for key in SCENARIO_KEYS:
        value = flat[key]
        if key == "a":
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            out.append(Violation(key, value, "must be a finite number"))
        else:
            numeric_ok.add(key)
    for key in _POSITIVE:
        if key in numeric_ok and not flat[key] > 0:
            out.append(Violation(key, flat[key], "must be > 0"))
    for key in _NONNEGATIVE:
        if key in numeric_ok and not flat[key] >= 0:
            out.append(Violation(key, flat[key], "must be >= 0"))
    if "c" in numeric_ok and not 0 <= flat["c"] <= 1:
        out.append(Violation("c", flat["c"], "must lie in [0, 1]"))
    n = flat["n"]
    if "n" in numeric_ok and (int(n) != n or n < 1):
        out.append(Violation("n", n, "must be an integer >= 1"))
    a = flat["a"]
    try:
        a_vals = [float(v) for v in a]
    except (TypeError, ValueError):
        out.append(Violation("a", a, "must be a list of numbers"))
    else:
        if "n" in numeric_ok and len(a_vals) != n:
            out.append(Violation("a", a, f"must have n={n} entries, got {len(a_vals)}"))
        bad = [v for v in a_vals if not (math.isfinite(v) and v > 0)]
        if bad:
            out.append(Violation("a", a, "every entry must be finite and > 0"))
    if {"T", "dt"} <= numeric_ok and not flat["dt"] < flat["T"]:
        out.append(Violation("dt", flat["dt"], f"must be < T={flat['T']}"))
    if "tail_tol" in numeric_ok and not 0 < flat["tail_tol"] < 1:
        out.append(Violation("tail_tol", flat["tail_tol"], "must lie in (0, 1)"))
    return out


def validate(config: ScenarioConfig) -> ValidatedScenario:
    violations = check(config)
    if violations:
        raise ValidationError(violations)
    return assume_valid(config)


def assume_valid(config: ScenarioConfig) -> ValidatedScenario:
    """Wrap ``config`` without range checks.

    Only for analytic limits that sit on the boundary of the admissible
    ranges (for instance ``theta = 0``); solvers may misbehave otherwise.
    """
    flat = config.flat()
    flat["n"] = int(flat["n"])
    flat["a"] = tuple(float(v) for v in flat["a"])
    for key in SCENARIO_KEYS:
        if key not in ("n", "a"):
            flat[key] = float(flat[key])
    return ValidatedScenario(config=config, **flat)


# ---------------------------------------------------------------------------
# scenario files


class ScenarioFileError(ValueError):
    """Malformed scenario text (bad syntax, unknown or missing keys)."""


_SIM_DEFAULTS = {f.name: f.default for f in fields(SimConfig)}


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse the ``key = value`` scenario format.

    Blank lines and ``#`` comments are ignored. ``a`` takes a comma separated
    list, or a single value repeated for all ``n`` retailers. The simulation
    keys ``T``, ``dt``, ``tail_tol`` are optional; every other key is
    required, and unknown or repeated keys are rejected.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep or not value:
            raise ScenarioFileError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key not in SCENARIO_KEYS:
            raise ScenarioFileError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ScenarioFileError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value

    missing = [k for k in SCENARIO_KEYS if k not in values and k not in _SIM_DEFAULTS]
    if missing:
        raise ScenarioFileError("missing keys: " + ", ".join(missing))

    def num(key: str) -> float:
        try:
            return float(values[key])
        except ValueError:
            raise ScenarioFileError(f"{key}: not a number: {values[key]!r}") from None

    kw: dict[str, Any] = {k: num(k) for k in values if k not in ("n", "a")}
    n_val = num("n")
    kw["n"] = int(n_val) if n_val.is_integer() else n_val
    try:
        a = tuple(float(v) for v in values["a"].split(","))
    except ValueError:
        raise ScenarioFileError(f"a: not a list of numbers: {values['a']!r}") from None
    if len(a) == 1 and isinstance(kw["n"], int) and kw["n"] > 1:
        a = a * kw["n"]
    kw["a"] = a
    for k, v in _SIM_DEFAULTS.items():
        kw.setdefault(k, v)
    return ScenarioConfig(
        manufacturer=ManufacturerParams(**{f.name: kw[f.name] for f in fields(ManufacturerParams)}),
        retailers=RetailerParams(**{f.name: kw[f.name] for f in fields(RetailerParams)}),
        environment=EnvironmentParams(**{f.name: kw[f.name] for f in fields(EnvironmentParams)}),
        sim=SimConfig(**{f.name: kw[f.name] for f in fields(SimConfig)}),
    )


def format_scenario(config: ScenarioConfig) -> str:
    flat = config.flat()
    lines = []
    for key in SCENARIO_KEYS:
        v = flat[key]
        if key == "a":
            lines.append(f"a = {', '.join(repr(float(x)) for x in v)}")
        elif key == "n":
            lines.append(f"n = {v}")
        else:
            lines.append(f"{key} = {float(v)!r}")
    return "\n".join(lines) + "\n"


def load_scenario(path: str | Path) -> ScenarioConfig:
    return parse_scenario(Path(path).read_text())


def save_scenario(config: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(format_scenario(config))


def _as_tuple(a: float | Sequence[float]) -> tuple[float, ...]:
    if isinstance(a, (int, float)):
        return (float(a),)
    return tuple(float(v) for v in a)
