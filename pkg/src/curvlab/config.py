"""Run configuration files (TOML, schema ``curvlab.run/1``).

    schema = "curvlab.run/1"

    [problem]
    n = 4
    profile = { kind = "Constant", params = { k_infinity = 8.0 } }

    [solve]
    u0 = 0.5                 # or bracket = [lo, hi], or [solve.cylinder], or trajectory = "x.json"
    r_max = 1e4
    rel_tol = 1e-12
    abs_tol = 0.0

    [outputs]
    directory = "out"
    formats = ["csv", "json"]

    [scenario]
    name = "bubble-n4"
    checks = ["POHOZAEV_IDENTITY", "APP_A1_BOUNDS"]

    [sweep]
    axis = "initial.u0"
    values = [0.1, 0.2]

Every problem is reported as ConfigError carrying the dotted key path and,
when it can be located, the line of the offending key.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import curvature, solver
from .harness import CATALOGUE, Initial, Scenario

SCHEMA = "curvlab.run/1"
FORMATS = ("csv", "json")
REFERENCES = ("bubble", "constant_cylinder", "cosh_separatrix")

_SECTIONS = {
    "schema": None,
    "problem": {"n", "profile"},
    "solve": {"u0", "bracket", "cylinder", "trajectory", "r_max", "rel_tol", "abs_tol",
              "per_decade", "target", "max_iter", "reference"},
    "outputs": {"directory", "formats"},
    "scenario": {"name", "checks"},
    "sweep": {"axis", "values"},
}
_CYLINDER_KEYS = {"s0", "v0", "vprime0", "relative", "s_min"}


class ConfigError(ValueError):
    def __init__(self, message: str, path: str = "", line: int | None = None,
                 source: str | None = None):
        self.message, self.key, self.line, self.source = message, path, line, source
        where = source or "<config>"
        if line is not None:
            where += f":{line}"
        key = f" [{path}]" if path else ""
        super().__init__(f"{where}:{key} {message}")


@dataclass
class RunConfig:
    scenario: Scenario
    output_dir: Path
    formats: tuple[str, ...]
    reference: str | None = None
    sweep_axis: str | None = None
    sweep_values: list = field(default_factory=list)
    source: Path | None = None

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "scenario": self.scenario.to_dict(),
                "output_dir": str(self.output_dir), "formats": list(self.formats),
                "reference": self.reference,
                "sweep": {"axis": self.sweep_axis, "values": list(self.sweep_values)}}


def _locate(text: str, dotted: str) -> int | None:
    """Best-effort line number of a dotted key in TOML text."""
    parts = dotted.split(".")
    table: list[str] = []
    header = re.compile(r"^\s*\[\s*([A-Za-z0-9_.\-\s]+?)\s*\]\s*(#.*)?$")
    best = None
    for i, line in enumerate(text.splitlines(), start=1):
        m = header.match(line)
        if m:
            table = [p.strip() for p in m.group(1).split(".")]
            if table == parts:
                best = i
            continue
        km = re.match(r"^\s*([A-Za-z0-9_\-]+)\s*=", line)
        if not km:
            continue
        full = table + [km.group(1)]
        if full == parts[:len(full)]:
            best = i
            if len(full) == len(parts):
                return i
    return best


class _Ctx:
    def __init__(self, text, source):
        self.text, self.source = text, source

    def err(self, path, message):
        return ConfigError(message, path, _locate(self.text, path), self.source)


def _number(ctx, d, key, path, *, positive=False, nonneg=False, default=None, integer=False):
    if key not in d:
        if default is None:
            raise ctx.err(path, "missing required value")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ctx.err(path, f"expected a number, got {type(v).__name__}")
    if integer and int(v) != v:
        raise ctx.err(path, "expected an integer")
    if not math.isfinite(v):
        raise ctx.err(path, "must be finite")
    if positive and not v > 0:
        raise ctx.err(path, "must be positive")
    if nonneg and v < 0:
        raise ctx.err(path, "must be non-negative")
    return int(v) if integer else float(v)


def _unknown(ctx, d, allowed, prefix):
    for k in d:
        if k not in allowed:
            raise ctx.err(f"{prefix}.{k}" if prefix else k, f"unknown key {k!r}")


def parse(text: str, source: str | None = None, overrides: dict | None = None,
          base_dir: Path | None = None) -> RunConfig:
    """Validate a configuration document; ``overrides`` take precedence over the file."""
    ctx = _Ctx(text, source)
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"invalid TOML: {exc}", "", int(m.group(1)) if m else None,
                          source) from None
    overrides = overrides or {}
    base_dir = base_dir or Path(".")
    _unknown(ctx, raw, _SECTIONS, "")
    if raw.get("schema") != SCHEMA:
        raise ctx.err("schema", f"schema must be {SCHEMA!r}, got {raw.get('schema')!r}")
    for sec in _SECTIONS:
        if sec != "schema" and sec in raw and not isinstance(raw[sec], dict):
            raise ctx.err(sec, "must be a table")
    solve = raw.get("solve", {})
    _unknown(ctx, solve, _SECTIONS["solve"], "solve")

    trajectory = None
    if "trajectory" in solve:
        if not isinstance(solve["trajectory"], str):
            raise ctx.err("solve.trajectory", "must be a path string")
        tpath = Path(solve["trajectory"])
        if not tpath.is_absolute():
            tpath = base_dir / tpath
        try:
            from .serialize import read_json
            trajectory = read_json(tpath)
        except (OSError, ValueError) as exc:
            raise ctx.err("solve.trajectory", f"cannot read trajectory: {exc}") from None
        trajectory = trajectory.get("solution", trajectory)
        if trajectory.get("picture") != "radial":
            raise ctx.err("solve.trajectory", "only radial trajectories can be re-ingested")

    problem = raw.get("problem")
    if problem is None and trajectory is None:
        raise ctx.err("problem", "missing required section")
    problem = problem or {"n": trajectory["n"], "profile": trajectory["profile"]}
    _unknown(ctx, problem, _SECTIONS["problem"], "problem")
    n = _number(ctx, problem, "n", "problem.n", integer=True)
    if n < 3:
        raise ctx.err("problem.n", "n must be ≥ 3")
    prof = problem.get("profile")
    if not isinstance(prof, dict):
        raise ctx.err("problem.profile", "missing profile table {kind, params}")
    _unknown(ctx, prof, {"kind", "params"}, "problem.profile")
    params = prof.get("params", {})
    if not isinstance(params, dict):
        raise ctx.err("problem.profile.params", "must be a table")
    for k, v in params.items():
        _number(ctx, params, k, f"problem.profile.params.{k}", positive=True)
    prof = {"kind": prof.get("kind"), "params": {k: float(v) for k, v in params.items()}}
    try:
        curvature.from_dict(prof)
    except (curvature.ProfileError, ValueError) as exc:
        raise ctx.err("problem.profile", str(exc)) from None
    if trajectory is not None:
        if trajectory["n"] != n or trajectory["profile"] != prof:
            raise ctx.err("problem", "problem does not match the stored trajectory")

    given = [k for k in ("u0", "bracket", "cylinder") if k in solve]
    if trajectory is not None:
        given.append("trajectory")
    if len(given) != 1:
        raise ctx.err("solve", "give exactly one of u0, bracket, cylinder, trajectory"
                      f" (found {given or 'none'})")
    kind = given[0]
    init_kw = {}
    if kind == "u0":
        init_kw["u0"] = _number(ctx, solve, "u0", "solve.u0", positive=True)
    elif kind == "bracket":
        b = solve["bracket"]
        if (not isinstance(b, list) or len(b) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in b)):
            raise ctx.err("solve.bracket", "expected [u0_lo, u0_hi]")
        if not (0 < b[0] < b[1]):
            raise ctx.err("solve.bracket", "need 0 < u0_lo < u0_hi")
        init_kw["bracket"] = (float(b[0]), float(b[1]))
        init_kw["max_iter"] = _number(ctx, solve, "max_iter", "solve.max_iter", integer=True,
                                      nonneg=True, default=60)
        if "target" in solve:
            if solve["target"] not in ("Fast", "Slow", "Crossed", "Undetermined"):
                raise ctx.err("solve.target", "unknown decay class")
            init_kw["target"] = solve["target"]
    elif kind == "cylinder":
        c = solve["cylinder"]
        if not isinstance(c, dict):
            raise ctx.err("solve.cylinder", "must be a table")
        _unknown(ctx, c, _CYLINDER_KEYS, "solve.cylinder")
        cyl = {"s0": _number(ctx, c, "s0", "solve.cylinder.s0", default=0.0),
               "v0": _number(ctx, c, "v0", "solve.cylinder.v0", positive=True),
               "vprime0": _number(ctx, c, "vprime0", "solve.cylinder.vprime0", default=0.0)}
        if "relative" in c:
            if not isinstance(c["relative"], bool):
                raise ctx.err("solve.cylinder.relative", "expected true or false")
            cyl["relative"] = c["relative"]
        if "s_min" in c:
            cyl["s_min"] = _number(ctx, c, "s_min", "solve.cylinder.s_min")
        init_kw["cylinder"] = cyl
    else:
        init_kw["trajectory"] = trajectory

    r_max = overrides.get("r_max")
    if r_max is None:
        r_max = _number(ctx, solve, "r_max", "solve.r_max", positive=True,
                        default=solver.DEFAULT_RMAX)
    rel_tol = overrides.get("rel_tol")
    if rel_tol is None:
        rel_tol = _number(ctx, solve, "rel_tol", "solve.rel_tol", positive=True, default=1e-10)
    if not 1e-14 < rel_tol < 1e-2:
        raise ctx.err("solve.rel_tol", "rel_tol must lie in (1e-14, 1e-2)")
    abs_tol = _number(ctx, solve, "abs_tol", "solve.abs_tol", nonneg=True, default=0.0)
    if not abs_tol < 1e-2:
        raise ctx.err("solve.abs_tol", "abs_tol must lie in [0, 1e-2)")
    per_decade = _number(ctx, solve, "per_decade", "solve.per_decade", integer=True,
                         positive=True, default=solver.PER_DECADE)
    reference = solve.get("reference")
    if reference is not None and reference not in REFERENCES:
        raise ctx.err("solve.reference", f"reference must be one of {list(REFERENCES)}")

    outputs = raw.get("outputs", {})
    _unknown(ctx, outputs, _SECTIONS["outputs"], "outputs")
    directory = overrides.get("out") or outputs.get("directory", "out")
    if not isinstance(directory, str):
        raise ctx.err("outputs.directory", "must be a string")
    formats = overrides.get("formats") or outputs.get("formats", list(FORMATS))
    if (not isinstance(formats, list) or not formats
            or any(f not in FORMATS for f in formats)):
        raise ctx.err("outputs.formats", f"formats must be a non-empty subset of {list(FORMATS)}")

    sc = raw.get("scenario", {})
    _unknown(ctx, sc, _SECTIONS["scenario"], "scenario")
    name = sc.get("name", Path(source).stem if source else "run")
    if not isinstance(name, str):
        raise ctx.err("scenario.name", "must be a string")
    checks = sc.get("checks", list(CATALOGUE))
    if not isinstance(checks, list) or any(c not in CATALOGUE for c in checks):
        bad = [c for c in checks if c not in CATALOGUE] if isinstance(checks, list) else checks
        raise ctx.err("scenario.checks", f"unknown checks {bad}; known: {sorted(CATALOGUE)}")

    sw = raw.get("sweep", {})
    _unknown(ctx, sw, _SECTIONS["sweep"], "sweep")
    axis = sw.get("axis")
    values = sw.get("values", [])
    if axis is not None and not isinstance(axis, str):
        raise ctx.err("sweep.axis", "must be a dotted path string")
    if not isinstance(values, list) or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in values):
        raise ctx.err("sweep.values", "must be a list of numbers")

    scenario = Scenario(name, n, prof, Initial(**init_kw), r_max=float(r_max),
                        rel_tol=float(rel_tol), abs_tol=abs_tol, checks=tuple(checks),
                        per_decade=per_decade)
    if axis is not None:
        from .harness import ScenarioError, with_value
        try:
            with_value(scenario, axis, values[0] if values else 1.0)
        except ScenarioError as exc:
            raise ctx.err("sweep.axis", str(exc)) from None
    return RunConfig(scenario, Path(directory), tuple(formats), reference, axis, list(values),
                     Path(source) if source else None)


def load(path, overrides: dict | None = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", source=str(path)) from None
    return parse(text, str(path), overrides, base_dir=path.parent)
