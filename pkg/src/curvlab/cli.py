"""Command-line entry point.

    curvlab solve    --config run.toml [--out DIR] [--tol REL] [--rmax R] [--format csv|json|both]
    curvlab pohozaev --config run.toml ...
    curvlab classify --config run.toml ...
    curvlab verify   --config run.toml ...      (or --fixtures for the shipped set)
    curvlab sweep    --config run.toml [--jobs K]

Every flag can also be given through an environment variable with the
CURVLAB_ prefix (CURVLAB_CONFIG, CURVLAB_OUT, CURVLAB_JOBS, CURVLAB_TOL,
CURVLAB_RMAX, CURVLAB_FORMAT, CURVLAB_QUIET); flags win over variables,
variables win over the file.

Exit codes: 0 success / all checks pass, 2 any check failed, 3 only
inconclusive issues, 1 configuration or runtime error.
"""

from __future__ import annotations

import argparse
import math
import os
import shutil
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import config as cfgmod
from . import exact, harness, solver
from .serialize import SCHEMA, write_csv, write_json

ENV_PREFIX = "CURVLAB_"
EXIT_OK, EXIT_ERROR, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class Outputs:
    """Tracks files written by one command so a failure leaves nothing behind."""

    def __init__(self, root: Path, formats):
        self.root = Path(root)
        self.formats = tuple(formats)
        self.files: list[Path] = []
        self.dirs: list[Path] = []

    def __enter__(self):
        self.mkdir(self.root)
        return self

    def mkdir(self, path: Path) -> Path:
        missing = []
        p = Path(path)
        while not p.exists():
            missing.append(p)
            p = p.parent
        for d in reversed(missing):
            d.mkdir()
            self.dirs.append(d)
        return Path(path)

    def want(self, fmt: str) -> bool:
        return fmt in self.formats

    def csv(self, name, header, rows, sub: Path | None = None):
        path = (sub or self.root) / name
        self.files.append(path)
        write_csv(path, header, rows)

    def json(self, name, obj, sub: Path | None = None):
        path = (sub or self.root) / name
        self.files.append(path)
        write_json(path, obj)

    def text(self, name, text, sub: Path | None = None):
        path = (sub or self.root) / name
        self.files.append(path)
        path.write_bytes(text.encode("utf-8"))

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            for f in self.files:
                f.unlink(missing_ok=True)
            for d in reversed(self.dirs):
                shutil.rmtree(d, ignore_errors=True)
        return False


# -- commands -----------------------------------------------------------------------

def _solution_meta(sol) -> dict:
    return {"n": sol.n, "profile": sol.profile.to_dict(), "status": sol.status.to_dict(),
            "r_start": float(sol.r[0]), "r_end": sol.r_end, "points": int(sol.r.size),
            "tolerances": {"rel_tol": sol.rel_tol, "abs_tol": sol.abs_tol}}


def _reference_rows(cfg, sol):
    """Closed-form comparison columns on the solution grid."""
    prof = sol.profile
    n = sol.n
    if prof.k_infinity is None or not prof.is_autonomous:
        raise ValueError("reference solutions need a Constant profile")
    K = prof.k_infinity
    r = sol.r
    if cfg.reference == "bubble":
        if not sol.regular:
            raise ValueError("bubble reference needs a regular solution")
        lam = exact.bubble_scale(n, K, float(sol.u[0]))
        u, up = exact.bubble(n, K, lam, r)
    elif cfg.reference == "constant_cylinder":
        rr = np.where(r > 0, r, np.nan)
        u = exact.constant_cylinder(n, K) * rr ** (-exact.half_dim(n))
        up = -exact.half_dim(n) * u / rr
    else:
        rr = np.where(r > 0, r, np.nan)
        v, vp = exact.cosh_separatrix(n, K, np.log(rr))
        m = exact.half_dim(n)
        u = rr ** (-m) * v
        up = rr ** (-m - 1) * (vp - m * v)
    return zip(r.tolist(), np.asarray(u).tolist(), np.asarray(up).tolist(),
               (sol.u / np.asarray(u) - 1).tolist())


def cmd_solve(cfg: cfgmod.RunConfig, out: Outputs) -> tuple[int, str]:
    pipe = harness.solve(cfg.scenario)
    sol = pipe.sol
    if out.want("csv"):
        out.csv("trajectory.csv", ["r", "u", "uprime"],
                zip(sol.r.tolist(), sol.u.tolist(), sol.up.tolist()))
    if out.want("json"):
        payload = {"schema": SCHEMA, "solution": sol.to_dict()}
        if pipe.shooting is not None:
            payload["shooting"] = pipe.shooting
        out.json("trajectory.json", payload)
    if cfg.reference:
        out.csv("reference.csv", ["r", "u_exact", "uprime_exact", "rel_error"],
                _reference_rows(cfg, sol))
    return EXIT_OK, (f"solve {cfg.scenario.name}: {sol.status.kind} at r={sol.r_end:.6g}, "
                     f"{sol.r.size} points")


def cmd_pohozaev(cfg: cfgmod.RunConfig, out: Outputs) -> tuple[int, str]:
    pipe = harness.solve(cfg.scenario)
    rep = pipe.poh
    if out.want("csv"):
        out.csv("pohozaev.csv", ["r", "surface", "volume", "residual"], rep.rows())
    if out.want("json"):
        out.json("pohozaev.json", {"schema": SCHEMA, "solution": _solution_meta(pipe.sol),
                                   "pohozaev": rep.to_dict()})
    code = EXIT_INCONCLUSIVE if rep.limit_status == "Undetermined" else EXIT_OK
    return code, (f"pohozaev {cfg.scenario.name}: P(u) = {rep.limit_estimate:.10g} "
                  f"+- {rep.uncertainty:.3g} ({rep.limit_status}), "
                  f"identity residual {rep.identity_residual:.3g}")


def cmd_classify(cfg: cfgmod.RunConfig, out: Outputs) -> tuple[int, str]:
    pipe = harness.solve(cfg.scenario)
    rep = pipe.asy
    sol = pipe.sol
    if out.want("json"):
        out.json("asymptotics.json", {"schema": SCHEMA, "solution": _solution_meta(sol),
                                      "asymptotics": rep.to_dict()})
    if out.want("csv"):
        om = pipe.omega
        out.csv("omega.csv", ["r", "omega", "omega_prime", "omega_prime_fd", "flux_radial",
                              "flux_cylinder"],
                zip(om.r.tolist(), om.omega.tolist(), om.omega_prime.tolist(),
                    om.omega_prime_fd.tolist(), om.flux_radial.tolist(),
                    om.flux_cylinder.tolist()))
        if sol.r_end > 1.0:
            nodes, vals = asy.length_curve(sol)
            out.csv("length.csv", ["R", "L"], zip(nodes.tolist(), vals.tolist()))
        else:
            out.csv("length.csv", ["R", "L"], [])
        nodes, vals = asy.volume_curve(sol)
        out.csv("volume.csv", ["R", "V"], zip(nodes.tolist(), vals.tolist()))
    code = EXIT_INCONCLUSIVE if rep.decay_class == asy.UNDETERMINED else EXIT_OK
    kappa = "-" if rep.kappa is None else f"{rep.kappa:.6g}"
    return code, (f"classify {cfg.scenario.name}: {rep.decay_class} (kappa {kappa}), "
                  f"{rep.completeness.classification}, {rep.volume.classification}")


def _exit_for(overall: str) -> int:
    return {harness.PASS: EXIT_OK, harness.FAIL: EXIT_FAIL}.get(overall, EXIT_INCONCLUSIVE)


def _write_report(out: Outputs, rep: harness.VerificationReport, sub: Path | None = None):
    if out.want("json"):
        out.json("report.json", rep.to_dict(), sub)
    out.text("report.txt", rep.render_text(), sub)


def cmd_verify(cfg: cfgmod.RunConfig, out: Outputs) -> tuple[int, str]:
    rep = harness.run_scenario(cfg.scenario)
    _write_report(out, rep)
    counts = {k: sum(c.outcome == k for c in rep.checks)
              for k in (harness.PASS, harness.FAIL, harness.INCONCLUSIVE)}
    return _exit_for(rep.overall), (f"verify {cfg.scenario.name}: {rep.overall} "
                                    f"({counts['Pass']} pass, {counts['Fail']} fail, "
                                    f"{counts['Inconclusive']} inconclusive)")


def _worst(outcomes) -> str:
    outcomes = set(outcomes)
    if harness.FAIL in outcomes:
        return harness.FAIL
    if harness.INCONCLUSIVE in outcomes:
        return harness.INCONCLUSIVE
    return harness.PASS


def cmd_sweep(cfg: cfgmod.RunConfig, out: Outputs, jobs: int = 1) -> tuple[int, str]:
    if cfg.sweep_axis is None:
        raise cfgmod.ConfigError("sweep needs [sweep] axis and values", "sweep",
                                 source=str(cfg.source) if cfg.source else None)
    res = harness.sweep(cfg.scenario, cfg.sweep_axis, cfg.sweep_values, jobs=jobs)
    out.csv("summary.csv", res.summary_header(), res.summary_rows())
    for i, rep in enumerate(res.reports):
        sub = out.mkdir(out.root / f"run-{i:03d}")
        _write_report(out, rep, sub)
    overall = _worst(r.overall for r in res.reports) if res.reports else harness.PASS
    return _exit_for(overall), (f"sweep {cfg.scenario.name}: {len(res.reports)} runs over "
                                f"{cfg.sweep_axis}, {overall}")


def shipped_configs() -> list[Path]:
    """The fixture configurations installed with the package, sorted by name."""
    root = resources.files("curvlab") / "configs"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".toml"))


def verify_fixtures(out_root: Path, formats=("csv", "json"), overrides=None) -> tuple[int, list]:
    """cmd_verify over every shipped fixture, each into its own subdirectory."""
    lines, codes = [], []
    for path in shipped_configs():
        cfg = cfgmod.load(path, overrides)
        with Outputs(Path(out_root) / cfg.scenario.name, formats) as out:
            code, line = cmd_verify(cfg, out)
        codes.append(code)
        lines.append(line)
    worst = EXIT_FAIL if EXIT_FAIL in codes else (
        EXIT_INCONCLUSIVE if EXIT_INCONCLUSIVE in codes else EXIT_OK)
    return worst, lines


COMMANDS = {"solve": cmd_solve, "pohozaev": cmd_pohozaev, "classify": cmd_classify,
            "verify": cmd_verify, "sweep": cmd_sweep}


# -- argument handling ----------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="curvlab", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="run configuration (TOML)")
    ap.add_argument("--out", help="output directory (overrides [outputs] directory)")
    ap.add_argument("--jobs", type=int, help="parallel runs for sweep")
    ap.add_argument("--tol", type=float, help="relative tolerance (overrides solve.rel_tol)")
    ap.add_argument("--rmax", type=float, help="outer radius (overrides solve.r_max)")
    ap.add_argument("--format", choices=["csv", "json", "both"], help="data file formats")
    ap.add_argument("--quiet", action="store_true", default=None, help="no stdout summary")
    ap.add_argument("--fixtures", action="store_true",
                    help="verify: run every shipped fixture configuration")
    return ap


def _env(name):
    return os.environ.get(ENV_PREFIX + name)


def _resolve(args) -> dict:
    """Merge flags over CURVLAB_* variables."""
    def pick(flag, env, conv=str):
        if flag is not None:
            return flag
        raw = _env(env)
        if raw is None or raw == "":
            return None
        try:
            return conv(raw)
        except ValueError:
            raise cfgmod.ConfigError(f"invalid value {raw!r} in {ENV_PREFIX}{env}") from None

    quiet = args.quiet if args.quiet is not None else (
        (_env("QUIET") or "").lower() in ("1", "true", "yes"))
    fmt = pick(args.format, "FORMAT")
    if fmt is not None and fmt not in ("csv", "json", "both"):
        raise cfgmod.ConfigError(f"invalid format {fmt!r}")
    return {"config": pick(args.config, "CONFIG"), "out": pick(args.out, "OUT"),
            "jobs": pick(args.jobs, "JOBS", int) or 1, "rel_tol": pick(args.tol, "TOL", float),
            "r_max": pick(args.rmax, "RMAX", float),
            "formats": None if fmt is None else (["csv", "json"] if fmt == "both" else [fmt]),
            "quiet": quiet}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        opts = _resolve(args)
        overrides = {k: opts[k] for k in ("out", "rel_tol", "r_max", "formats")
                     if opts[k] is not None}
        if args.command == "verify" and args.fixtures:
            root = Path(opts["out"] or "out")
            code, lines = verify_fixtures(root, opts["formats"] or ("csv", "json"),
                                          {k: v for k, v in overrides.items() if k != "out"})
            if not opts["quiet"]:
                print("\n".join(lines))
            return code
        if not opts["config"]:
            raise cfgmod.ConfigError("no configuration given (--config or CURVLAB_CONFIG)")
        cfg = cfgmod.load(opts["config"], overrides)
        with Outputs(cfg.output_dir, cfg.formats) as out:
            if args.command == "sweep":
                code, line = cmd_sweep(cfg, out, jobs=opts["jobs"])
            else:
                code, line = COMMANDS[args.command](cfg, out)
    except cfgmod.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (harness.ScenarioError, solver.SolverError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not opts["quiet"]:
        print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
