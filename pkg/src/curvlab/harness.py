"""Named desk checks of the qualitative theorems on concrete solutions.

A Scenario fixes a dimension, a curvature profile, initial data and a list
of checks from CATALOGUE.  run_scenario integrates once, computes the
Pohozaev and asymptotic reports once, then evaluates every check against
that shared, read-only context.  A theorem can only be checked on
instances: every Pass means "this instance is consistent with the
statement".  Checks whose premises fail are reported as Pass with
``vacuous = True``; checks whose premises or conclusions cannot be decided
on the available tail are Inconclusive with a reason code.
"""

from __future__ import annotations

import copy
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import asymptotics as asy
from . import curvature, exact, pohozaev, solver
from .serialize import SCHEMA, dumps

PASS, FAIL, INCONCLUSIVE = "Pass", "Fail", "Inconclusive"

# thresholds that are not already part of a module calibration record
THRESHOLDS = {
    "flux_premise": 1e-8,        # final w_n v'^2 below which the flux condition holds
    "liminf_ratio": 1e-3,        # tail min of r^m u relative to its max, "tends to zero"
    "bounded_growth": 0.10,      # final-decade sup of r^m u may exceed earlier sup by this
    "log_fit_residual": 0.01,    # V(R) against a + C' ln R, rms over range
    "p_nonzero_factor": 10.0,    # |P(u, r)| > factor * (identity_tol + uncertainty)
    "a1_ratio": 1.05,            # c2 / c1 on the fast tail
    "c0_gap": 1e-3,              # flux-identity c0 against direct and closed form
    "separatrix_match": 0.05,    # maxima within this of C count as near the separatrix
    "separatrix_profile": 1e-2,  # sup |v(s_j + t) - C cosh(t)^-m| / C on |t| <= 1
    "lemma24_rmax": 1e6,
}


class ScenarioError(ValueError):
    """Malformed scenario or sweep request."""


@dataclass(frozen=True)
class Initial:
    """Exactly one of: u0, a shooting bracket, cylinder data, or a stored trajectory."""

    u0: float | None = None
    bracket: tuple[float, float] | None = None
    cylinder: dict | None = None          # s0, v0, vprime0, optional relative, s_min
    trajectory: dict | None = None        # a RadialSolution.to_dict payload
    target: str | None = None             # shooting target class
    max_iter: int = 60

    def kind(self) -> str:
        set_ = [k for k in ("u0", "bracket", "cylinder", "trajectory")
                if getattr(self, k) is not None]
        if len(set_) != 1:
            raise ScenarioError(f"initial data needs exactly one of u0, bracket, cylinder, "
                                f"trajectory; got {set_ or 'none'}")
        return set_[0]

    def to_dict(self) -> dict:
        out = {}
        k = self.kind()
        if k == "u0":
            out["u0"] = self.u0
        elif k == "bracket":
            out["bracket"] = list(self.bracket)
            out["max_iter"] = self.max_iter
            out["target"] = self.target
        elif k == "cylinder":
            out["cylinder"] = dict(self.cylinder)
        else:
            out["trajectory"] = {"points": len(self.trajectory["r"])}
        return out


@dataclass(frozen=True)
class Scenario:
    name: str
    n: int
    profile: dict | curvature.CurvatureProfile
    initial: Initial
    r_max: float = solver.DEFAULT_RMAX
    rel_tol: float = 1e-10
    abs_tol: float = 0.0
    checks: tuple[str, ...] = ()
    per_decade: int = solver.PER_DECADE

    def build_profile(self) -> curvature.CurvatureProfile:
        if isinstance(self.profile, curvature.CurvatureProfile):
            return self.profile
        return curvature.from_dict(self.profile)

    def validate(self) -> None:
        if self.n < 3:
            raise ScenarioError("n must be >= 3")
        self.initial.kind()
        try:
            self.build_profile()
        except curvature.ProfileError as exc:
            raise ScenarioError(str(exc)) from None
        unknown = [c for c in self.checks if c not in CATALOGUE]
        if unknown:
            raise ScenarioError(f"unknown checks {unknown}; catalogue: {sorted(CATALOGUE)}")
        if not self.r_max > 0:
            raise ScenarioError("r_max must be positive")

    def to_dict(self) -> dict:
        prof = (self.profile.to_dict() if isinstance(self.profile, curvature.CurvatureProfile)
                else self.profile)
        return {"name": self.name, "n": self.n, "profile": prof,
                "initial": self.initial.to_dict(), "r_max": self.r_max,
                "rel_tol": self.rel_tol, "abs_tol": self.abs_tol,
                "checks": list(self.checks), "per_decade": self.per_decade}


@dataclass
class CheckOutcome:
    name: str
    outcome: str
    statement: str
    measured: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    reason: str = ""
    vacuous: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "outcome": self.outcome, "statement": self.statement,
                "measured": self.measured, "thresholds": self.thresholds,
                "provenance": self.provenance, "reason": self.reason,
                "vacuous": self.vacuous, "note": self.note}


@dataclass
class VerificationReport:
    scenario: dict
    checks: list[CheckOutcome]
    solution: dict
    pohozaev: dict
    asymptotics: dict
    extras: dict = field(default_factory=dict)
    error: str = ""

    @property
    def overall(self) -> str:
        if self.error:
            return INCONCLUSIVE
        outcomes = {c.outcome for c in self.checks}
        if FAIL in outcomes:
            return FAIL
        if INCONCLUSIVE in outcomes:
            return INCONCLUSIVE
        return PASS

    def check(self, name: str) -> CheckOutcome:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "scenario": self.scenario, "overall": self.overall,
                "checks": [c.to_dict() for c in self.checks], "solution": self.solution,
                "pohozaev": self.pohozaev, "asymptotics": self.asymptotics,
                "extras": self.extras, "error": self.error}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def render_text(self) -> str:
        sc = self.scenario
        lines = [f"scenario   {sc['name']}",
                 f"n          {sc['n']}",
                 f"profile    {sc['profile']}",
                 f"status     {self.solution.get('status', {}).get('kind', '-')}"
                 f"  r_end={self.solution.get('r_end', math.nan):.6g}",
                 f"P(u)       {self.pohozaev.get('limit_estimate', math.nan):.10g}"
                 f" +- {self.pohozaev.get('uncertainty', math.nan):.3g}"
                 f"  ({self.pohozaev.get('limit_status', '-')})",
                 f"decay      {self.asymptotics.get('decay', {}).get('class', '-')}"
                 f"  kappa={_fmt(self.asymptotics.get('decay', {}).get('kappa'))}",
                 ""]
        if self.error:
            lines.append(f"error      {self.error}")
        width = max([len(c.name) for c in self.checks] + [5])
        lines.append(f"{'check':<{width}}  {'outcome':<12}  detail")
        for c in self.checks:
            tag = c.outcome + (" (vacuous)" if c.vacuous else "")
            detail = c.reason or c.note
            lines.append(f"{c.name:<{width}}  {tag:<12}  {detail}")
        lines.append("")
        lines.append(f"overall    {self.overall}")
        return "\n".join(lines) + "\n"


def _fmt(x):
    return "-" if x is None else f"{x:.6g}"


# -- pipeline ---------------------------------------------------------------------

@dataclass
class Pipeline:
    """Solution plus derived reports, each computed at most once."""

    scenario: Scenario
    profile: curvature.CurvatureProfile
    sol: solver.RadialSolution
    csol: solver.CylinderSolution | None = None
    shooting: dict | None = None
    calibration: asy.Calibration = asy.DEFAULT

    @cached_property
    def poh(self) -> pohozaev.PohozaevReport:
        return pohozaev.pohozaev_report(self.sol, per_decade=self.scenario.per_decade)

    @cached_property
    def asy(self) -> asy.AsymptoticsReport:
        return asy.analyze(self.sol, self.calibration)

    @cached_property
    def lemma24(self) -> curvature.ConditionReport:
        r_max = max(THRESHOLDS["lemma24_rmax"], 10 * self.profile.r0)
        return curvature.check_lemma24_conditions(self.profile, self.scenario.n, r_max=r_max)

    @cached_property
    def omega(self) -> asy.OmegaDiagnostic:
        return asy.omega_diagnostic(self.sol, self.calibration)

    @cached_property
    def cylinder(self) -> solver.CylinderSolution:
        if self.csol is not None:
            return self.csol
        start = max(self.sol.anchor, float(self.sol.r[self.sol.r > 0][0]))
        return solver.cylinder_transform(self.sol, math.log(start))

    @property
    def positive(self) -> bool:
        return self.sol.status.kind == solver.Status.REACHED

    @property
    def tail_start(self) -> float:
        return max(self.sol.anchor, 10 * self.profile.r0)

    def tail_grid(self) -> np.ndarray:
        return self.sol.log_grid(self.scenario.per_decade, start=min(self.tail_start,
                                                                     self.sol.r_end))

    @property
    def zero_tol(self) -> float:
        p = self.poh
        return p.uncertainty + p.identity_tol


def solve(scenario: Scenario) -> Pipeline:
    """Produce the solution a scenario describes (integration, shooting or loading)."""
    scenario.validate()
    prof = scenario.build_profile()
    n = scenario.n
    init = scenario.initial
    kind = init.kind()
    csol = None
    shooting = None
    if kind == "u0":
        sol = solver.integrate_radial(n, prof, init.u0, scenario.r_max, scenario.rel_tol,
                                      scenario.abs_tol, scenario.per_decade)
    elif kind == "bracket":
        res = solver.shoot(n, prof, init.bracket[0], init.bracket[1], target=init.target,
                           max_iter=init.max_iter, r_max=scenario.r_max,
                           rel_tol=scenario.rel_tol, abs_tol=scenario.abs_tol)
        # continue with the side of the bracket that stays positive
        lo_pos = res.solution_lo.status.kind == solver.Status.REACHED
        sol = res.solution_lo if lo_pos else res.solution_hi
        shooting = {"u0_star": res.u0_star, "u0_lo": res.u0_lo, "u0_hi": res.u0_hi,
                    "iterations": res.iterations, "converged": res.converged,
                    "class_lo": res.report_lo.decay_class,
                    "class_hi": res.report_hi.decay_class,
                    "analysed": "lo" if lo_pos else "hi"}
    elif kind == "cylinder":
        c = dict(init.cylinder)
        v0 = float(c["v0"])
        if c.get("relative", False):
            if prof.k_infinity is None:
                raise ScenarioError("relative cylinder data needs a profile with a limit")
            v0 *= exact.constant_cylinder(n, prof.k_infinity)
        s0 = float(c.get("s0", 0.0))
        csol = solver.integrate_cylinder(n, prof, s0, v0, float(c.get("vprime0", 0.0)),
                                         s_max=math.log(scenario.r_max),
                                         rel_tol=scenario.rel_tol,
                                         abs_tol=scenario.abs_tol or 1e-14,
                                         per_decade=scenario.per_decade,
                                         s_min=c.get("s_min"))
        sol = solver.inverse_transform(csol)
    else:
        from .serialize import solution_from_dict
        sol = solution_from_dict(init.trajectory)
        if isinstance(sol, solver.CylinderSolution):
            csol = sol
            sol = solver.inverse_transform(sol)
        if sol.n != n:
            raise ScenarioError(f"trajectory has n={sol.n}, scenario n={n}")
        prof = sol.profile
    return Pipeline(scenario, prof, sol, csol, shooting)


# -- checks -----------------------------------------------------------------------

def _vacuous(name, statement, why, **measured):
    return CheckOutcome(name, PASS, statement, measured=measured, vacuous=True,
                        note=f"premise not met: {why}")


def _inconclusive(name, statement, reason, **measured):
    return CheckOutcome(name, INCONCLUSIVE, statement, measured=measured, reason=reason)


def _decay_undecided(ctx: Pipeline) -> str | None:
    fit = ctx.asy.fit
    if fit.decay_class == asy.UNDETERMINED:
        return "InsufficientTail" if ctx.asy.note == "InsufficientTail" else "UndeterminedDecay"
    return None


def _slow(ctx: Pipeline) -> bool:
    # fast decay implies the slow-decay bound
    return ctx.asy.decay_class in (asy.SLOW, asy.FAST)


def check_pohozaev_identity(ctx: Pipeline) -> CheckOutcome:
    name, stmt = "POHOZAEV_IDENTITY", "surface - volume is constant along the solution"
    p = ctx.poh
    if p.r.size < 2:
        return _inconclusive(name, stmt, "InsufficientTail", samples=int(p.r.size))
    bound = p.identity_tol * (1 + abs(p.p0))
    ok = p.identity_residual < bound
    return CheckOutcome(
        name, PASS if ok else FAIL, stmt,
        measured={"identity_residual": p.identity_residual, "p0": p.p0},
        thresholds={"bound": bound, "identity_tol": p.identity_tol},
        provenance={"identity_residual": "pohozaev.pohozaev_report: max |surface - volume - p0|",
                    "p0": "pohozaev.pohozaev_report: surface - volume at the anchor radius"})


def check_thm_a(ctx: Pipeline) -> CheckOutcome:
    name, stmt = "THM_A", "exponential control of K' and bounded r|u'|/u give slow decay"
    if not ctx.positive:
        return _vacuous(name, stmt, f"solution is not positive ({ctx.sol.status.kind})")
    holds, C, c = curvature.exp_lower_bound(ctx.profile, ctx.profile.r0)
    if not holds:
        return _vacuous(name, stmt, "K' >= -C exp(-c r) fails on the sample grid")
    if ctx.sol.r_end < 100 * ctx.tail_start:
        return _inconclusive(name, stmt, "InsufficientTail", r_end=ctx.sol.r_end,
                             tail_start=ctx.tail_start)
    harn = ctx.asy.harnack
    if not (math.isfinite(harn.sup) and harn.stable):
        return _vacuous(name, stmt, "gradient ratio not bounded and stable on the tail",
                        harnack_sup=harn.sup)
    r = ctx.tail_grid()
    u, _ = ctx.sol.interpolate(r)
    w = r ** ctx.sol.m * u
    last = r >= ctx.sol.r_end / 10
    sup_last, sup_early = float(w[last].max()), float(w[~last].max())
    bound = (1 + THRESHOLDS["bounded_growth"]) * sup_early
    ok = sup_last <= bound
    return CheckOutcome(
        name, PASS if ok else FAIL, stmt,
        measured={"sup_final_decade": sup_last, "sup_before": sup_early,
                  "harnack_sup": harn.sup, "exp_C": C, "exp_c": c},
        thresholds={"sup_final_decade_max": bound},
        provenance={"sup_final_decade": "max r^m u on the log grid of the final decade",
                    "sup_before": "max r^m u on the log grid from the tail start",
                    "harnack_sup": "asymptotics.harnack_gradient_ratio",
                    "exp_C": "curvature.exp_lower_bound", "exp_c": "curvature.exp_lower_bound"},
        note="instance consistent with Theorem A" if ok else "")


def _sign_premises(ctx: Pipeline, name, stmt):
    prof = ctx.profile
    if not ctx.positive:
        return _vacuous(name, stmt, f"solution is not positive ({ctx.sol.status.kind})")
    if prof.k_infinity is None or prof.k_infinity <= 0:
        return _vacuous(name, stmt, "K has no positive limit at infinity")
    why = _decay_undecided(ctx)
    if why:
        return _inconclusive(name, stmt, why)
    if not _slow(ctx):
        return _vacuous(name, stmt, "solution does not have slow decay")
    lem = ctx.lemma24
    if lem.inconclusive and not lem.any_holds:
        return _inconclusive(name, stmt, "Lemma24Inconclusive")
    if not lem.any_holds:
        return _vacuous(name, stmt, "none of the tail decay conditions on K holds")
    if ctx.poh.limit_status == "Undetermined":
        return _inconclusive(name, stmt, "PohozaevUndetermined")
    return None


def check_thm_b_sign(ctx: Pipeline) -> CheckOutcome:
    name, stmt = "THM_B_SIGN", "P(u) <= 0 for slow-decay solutions"
    early = _sign_premises(ctx, name, stmt)
    if early:
        return early
    p = ctx.poh
    ok = p.limit_estimate <= ctx.zero_tol
    return CheckOutcome(
        name, PASS if ok else FAIL, stmt,
        measured={"P": p.limit_estimate, "uncertainty": p.uncertainty,
                  "limit_status": p.limit_status},
        thresholds={"P_max": ctx.zero_tol},
        provenance={"P": "pohozaev.pohozaev_limit over the final decades of the surface form",
                    "uncertainty": "half range of the surface form over the same window",
                    "P_max": "uncertainty + identity_tol"})


def check_thm_b_fast(ctx: Pipeline) -> CheckOutcome:
    name, stmt = "THM_B_FAST", "x.grad K <= 0 and P(u) = 0 give fast decay"
    early = _sign_premises(ctx, name, stmt)
    if early:
        return early
    r = np.geomspace(max(ctx.profile.r0, 1e-2), THRESHOLDS["lemma24_rmax"], 400)
    dk_max = float(np.max(ctx.profile.derivative(r)))
    if dk_max > 0:
        return _vacuous(name, stmt, "K' > 0 somewhere on the tail", dk_max=dk_max)
    p = ctx.poh
    if abs(p.limit_estimate) > ctx.zero_tol:
        return _vacuous(name, stmt, "P(u) is not zero", P=p.limit_estimate)
    ok = ctx.asy.decay_class == asy.FAST
    return CheckOutcome(
        name, PASS if ok else FAIL, stmt,
        measured={"P": p.limit_estimate, "kappa": ctx.asy.kappa,
                  "class": ctx.asy.decay_class, "dk_max": dk_max},
        thresholds={"P_zero": ctx.zero_tol, "fast_band": ctx.calibration.band},
        provenance={"kappa": "asymptotics.fit_decay_exponent",
                    "dk_max": "max K' on a log grid [r0, 1e6]"})


def check_thm_c(ctx: Pipeline) -> CheckOutcome:
    name, stmt = "THM_C_DICHOTOMY", "fast decay or complete; complete iff infinite volume"
    if not ctx.positive:
        return _vacuous(name, stmt, f"solution is not positive ({ctx.sol.status.kind})")
    why = _decay_undecided(ctx)
    if why:
        return _inconclusive(name, stmt, why)
    if not _slow(ctx):
        return _vacuous(name, stmt, "solution does not have slow decay")
    comp, vol = ctx.asy.completeness, ctx.asy.volume
    if asy.UNDETERMINED in (comp.classification, vol.classification):
        return _inconclusive(name, stmt, "UndeterminedGrowth",
                             completeness=comp.classification, volume=vol.classification)
    complete = comp.classification == asy.COMPLETE
    infinite = vol.classification in (asy.LOG_DIVERGENT, asy.POLY_DIVERGENT)
    either = complete or ctx.asy.decay_class == asy.FAST
    ok = either and (complete == infinite)
    return CheckOutcome(
        name, PASS if ok else FAIL, stmt,
        measured={"completeness": comp.classification, "volume": vol.classification,
                  "length_rate": comp.rate, "volume_rate": vol.rate,
                  "class": ctx.asy.decay_class},
        thresholds={"divergent_rate": ctx.calibration.divergent_rate,
                    "convergent_rate": ctx.calibration.convergent_rate,
                    "poly_rate": ctx.calibration.poly_rate},
        provenance={"length_rate": "asymptotics.completeness_length",
                    "volume_rate": "asymptotics.total_volume"})


def check_thm_d(ctx: Pipeline) -> CheckOutcome:
    name, stmt = "THM_D", "vanishing radial flux gives P(u) <= 0, and P = 0 forces liminf r^m u = 0"
    if not ctx.positive:
        return _vacuous(name, stmt, f"solution is not positive ({ctx.sol.status.kind})")
    om = ctx.omega
    if om.r.size == 0:
        return _inconclusive(name, stmt, "InsufficientTail")
    flux_end = float(om.flux_cylinder[-1])
    if flux_end >= THRESHOLDS["flux_premise"]:
        return _vacuous(name, stmt, "radial flux w_n v'^2 has not vanished", flux_end=flux_end)
    p = ctx.poh
    if p.limit_status == "Undetermined":
        return _inconclusive(name, stmt, "PohozaevUndetermined")
    if p.limit_status != "Converged":
        return _vacuous(name, stmt, f"P(u) does not exist ({p.limit_status})")
    measured = {"P": p.limit_estimate, "flux_end": flux_end}
    thresholds = {"P_max": ctx.zero_tol, "flux_premise": THRESHOLDS["flux_premise"]}
    prov = {"flux_end": "asymptotics.omega_diagnostic: w_n v'(s)^2 at r_end",
            "P": "pohozaev.pohozaev_limit"}
    ok = p.limit_estimate <= ctx.zero_tol
    if ok and abs(p.limit_estimate) <= ctx.zero_tol:
        r = ctx.tail_grid()
        u, _ = ctx.sol.interpolate(r)
        w = r ** ctx.sol.m * u
        rall = ctx.sol.log_grid(ctx.scenario.per_decade)
        wall = rall ** ctx.sol.m * ctx.sol.interpolate(rall)[0]
        ratio = float(w[r >= ctx.sol.r_end / 10].min() / wall.max())
        measured["liminf_ratio"] = ratio
        thresholds["liminf_ratio_max"] = THRESHOLDS["liminf_ratio"]
        prov["liminf_ratio"] = "min r^m u over the final decade / max r^m u overall"
        ok = ratio <= THRESHOLDS["liminf_ratio"]
    return CheckOutcome(name, PASS if ok else FAIL, stmt, measured, thresholds, prov)


def check_thm_215(ctx: Pipeline) -> CheckOutcome:
    name, stmt = "THM_215_LOG", "|P(u, r)| bounded below gives V(R) >= C' ln R"
    if not ctx.positive:
        return _vacuous(name, stmt, f"solution is not positive ({ctx.sol.status.kind})")
    r = ctx.tail_grid()
    if r.size < ctx.calibration.min_samples:
        return _inconclusive(name, stmt, "InsufficientTail", samples=int(r.size))
    surf = pohozaev.surface_form(ctx.sol, r)
    floor = THRESHOLDS["p_nonzero_factor"] * ctx.zero_tol
    pmin = float(np.min(np.abs(surf)))
    if pmin <= floor:
        return _vacuous(name, stmt, "|P(u, r)| is not bounded away from zero", P_min=pmin)
    nodes, vals = asy.volume_curve(ctx.sol, ctx.calibration)
    sel = nodes >= r[0] * (1 - 1e-12)
    x, y = np.log(nodes[sel]), vals[sel]
    # an oscillating v makes V wiggle about its trend; sample it stroboscopically
    # at successive maxima of v when there are enough of them
    maxima = [e.s for e in asy.local_extrema_scan(ctx.cylinder)
              if e.kind == "max" and e.s >= x[0]]
    sampling = "log grid"
    if len(maxima) >= 3:
        xs = np.array(maxima)
        y = np.interp(xs, np.log(nodes[nodes > 0]), vals[nodes > 0])
        x, sampling = xs, "maxima of v"
    coef = np.polyfit(x, y, 1)
    span = float(y.max() - y.min())
    resid = float(np.sqrt(np.mean((y - np.polyval(coef, x)) ** 2))) / span if span > 0 else 0.0
    slope = float(coef[0])
    ok = slope > 0 and resid < THRESHOLDS["log_fit_residual"]
    return CheckOutcome(
        name, PASS if ok else FAIL, stmt,
        measured={"C_prime": slope, "fit_residual": resid, "P_min": pmin},
        thresholds={"C_prime_min": 0.0, "fit_residual_max": THRESHOLDS["log_fit_residual"],
                    "P_floor": floor},
        note=f"V sampled on the {sampling}",
        provenance={"C_prime": "least-squares slope of V(R) in ln R over the tail",
                    "fit_residual": "rms of that fit over the range of V on the tail",
                    "P_min": "min |surface form| on the tail grid"})


def _fast_premise(ctx: Pipeline, name, stmt):
    if not ctx.positive:
        return _vacuous(name, stmt, f"solution is not positive ({ctx.sol.status.kind})")
    why = _decay_undecided(ctx)
    if why:
        return _inconclusive(name, stmt, why)
    if ctx.asy.decay_class != asy.FAST:
        return _vacuous(name, stmt, f"solution does not have fast decay ({ctx.asy.decay_class})")
    return None


def check_a1_bounds(ctx: Pipeline) -> CheckOutcome:
    name, stmt = "APP_A1_BOUNDS", "c1 r^(2-n) <= u <= c2 r^(2-n) for fast decay"
    early = _fast_premise(ctx, name, stmt)
    if early:
        return early
    c1, c2 = asy.a1_bounds(ctx.sol, ctx.asy.fit, ctx.calibration)
    ratio = c2 / c1 if c1 > 0 else math.inf
    ok = c1 > 0 and ratio < THRESHOLDS["a1_ratio"]
    return CheckOutcome(
        name, PASS if ok else FAIL, stmt,
        measured={"c1": c1, "c2": c2, "ratio": ratio, "window": list(ctx.asy.fit.window)},
        thresholds={"c1_min": 0.0, "ratio_max": THRESHOLDS["a1_ratio"]},
        provenance={"c1": "asymptotics.a1_bounds", "c2": "asymptotics.a1_bounds"})


def check_a1_c0(ctx: Pipeline) -> CheckOutcome:
    name, stmt = "APP_A1_C0", "the flux identity limit c0 equals lim r^(n-2) u"
    early = _fast_premise(ctx, name, stmt)
    if early:
        return early
    try:
        c0 = asy.c0_limit(ctx.sol, fit=ctx.asy.fit, calibration=ctx.calibration)
    except ValueError as exc:
        return _inconclusive(name, stmt, f"C0Unavailable: {exc}")
    gap = c0.relative_gap
    measured = {"c0": c0.c0, "direct": c0.direct, "relative_gap": gap,
                "tail_bound": c0.tail_bound, "r0": c0.r0}
    thresholds = {"relative_gap_max": THRESHOLDS["c0_gap"]}
    prov = {"c0": "asymptotics.c0_limit (flux identity with truncation tail)",
            "direct": "r_max^(n-2) u(r_max)"}
    ok = gap < THRESHOLDS["c0_gap"]
    prof = ctx.profile
    if prof.kind is curvature.Kind.CONSTANT and ctx.sol.regular:
        lam = exact.bubble_scale(ctx.sol.n, prof.k_infinity, float(ctx.sol.u[0]))
        closed = exact.bubble_tail_constant(ctx.sol.n, prof.k_infinity, lam)
        cgap = abs(c0.c0 - closed) / abs(closed)
        measured.update(closed_form=closed, closed_form_gap=cgap)
        prov["closed_form"] = "exact.bubble_tail_constant with lambda from u0"
        ok = ok and cgap < THRESHOLDS["c0_gap"]
    return CheckOutcome(name, PASS if ok else FAIL, stmt, measured, thresholds, prov)


def check_delaunay_limit(ctx: Pipeline) -> CheckOutcome:
    name, stmt = "DELAUNAY_LIMIT", "maxima of v obey the lower bound; near-separatrix maxima look like C cosh^-m"
    prof = ctx.profile
    if prof.k_infinity is None:
        return _vacuous(name, stmt, "K has no limit at infinity")
    csol = ctx.cylinder
    ext = asy.local_extrema_scan(csol)
    maxima = [e for e in ext if e.kind == "max"]
    if not maxima:
        return _vacuous(name, stmt, "v has no local maxima")
    n = ctx.sol.n
    bound_ok = all(e.meets_bound for e in maxima)
    C = exact.separatrix_amplitude(n, prof.k_infinity)
    measured = {"maxima": len(maxima), "all_meet_bound": bound_ok,
                "min_max_value": min(e.v for e in maxima)}
    thresholds = {"separatrix_match": THRESHOLDS["separatrix_match"],
                  "separatrix_profile": THRESHOLDS["separatrix_profile"]}
    prov = {"maxima": "asymptotics.local_extrema_scan on the cylinder picture"}
    ok = bound_ok
    # the profile statement only concerns solutions with P(u) = 0
    p_zero = (ctx.poh.limit_status == "Converged" and abs(ctx.poh.limit_estimate) <= ctx.zero_tol)
    near = [e for e in maxima if abs(e.v - C) <= THRESHOLDS["separatrix_match"] * C]
    measured["P_zero"] = p_zero
    if near and p_zero:
        e = near[-1]
        t = np.linspace(-1.0, 1.0, 201)
        s = e.s + t
        inside = (s >= csol.s[0]) & (s <= csol.s[-1])
        v, _ = csol.interpolate(s[inside])
        ref, _ = exact.cosh_separatrix(n, prof.k_infinity, t[inside])
        err = float(np.max(np.abs(v - ref)) / C)
        measured.update(separatrix_error=err, separatrix_s=e.s)
        prov["separatrix_error"] = "sup |v(s_j + t) - C cosh(t)^-m| / C on |t| <= 1"
        ok = ok and err <= THRESHOLDS["separatrix_profile"]
    return CheckOutcome(name, PASS if ok else FAIL, stmt, measured, thresholds, prov)


CATALOGUE: dict[str, Callable[[Pipeline], CheckOutcome]] = {
    "THM_A": check_thm_a,
    "THM_B_SIGN": check_thm_b_sign,
    "THM_B_FAST": check_thm_b_fast,
    "THM_C_DICHOTOMY": check_thm_c,
    "THM_D": check_thm_d,
    "THM_215_LOG": check_thm_215,
    "APP_A1_BOUNDS": check_a1_bounds,
    "APP_A1_C0": check_a1_c0,
    "POHOZAEV_IDENTITY": check_pohozaev_identity,
    "DELAUNAY_LIMIT": check_delaunay_limit,
}


# -- running ----------------------------------------------------------------------

def _solution_summary(ctx: Pipeline) -> dict:
    sol = ctx.sol
    out = {"status": sol.status.to_dict(), "r_start": float(sol.r[0]), "r_end": sol.r_end,
           "points": int(sol.r.size), "h0": sol.h0, "regular": sol.regular,
           "u_start": float(sol.u[0]), "u_end": float(sol.u[-1]),
           "tolerances": {"rel_tol": sol.rel_tol, "abs_tol": sol.abs_tol}}
    if ctx.shooting is not None:
        out["shooting"] = ctx.shooting
    return out


def run_scenario(s: Scenario) -> VerificationReport:
    """Run the pipeline once and evaluate every requested check.

    Only malformed scenarios raise; solver or analysis failures become an
    Inconclusive report, and a failing check never stops the others.
    """
    s.validate()
    try:
        ctx = solve(s)
    except (solver.SolverError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        checks = [_inconclusive(c, "", f"SolverError: {exc}") for c in s.checks]
        return VerificationReport(s.to_dict(), checks, {}, {}, {}, error=str(exc))
    checks = []
    for name in s.checks:
        try:
            checks.append(CATALOGUE[name](ctx))
        except asy.InsufficientTail as exc:
            checks.append(_inconclusive(name, "", f"InsufficientTail: {exc}"))
    extras = {"lemma24": ctx.lemma24.to_dict(), "thresholds": dict(THRESHOLDS)}
    return VerificationReport(s.to_dict(), checks, _solution_summary(ctx),
                              ctx.poh.to_dict(), ctx.asy.to_dict(), extras)


# -- sweeps -----------------------------------------------------------------------

_TOP_FIELDS = ("n", "r_max", "rel_tol", "abs_tol")


def with_value(base: Scenario, path: str, value: float) -> Scenario:
    """Copy of ``base`` with the numeric field at ``path`` replaced.

    Paths: n, r_max, rel_tol, abs_tol, initial.u0, initial.bracket.0|1,
    initial.cylinder.<key>, profile.params.<name>.
    """
    parts = path.split(".")
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ScenarioError(f"sweep value {value!r} is not numeric")
    if len(parts) == 1 and parts[0] in _TOP_FIELDS:
        if parts[0] == "n":
            if float(value) != int(value):
                raise ScenarioError("n must be an integer")
            value = int(value)
        return replace(base, **{parts[0]: value})
    init = base.initial
    if parts[0] == "initial" and len(parts) >= 2:
        if parts[1] == "u0" and len(parts) == 2 and init.u0 is not None:
            return replace(base, initial=replace(init, u0=float(value)))
        if parts[1] == "bracket" and len(parts) == 3 and init.bracket is not None \
                and parts[2] in ("0", "1"):
            b = list(init.bracket)
            b[int(parts[2])] = float(value)
            return replace(base, initial=replace(init, bracket=tuple(b)))
        if parts[1] == "cylinder" and len(parts) == 3 and init.cylinder is not None \
                and parts[2] in ("s0", "v0", "vprime0", "s_min"):
            c = dict(init.cylinder)
            c[parts[2]] = float(value)
            return replace(base, initial=replace(init, cylinder=c))
    if parts[0] == "profile" and len(parts) == 3 and parts[1] == "params" \
            and isinstance(base.profile, dict) and parts[2] in base.profile.get("params", {}):
        prof = copy.deepcopy(base.profile)
        prof["params"][parts[2]] = float(value)
        return replace(base, profile=prof)
    raise ScenarioError(f"invalid sweep path {path!r}")


@dataclass
class SweepResult:
    axis: str
    values: list
    reports: list[VerificationReport]

    def summary_header(self) -> list[str]:
        names = list(self.reports[0].scenario["checks"]) if self.reports else []
        return (["index", "value", "overall", "status", "decay_class", "kappa", "P",
                 "P_uncertainty", "completeness", "volume"] + names)

    def summary_rows(self) -> list[list]:
        rows = []
        for i, (v, rep) in enumerate(zip(self.values, self.reports)):
            dec = rep.asymptotics.get("decay", {})
            row = [i, float(v), rep.overall,
                   rep.solution.get("status", {}).get("kind", "Error"),
                   dec.get("class", asy.UNDETERMINED),
                   _nan(dec.get("kappa")), _nan(rep.pohozaev.get("limit_estimate")),
                   _nan(rep.pohozaev.get("uncertainty")),
                   rep.asymptotics.get("completeness", {}).get("class", asy.UNDETERMINED),
                   rep.asymptotics.get("volume", {}).get("class", asy.UNDETERMINED)]
            row += [c.outcome for c in rep.checks]
            rows.append(row)
        return rows


def _nan(x):
    return math.nan if x is None else float(x)


def sweep(base: Scenario, axis: str, values: Sequence[float], jobs: int = 1) -> SweepResult:
    """Independent runs of ``base`` with ``axis`` set to each value, in input order."""
    values = list(values)
    scenarios = [replace(with_value(base, axis, v), name=f"{base.name}[{i}]")
                 for i, v in enumerate(values)]
    if not scenarios:
        return SweepResult(axis, [], [])
    picklable = not isinstance(base.profile, curvature.CurvatureProfile)
    if jobs > 1 and picklable and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run_scenario, scenarios))
    else:
        reports = [run_scenario(s) for s in scenarios]
    return SweepResult(axis, values, reports)
