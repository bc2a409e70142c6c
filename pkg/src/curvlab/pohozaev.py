"""Pohozaev functional in volume, surface and cylinder form, and its limit.

For a radial solution the surface form reduces to

    P(u, r) = w_n r^(n-1) [ r/2 u'^2 + (n-2)/(2n) r K u^(2n/(n-2)) + (n-2)/2 u u' ]

and the volume form to

    (n-2)/(2n) w_n int_0^r t^n K'(t) u^(2n/(n-2)) dt,

where w_n is the area of the unit sphere S^(n-1).  Along any solution the
difference of the two is constant; for regular solutions it is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import quadrature
from .exact import sphere_area
from .solver import CylinderSolution, RadialSolution


@dataclass(frozen=True)
class LimitThresholds:
    variation: float = 1e-3     # total-variation floor for Converged
    log_slope: float = 0.05     # |P| growth rate for Diverging
    min_samples: int = 16
    decades: float = 2.0

    def to_dict(self) -> dict:
        return {"variation": self.variation, "log_slope": self.log_slope,
                "min_samples": self.min_samples, "decades": self.decades}


DEFAULT_LIMIT = LimitThresholds()


def identity_tolerance(sol: RadialSolution) -> float:
    return max(1e-6, 100 * sol.rel_tol)


def _q(n):
    return 2 * n / (n - 2)


def surface_form(sol: RadialSolution, r):
    """P(u, r) from the boundary integral over the sphere of radius r."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("surface form needs r > 0")
    u, up = sol.interpolate(r)
    return _surface(sol, r, u, up)


def _surface(sol, r, u, up):
    n = sol.n
    k = np.asarray(sol.profile(r), dtype=float)
    bracket = (0.5 * r * up * up + (n - 2) / (2 * n) * r * k * np.abs(u) ** _q(n)
               + 0.5 * (n - 2) * u * up)
    return sphere_area(n) * r ** (n - 1) * bracket


def _volume_integrand(sol: RadialSolution):
    n = sol.n
    coef = (n - 2) / (2 * n) * sphere_area(n)

    def f(t):
        u, _ = sol.interpolate(t)
        dk = np.asarray(sol.profile.derivative(t), dtype=float)
        return coef * t ** n * dk * np.abs(u) ** _q(n)

    return f


def _quad_tol(sol):
    return max(1e-2 * sol.rel_tol, 1e-14)


def _volume_nodes(sol: RadialSolution) -> np.ndarray:
    """Grid nodes plus profile breakpoints, so no quadrature panel crosses a kink."""
    extra = [b for b in sol.profile.breakpoints if sol.r[0] < b < sol.r[-1]]
    return np.unique(np.concatenate([sol.r, extra]))


def volume_cumulative(sol: RadialSolution) -> tuple[np.ndarray, np.ndarray]:
    """Running volume form from the first grid radius; (nodes, values)."""
    cache = sol.__dict__.setdefault("_pohozaev_cache", {})
    if "volume" not in cache:
        nodes = _volume_nodes(sol)
        if sol.profile.is_autonomous:
            vals = np.zeros(nodes.size)
        else:
            vals = quadrature.cumulative(_volume_integrand(sol), nodes, rel_tol=_quad_tol(sol))
        cache["volume"] = (nodes, vals)
    return cache["volume"]


def volume_form(sol: RadialSolution, r):
    """Volume form integrated from the start of the solution (r = 0 when regular)."""
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < sol.r[0]) or np.any(r > sol.r[-1] * (1 + 1e-14)):
        raise ValueError("radius outside solution range")
    nodes, cum = volume_cumulative(sol)
    if sol.profile.is_autonomous:
        out = np.zeros(r.size)
    else:
        idx = np.clip(np.searchsorted(nodes, r, side="right") - 1, 0, nodes.size - 1)
        base = cum[idx]
        part, _ = quadrature.integrate_intervals(_volume_integrand(sol), nodes[idx],
                                                 np.minimum(r, nodes[-1]),
                                                 rel_tol=_quad_tol(sol))
        out = base + part
    return float(out[0]) if scalar else out


def cylinder_form(sol: CylinderSolution, s):
    """w_n [ v'^2/2 - m^2 v^2/2 + (n-2)/(2n) K(e^s) v^(2n/(n-2)) ]."""
    v, vp = sol.interpolate(s)
    k = np.asarray(sol.curvature(s), dtype=float)
    n = sol.n
    return sphere_area(n) * (0.5 * vp * vp - 0.5 * sol.m ** 2 * v * v
                             + (n - 2) / (2 * n) * k * np.abs(v) ** _q(n))


@dataclass
class PohozaevReport:
    r: np.ndarray
    surface: np.ndarray
    volume: np.ndarray
    residual: np.ndarray
    p0: float
    identity_residual: float
    identity_tol: float
    limit_estimate: float
    uncertainty: float
    limit_status: str
    thresholds: LimitThresholds = field(default=DEFAULT_LIMIT)

    def to_dict(self) -> dict:
        return {
            "p0": self.p0,
            "identity_residual": self.identity_residual,
            "identity_tol": self.identity_tol,
            "limit_estimate": self.limit_estimate,
            "uncertainty": self.uncertainty,
            "limit_status": self.limit_status,
            "thresholds": self.thresholds.to_dict(),
        }

    def rows(self) -> Iterable[tuple[float, float, float, float]]:
        return zip(self.r.tolist(), self.surface.tolist(), self.volume.tolist(),
                   self.residual.tolist())


def _samples(sol: RadialSolution, per_decade: int = 64):
    r = sol.log_grid(per_decade)
    if r.size == 0:
        r = sol.r[sol.r > 0]
    surf = surface_form(sol, r)
    vol = volume_form(sol, r)
    return r, surf, vol


def identity_check(sol: RadialSolution) -> float:
    """max |surface - volume - P0| over the log grid, P0 taken at the anchor radius."""
    r, surf, vol = _samples(sol)
    if r.size == 0:
        return 0.0
    p0 = surf[0] - vol[0]
    return float(np.max(np.abs(surf - vol - p0)))


def pohozaev_limit(r, values, thresholds: LimitThresholds = DEFAULT_LIMIT):
    """Extrapolate P(u) = lim P(u, r) from the final decades of samples.

    Returns (estimate, uncertainty, status) with status one of Converged,
    Oscillating, Diverging, Undetermined.
    """
    r = np.asarray(r, dtype=float)
    values = np.asarray(values, dtype=float)
    if r.size == 0:
        return math.nan, math.inf, "Undetermined"
    tail = r >= r[-1] / 10 ** thresholds.decades
    pt, rt = values[tail], r[tail]
    if pt.size < thresholds.min_samples:
        return float(values[-1]), math.inf, "Undetermined"
    mean = float(np.mean(pt))
    half_range = 0.5 * float(pt.max() - pt.min())
    dp = np.diff(pt)
    tv = float(np.sum(np.abs(dp)))
    floor = thresholds.variation * (1 + abs(mean))
    if tv < floor:
        return mean, half_range, "Converged"
    ap = np.abs(pt)
    if np.all(np.diff(ap) >= 0) and ap[0] > 0:
        slope = float(np.polyfit(np.log(rt), np.log(ap), 1)[0])
        if slope > thresholds.log_slope:
            return mean, half_range, "Diverging"
    signs = np.sign(dp[np.abs(dp) > 0])
    if signs.size > 1 and np.any(np.diff(signs) != 0) and half_range > floor:
        return mean, half_range, "Oscillating"
    return mean, half_range, "Undetermined"


def pohozaev_report(sol: RadialSolution, thresholds: LimitThresholds = DEFAULT_LIMIT,
                    per_decade: int = 64) -> PohozaevReport:
    r, surf, vol = _samples(sol, per_decade)
    if r.size == 0:
        return PohozaevReport(r, surf, vol, surf - vol, math.nan, math.nan,
                              identity_tolerance(sol), math.nan, math.inf, "Undetermined",
                              thresholds)
    resid = surf - vol
    p0 = float(resid[0])
    idres = float(np.max(np.abs(resid - p0)))
    est, unc, status = pohozaev_limit(r, surf, thresholds)
    return PohozaevReport(r, surf, vol, resid, p0, idres, identity_tolerance(sol),
                          est, unc, status, thresholds)
