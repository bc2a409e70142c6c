"""Radial and cylinder integrators for Delta u + K u^((n+2)/(n-2)) = 0.

The radial picture integrates

    u'' + (n-1)/r u' + K(r) u^p = 0,      u(0) = u0, u'(0) = 0,

and the cylinder picture (v(s) = e^(m s) u(e^s), m = (n-2)/2) integrates

    v'' = m^2 v - K(e^s) v^p.

Both use an embedded Dormand-Prince 8(5,3) pair stepped by hand so that
zero crossings, overflow and step-size collapse are detected per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.integrate import DOP853

from .curvature import CurvatureProfile, ProfileError
from .exact import critical_power, half_dim

OVERFLOW = 1e12
UNDERFLOW_FACTOR = 1e-13
PER_DECADE = 64
DEFAULT_RMAX = 1e6
# The stepper's local tolerance is this fraction of the requested one: fast
# tails amplify local errors by roughly (r / lambda)^(n-2).
LOCAL_SAFETY = 1e-2
_MIN_RTOL = 2.3e-14      # DOP853 refuses rtol below 100 * machine epsilon


class SolverError(RuntimeError):
    pass


class EmptyRangeError(SolverError):
    pass


@dataclass(frozen=True)
class Status:
    """Termination status; ``at`` is r_cross, r_blow or r_fail (or s in the cylinder picture)."""

    kind: str
    at: float | None = None

    REACHED = "ReachedRmax"
    CROSSED = "CrossedZero"
    OVERFLOW = "Overflow"
    UNDERFLOW = "StepUnderflow"

    @property
    def positive(self) -> bool:
        return self.kind == self.REACHED

    def to_dict(self) -> dict:
        return {"kind": self.kind, "at": self.at}


def _odd_power(x, p):
    return np.sign(x) * np.abs(x) ** p


def _hermite5(x, y, dy, ddy, xq):
    """Quintic Hermite interpolation through (y, y', y'') at nodes; value and derivative."""
    xq = np.asarray(xq, dtype=float)
    idx = np.clip(np.searchsorted(x, xq, side="right") - 1, 0, len(x) - 2)
    x0, x1 = x[idx], x[idx + 1]
    h = x1 - x0
    t = (xq - x0) / h
    t2, t3, t4, t5 = t * t, t ** 3, t ** 4, t ** 5
    h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
    h1 = t - 6 * t3 + 8 * t4 - 3 * t5
    h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5)
    h5 = 10 * t3 - 15 * t4 + 6 * t5
    h4 = -4 * t3 + 7 * t4 - 3 * t5
    h3 = 0.5 * (t3 - 2 * t4 + t5)
    d0 = -30 * t2 + 60 * t3 - 30 * t4
    d1 = 1 - 18 * t2 + 32 * t3 - 15 * t4
    d2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4)
    d5 = 30 * t2 - 60 * t3 + 30 * t4
    d4 = -12 * t2 + 28 * t3 - 15 * t4
    d3 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4)
    ya, yb = y[idx], y[idx + 1]
    da, db = dy[idx] * h, dy[idx + 1] * h
    ea, eb = ddy[idx] * h * h, ddy[idx + 1] * h * h
    val = h0 * ya + h1 * da + h2 * ea + h5 * yb + h4 * db + h3 * eb
    der = (d0 * ya + d1 * da + d2 * ea + d5 * yb + d4 * db + d3 * eb) / h
    return val, der


@dataclass
class RadialSolution:
    """Trajectory (r, u, u') of the radial equation.

    ``h0`` is the series-start radius; regular solutions have r[0] = 0.
    Solutions pulled back from the cylinder picture start at r[0] > 0
    and have ``regular = False``.
    """

    n: int
    profile: CurvatureProfile
    r: np.ndarray
    u: np.ndarray
    up: np.ndarray
    status: Status
    rel_tol: float
    abs_tol: float
    h0: float = 0.0
    regular: bool = True

    @property
    def m(self) -> float:
        return half_dim(self.n)

    @property
    def p(self) -> float:
        return critical_power(self.n)

    @property
    def r_end(self) -> float:
        return float(self.r[-1])

    @property
    def anchor(self) -> float:
        """Smallest radius at which Pohozaev quantities are considered reliable."""
        if self.regular:
            return min(10 * self.h0, self.r_end) if self.h0 > 0 else self.r_end
        return float(self.r[0])

    @cached_property
    def upp(self) -> np.ndarray:
        k = np.asarray(self.profile(self.r), dtype=float)
        out = np.empty_like(self.r)
        nz = self.r > 0
        out[nz] = -(self.n - 1) / self.r[nz] * self.up[nz] - k[nz] * _odd_power(self.u[nz], self.p)
        # l'Hopital at the regular centre
        out[~nz] = -k[~nz] * _odd_power(self.u[~nz], self.p) / self.n
        return out

    def interpolate(self, x):
        """(u, u') at arbitrary radii inside the grid range."""
        x = np.asarray(x, dtype=float)
        if np.any(x < self.r[0] * (1 - 1e-14)) or np.any(x > self.r[-1] * (1 + 1e-14)):
            raise ValueError(f"radius outside solution range [{self.r[0]}, {self.r[-1]}]")
        if len(self.r) == 1:
            return np.full_like(x, self.u[0]), np.full_like(x, self.up[0])
        u, _ = _hermite5(self.r, self.u, self.up, self.upp, x)
        up, _ = _hermite5(self.r, self.up, self.upp, self._uppp, x)
        return u, up

    @cached_property
    def _uppp(self) -> np.ndarray:
        # third derivative by differentiating the ODE
        k, dk = self.profile.evaluate(self.r)
        k, dk = np.asarray(k), np.asarray(dk)
        p = self.p
        upow = _odd_power(self.u, p)
        ucub = np.abs(self.u) ** (p - 1)
        out = np.empty_like(self.r)
        nz = self.r > 0
        r = self.r[nz]
        out[nz] = ((self.n - 1) / r ** 2 * self.up[nz] - (self.n - 1) / r * self.upp[nz]
                   - dk[nz] * upow[nz] - k[nz] * p * ucub[nz] * self.up[nz])
        # u''' -> -K'(0) u0^p * 2/(n+1) at the centre
        out[~nz] = -dk[~nz] * upow[~nz] * 2 / (self.n + 1)
        return out

    def log_grid(self, per_decade: int = PER_DECADE, start: float | None = None) -> np.ndarray:
        """Log-uniform radii aligned to powers of ten within [start, r_end]."""
        lo = self.anchor if start is None else start
        hi = self.r_end
        if lo <= 0 or hi <= lo:
            return np.array([], dtype=float)
        j0 = math.ceil(per_decade * math.log10(lo) - 1e-9)
        j1 = math.floor(per_decade * math.log10(hi) + 1e-9)
        grid = 10.0 ** (np.arange(j0, j1 + 1) / per_decade)
        # keep nodes that miss the ends only by rounding, then clamp them inside
        grid = grid[(grid >= lo * (1 - 1e-12)) & (grid <= hi * (1 + 1e-12))]
        return np.clip(grid, lo, hi)

    def to_dict(self) -> dict:
        return {
            "picture": "radial",
            "n": self.n,
            "profile": self.profile.to_dict(),
            "status": self.status.to_dict(),
            "tolerances": {"rel_tol": self.rel_tol, "abs_tol": self.abs_tol},
            "h0": self.h0,
            "regular": self.regular,
            "r": self.r.tolist(),
            "u": self.u.tolist(),
            "uprime": self.up.tolist(),
        }


@dataclass
class CylinderSolution:
    """Trajectory (s, v, v') of the cylinder equation."""

    n: int
    profile: CurvatureProfile
    s: np.ndarray
    v: np.ndarray
    vp: np.ndarray
    status: Status
    rel_tol: float
    abs_tol: float
    meta: dict = field(default_factory=dict)

    @property
    def m(self) -> float:
        return half_dim(self.n)

    @property
    def p(self) -> float:
        return critical_power(self.n)

    def curvature(self, s):
        return self.profile(np.exp(np.asarray(s, dtype=float)))

    @cached_property
    def vpp(self) -> np.ndarray:
        k = np.asarray(self.curvature(self.s), dtype=float)
        return self.m ** 2 * self.v - k * _odd_power(self.v, self.p)

    @cached_property
    def _vppp(self) -> np.ndarray:
        r = np.exp(self.s)
        k, dk = self.profile.evaluate(r)
        p = self.p
        return (self.m ** 2 * self.vp - np.asarray(dk) * r * _odd_power(self.v, p)
                - np.asarray(k) * p * np.abs(self.v) ** (p - 1) * self.vp)

    def interpolate(self, x):
        x = np.asarray(x, dtype=float)
        span = max(1.0, abs(self.s[0]), abs(self.s[-1]))
        if np.any(x < self.s[0] - 1e-12 * span) or np.any(x > self.s[-1] + 1e-12 * span):
            raise ValueError(f"s outside solution range [{self.s[0]}, {self.s[-1]}]")
        if len(self.s) == 1:
            return np.full_like(x, self.v[0]), np.full_like(x, self.vp[0])
        v, _ = _hermite5(self.s, self.v, self.vp, self.vpp, x)
        vp, _ = _hermite5(self.s, self.vp, self.vpp, self._vppp, x)
        return v, vp

    def hamiltonian(self) -> np.ndarray:
        """1/2 v'^2 - 1/2 m^2 v^2 + (n-2)/(2n) K v^(2n/(n-2)) along the grid."""
        k = np.asarray(self.curvature(self.s), dtype=float)
        q = 2 * self.n / (self.n - 2)
        return (0.5 * self.vp ** 2 - 0.5 * self.m ** 2 * self.v ** 2
                + (self.n - 2) / (2 * self.n) * k * np.abs(self.v) ** q)

    def to_dict(self) -> dict:
        return {
            "picture": "cylinder",
            "n": self.n,
            "profile": self.profile.to_dict(),
            "status": self.status.to_dict(),
            "tolerances": {"rel_tol": self.rel_tol, "abs_tol": self.abs_tol},
            "s": self.s.tolist(),
            "v": self.v.tolist(),
            "vprime": self.vp.tolist(),
        }


def _check_tolerances(rel_tol, abs_tol):
    if not (1e-14 < rel_tol < 1e-2):
        raise ValueError("rel_tol must lie in (1e-14, 1e-2)")
    if not (0 <= abs_tol < 1e-2):
        raise ValueError("abs_tol must lie in [0, 1e-2)")


def _check_n(n):
    if int(n) != n or n < 3:
        raise ValueError("n must be an integer >= 3")


def _bisect_root(fun, a, b, rel=1e-12, max_iter=200):
    """Bisection for a sign change of fun on [a, b] (fun(a) > 0 >= fun(b))."""
    fa = fun(a)
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        if b - a <= rel * max(abs(b), 1e-300):
            break
        fm = fun(mid)
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def _forced_grid(lo, hi, per_decade, log=True):
    if hi <= lo:
        return np.array([], dtype=float)
    if log:
        j0 = math.ceil(per_decade * math.log10(lo) - 1e-9)
        j1 = math.floor(per_decade * math.log10(hi) + 1e-9)
        g = 10.0 ** (np.arange(j0, j1 + 1) / per_decade)
    else:
        ds = math.log(10) / per_decade
        j0 = math.ceil(lo / ds - 1e-9)
        j1 = math.floor(hi / ds + 1e-9)
        g = np.arange(j0, j1 + 1) * ds
    return g[(g > lo) & (g < hi)]


def _march(rhs, t0, y0, t_end, rel_tol, abs_tol, breakpoints, forced, first_step=None):
    """Step DOP853 from t0 to t_end, restarting at breakpoints.

    Returns (t, y, status) where t/y include every accepted step and every
    forced sample point reached before termination.
    """
    stops = sorted(b for b in breakpoints if t0 < b < t_end) + [t_end]
    ts = [t0]
    ys = [np.array(y0, dtype=float)]
    dense_t: list[float] = []
    dense_y: list[np.ndarray] = []
    status = Status(Status.REACHED)
    t, y = t0, np.array(y0, dtype=float)
    forced = np.asarray(forced, dtype=float)
    fi = 0
    for stop in stops:
        if stop <= t:
            continue
        kw = {"first_step": first_step} if first_step else {}
        solver = DOP853(rhs, t, y, stop, rtol=max(LOCAL_SAFETY * rel_tol, _MIN_RTOL),
                        atol=LOCAL_SAFETY * abs_tol, **kw)
        first_step = None
        while solver.status == "running":
            solver.step()
            if solver.status == "failed":
                status = Status(Status.UNDERFLOW, float(solver.t))
                break
            t_old, t_new = solver.t_old, solver.t
            if t_new - t_old < UNDERFLOW_FACTOR * abs(t_new) and solver.status == "running":
                status = Status(Status.UNDERFLOW, float(t_new))
                break
            dense = solver.dense_output()
            y_new = solver.y
            if y_new[0] <= 0:
                tc = _bisect_root(lambda x: dense(x)[0], t_old, t_new)
                while fi < len(forced) and forced[fi] < tc:
                    if forced[fi] > t_old:
                        dense_t.append(float(forced[fi]))
                        dense_y.append(dense(forced[fi]))
                    fi += 1
                # the trajectory ends on the zero itself
                ts.append(float(tc))
                ys.append(np.array([0.0, dense(tc)[1]]))
                status = Status(Status.CROSSED, float(tc))
                break
            if not np.all(np.isfinite(y_new)) or y_new[0] > OVERFLOW:
                status = Status(Status.OVERFLOW, float(t_new))
                break
            while fi < len(forced) and forced[fi] <= t_new:
                if t_old < forced[fi] < t_new:
                    dense_t.append(float(forced[fi]))
                    dense_y.append(dense(forced[fi]))
                fi += 1
            ts.append(float(t_new))
            ys.append(np.array(y_new))
        t, y = solver.t, solver.y
        if status.kind != Status.REACHED:
            break
    t_all = np.array(ts + dense_t)
    y_all = np.array(ys + dense_y).reshape(len(t_all), 2)
    order = np.argsort(t_all, kind="stable")
    t_all, y_all = t_all[order], y_all[order]
    keep = np.concatenate([[True], np.diff(t_all) > 0])
    return t_all[keep], y_all[keep], status


def integrate_radial(n: int, profile: CurvatureProfile, u0: float,
                     r_max: float = DEFAULT_RMAX, rel_tol: float = 1e-10,
                     abs_tol: float = 0.0, per_decade: int = PER_DECADE) -> RadialSolution:
    """Integrate the regular radial solution with u(0) = u0.

    The first step of size h0 = min(1e-4, 1e-6 r_max) uses the Taylor
    series at the centre, so the (n-1)/r term is never evaluated at 0.
    """
    _check_n(n)
    _check_tolerances(rel_tol, abs_tol)
    if not (u0 > 0 and math.isfinite(u0)):
        raise ValueError("u0 must be positive")
    if r_max < 0:
        raise ValueError("r_max must be non-negative")
    if r_max == 0:
        return RadialSolution(n, profile, np.array([0.0]), np.array([float(u0)]),
                              np.array([0.0]), Status(Status.REACHED), rel_tol, abs_tol, 0.0)
    p = critical_power(n)
    k0, k1 = profile.evaluate(0.0)
    h0 = min(1e-4, r_max * 1e-6)
    a = u0 ** p
    u_h = u0 - a * (k0 * h0 ** 2 / (2 * n) + k1 * h0 ** 3 / (3 * (n + 1)))
    up_h = -a * (k0 * h0 / n + k1 * h0 ** 2 / (n + 1))

    def rhs(r, y):
        k = profile(r)
        return np.array([y[1], -(n - 1) / r * y[1] - k * _odd_power(y[0], p)])

    forced = _forced_grid(h0, r_max, per_decade)
    try:
        r, y, status = _march(rhs, h0, [u_h, up_h], r_max, rel_tol, abs_tol,
                              profile.breakpoints, forced)
    except ProfileError:
        raise
    r = np.concatenate([[0.0], r])
    u = np.concatenate([[u0], y[:, 0]])
    up = np.concatenate([[0.0], y[:, 1]])
    return RadialSolution(n, profile, r, u, up, status, rel_tol, abs_tol, h0)


def integrate_cylinder(n: int, profile: CurvatureProfile, s0: float, v0: float,
                       vprime0: float, s_max: float = math.log(DEFAULT_RMAX),
                       rel_tol: float = 1e-10, abs_tol: float = 1e-14,
                       per_decade: int = PER_DECADE,
                       s_min: float | None = None) -> CylinderSolution:
    """Integrate v'' = m^2 v - K(e^s) v^p from s0 to s_max.

    With ``s_min < s0`` the orbit is also continued backwards to s_min, so
    initial data can be given at the centre of the interval.  The returned
    status is that of the forward leg; the backward status is kept in meta.
    """
    _check_n(n)
    _check_tolerances(rel_tol, abs_tol)
    if not (v0 > 0 and math.isfinite(v0)):
        raise ValueError("v0 must be positive")
    m = half_dim(n)
    p = critical_power(n)

    def leg(sign, t_end):
        # sign = -1 integrates w(t) = v(-t), which obeys the same equation
        def rhs(t, y):
            k = profile(math.exp(sign * t))
            return np.array([y[1], m * m * y[0] - k * _odd_power(y[0], p)])

        t0 = sign * s0
        if t_end <= t0:
            return (np.array([t0]), np.array([[v0, sign * vprime0]]),
                    Status(Status.REACHED))
        breaks = sorted(sign * math.log(b) for b in profile.breakpoints if b > 0)
        forced = _forced_grid(t0, t_end, per_decade, log=False)
        return _march(rhs, t0, [v0, sign * vprime0], t_end, rel_tol, abs_tol, breaks, forced)

    s, y, status = leg(1, s_max)
    meta = {}
    if s_min is not None and s_min < s0:
        sb, yb, status_b = leg(-1, -s_min)
        # mirror the backward leg and drop its duplicate copy of s0
        s = np.concatenate([-sb[:0:-1], s])
        y = np.concatenate([yb[:0:-1] * np.array([1.0, -1.0]), y])
        at = None if status_b.at is None else -status_b.at
        meta["backward_status"] = Status(status_b.kind, at).to_dict()
    return CylinderSolution(n, profile, s, y[:, 0], y[:, 1], status, rel_tol, abs_tol,
                            meta=meta)


def cylinder_transform(sol: RadialSolution, s_min: float = -math.inf,
                       s_grid: np.ndarray | None = None) -> CylinderSolution:
    """v(s) = e^(m s) u(e^s), v'(s) = m v + e^((m+1) s) u'(e^s).

    Without ``s_grid`` the source grid points with r >= e^s_min are mapped
    one to one; with it the solution is resampled by interpolation.
    """
    m = sol.m
    lo = math.exp(s_min) if s_min > -math.inf else 0.0
    mask = (sol.r > 0) & (sol.r >= lo)
    if not np.any(mask):
        raise EmptyRangeError(f"no grid points with r >= exp({s_min})")
    if s_grid is None:
        r = sol.r[mask]
        u, up = sol.u[mask], sol.up[mask]
        s = np.log(r)
    else:
        s = np.asarray(s_grid, dtype=float)
        s = s[s >= s_min]
        if s.size == 0:
            raise EmptyRangeError("resampling grid empty")
        r = np.exp(s)
        u, up = sol.interpolate(r)
    v = r ** m * u
    vp = m * v + r ** (m + 1) * up
    status = sol.status
    if status.at is not None and status.at > 0:
        status = Status(status.kind, math.log(status.at))
    return CylinderSolution(sol.n, sol.profile, s, v, vp, status, sol.rel_tol, sol.abs_tol,
                            meta={"source": "radial", "regular": sol.regular})


def inverse_transform(sol: CylinderSolution) -> RadialSolution:
    """u(r) = r^-m v(ln r), u'(r) = r^(-m-1) (v' - m v)."""
    if sol.s.size == 0:
        raise EmptyRangeError("empty cylinder solution")
    m = sol.m
    r = np.exp(sol.s)
    u = r ** (-m) * sol.v
    up = r ** (-m - 1) * (sol.vp - m * sol.v)
    status = sol.status
    if status.at is not None:
        status = Status(status.kind, math.exp(status.at))
    return RadialSolution(sol.n, sol.profile, r, u, up, status, sol.rel_tol, sol.abs_tol,
                          h0=0.0, regular=False)


def radial_residual(sol: RadialSolution) -> np.ndarray:
    """Relative ODE residual at staggered midpoints of the interpolant."""
    if len(sol.r) < 3:
        return np.zeros(0)
    lo = max(sol.anchor, sol.r[1])
    r = sol.r[sol.r >= lo]
    mid = 0.5 * (r[1:] + r[:-1])
    u, up = sol.interpolate(mid)
    # u'' from the quintic derivative of u'
    _, upp = _hermite5(sol.r, sol.up, sol.upp, sol._uppp, mid)
    k = np.asarray(sol.profile(mid))
    terms = np.abs(upp) + np.abs((sol.n - 1) / mid * up) + np.abs(k * _odd_power(u, sol.p))
    total = upp + (sol.n - 1) / mid * up + k * _odd_power(u, sol.p)
    return np.abs(total) / np.where(terms > 0, terms, 1.0)


# -- shooting -----------------------------------------------------------------

class BracketInvalid(SolverError):
    pass


class Inconclusive(SolverError):
    pass


@dataclass
class ShootingResult:
    u0_star: float
    u0_lo: float
    u0_hi: float
    solution_lo: RadialSolution
    solution_hi: RadialSolution
    report_lo: object
    report_hi: object
    iterations: int
    converged: bool


def shoot(n: int, profile: CurvatureProfile, u0_lo: float, u0_hi: float,
          target: str | None = None, max_iter: int = 60, r_max: float = 1e4,
          rel_tol: float = 1e-10, abs_tol: float = 0.0,
          classify: Callable[[RadialSolution], object] | None = None) -> ShootingResult:
    """Bisect on the initial height for a change in decay class.

    ``target`` is the class tracked at the low end (defaults to whatever
    ``u0_lo`` produces).  A midpoint that classifies as Undetermined is
    sided by whether it crossed zero; five in a row abort the search.
    """
    if classify is None:
        from .asymptotics import analyze
        classify = analyze

    def run(u0):
        sol = integrate_radial(n, profile, u0, r_max, rel_tol, abs_tol)
        return sol, classify(sol)

    sol_lo, rep_lo = run(u0_lo)
    sol_hi, rep_hi = run(u0_hi)
    if rep_lo.decay_class == rep_hi.decay_class:
        raise BracketInvalid(f"both ends classify as {rep_lo.decay_class}")
    tgt = target or rep_lo.decay_class
    if (rep_lo.decay_class == tgt) == (rep_hi.decay_class == tgt):
        raise BracketInvalid(f"target class {tgt} does not separate the bracket")
    lo_is_target = rep_lo.decay_class == tgt
    lo, hi = float(u0_lo), float(u0_hi)
    undetermined = 0
    it = 0
    for it in range(1, max_iter + 1):
        if abs(hi - lo) < 1e-10 * max(abs(hi), abs(lo)):
            it -= 1
            break
        mid = 0.5 * (lo + hi)
        sol, rep = run(mid)
        if rep.decay_class == "Undetermined":
            undetermined += 1
            if undetermined >= 5:
                raise Inconclusive(f"classification undetermined 5 times in a row near u0={mid}")
            is_target = (sol.status.kind == Status.CROSSED) == (tgt == "Crossed")
        else:
            undetermined = 0
            is_target = rep.decay_class == tgt
        if is_target == lo_is_target:
            lo, sol_lo, rep_lo = mid, sol, rep
        else:
            hi, sol_hi, rep_hi = mid, sol, rep
    converged = abs(hi - lo) < 1e-10 * max(abs(hi), abs(lo))
    return ShootingResult(0.5 * (lo + hi), lo, hi, sol_lo, sol_hi, rep_lo, rep_hi, it,
                          converged)
