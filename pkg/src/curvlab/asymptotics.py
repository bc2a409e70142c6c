"""Decay, completeness and volume classification of radial solutions.

All tail statistics are taken in the log variable s = ln r over the final
decades of the solution.  Slow-decay solutions oscillate there (their
cylinder picture is asymptotically periodic), so a plain least-squares
slope is biased by a partial period.  When the detrended tail oscillates,
statistics are instead taken between two consecutive maxima of the
detrended signal, which sit exactly one period apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .exact import critical_power, half_dim, sphere_area
from .solver import CylinderSolution, RadialSolution, Status


class InsufficientTail(ValueError):
    pass


class ClassMismatch(ValueError):
    pass


class NotALocalMin(ValueError):
    pass


FAST, SLOW, CROSSED, UNDETERMINED = "Fast", "Slow", "Crossed", "Undetermined"
COMPLETE, INCOMPLETE = "Complete", "Incomplete"
FINITE, LOG_DIVERGENT, POLY_DIVERGENT = "Finite", "LogDivergent", "PolyDivergent"


@dataclass(frozen=True)
class Calibration:
    """Every threshold used by the classifiers, serialised with each report."""

    decades: float = 2.0
    band: float = 0.10              # relative band around (n-2)/2 and n-2
    min_samples: int = 32
    per_decade: int = 64
    power_residual: float = 0.05    # rms of ln u about the fit, non-periodic tails
    stability: float = 0.02         # relative kappa change for a stable exponent
    divergent_rate: float = -0.05   # integrand growth rate in s above which integrals diverge
    convergent_rate: float = -0.25  # rate below which they converge
    poly_rate: float = 0.05         # volume integrand rate above which growth is polynomial
    harnack_stability: float = 0.05
    min_prominence: float = 1e-9

    def to_dict(self) -> dict:
        return dict(self.__dict__)


DEFAULT = Calibration()


@dataclass
class DecayFit:
    kappa: float | None
    kappa_ci: float
    decay_class: str
    window: tuple[float, float]
    locked: bool
    residual: float
    stable: bool
    reason: str = ""

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "kappa_ci95": self.kappa_ci, "class": self.decay_class,
                "window": list(self.window), "period_locked": self.locked,
                "residual": self.residual, "stable": self.stable, "reason": self.reason}


@dataclass
class Growth:
    classification: str
    slope: float
    rate: float
    increment_ratio: float
    fit_residual: float
    window: tuple[float, float]

    def to_dict(self) -> dict:
        return {"class": self.classification, "slope": self.slope, "rate": self.rate,
                "increment_ratio": self.increment_ratio, "fit_residual": self.fit_residual,
                "window": list(self.window)}


# -- tail sampling -------------------------------------------------------------

@dataclass
class _Tail:
    s: np.ndarray
    lnu: np.ndarray
    dlnu: np.ndarray    # d ln u / d ln r = r u'/u
    lo: float
    hi: float
    locked: bool
    maxima: list = field(default_factory=list)


def _tail_samples(sol: RadialSolution, lo_r: float, cal: Calibration):
    r = sol.log_grid(cal.per_decade, start=lo_r)
    if r.size and r[-1] < sol.r_end:
        r = np.append(r, sol.r_end)
    u, up = sol.interpolate(r)
    return np.log(r), np.log(u), r * up / u


def _maxima(s, d, slope_d, prominence):
    """Interior local maxima of d (from sign changes of its derivative)."""
    idx = np.nonzero((slope_d[:-1] > 0) & (slope_d[1:] <= 0))[0]
    out = []
    for i in idx:
        # linear interpolation of the derivative zero, then value by interpolation
        a, b = slope_d[i], slope_d[i + 1]
        t = a / (a - b) if a != b else 0.5
        out.append((s[i] + t * (s[i + 1] - s[i]), i))
    if len(out) < 2:
        return out
    # require a genuine dip between consecutive maxima
    keep = [out[0]]
    for sm, i in out[1:]:
        j0 = keep[-1][1]
        if d[j0:i + 2].min() < min(d[j0], d[i]) - prominence:
            keep.append((sm, i))
    return keep


def _window(sol: RadialSolution, cal: Calibration, decades: float | None = None,
            end: float | None = None) -> _Tail:
    """Tail window, period-locked when the detrended log profile oscillates."""
    dec = cal.decades if decades is None else decades
    hi_r = sol.r_end if end is None else end
    lo_r = hi_r / 10 ** dec
    floor_r = max(sol.anchor, sol.r[0] if not sol.regular else 0.0, 10 * sol.profile.r0)
    if lo_r < max(floor_r, 1e-300) * 0.999:
        raise InsufficientTail(f"tail window [{lo_r:.3g}, {hi_r:.3g}] starts inside the "
                               f"core region (needs r >= {floor_r:.3g})")
    s, y, dy = _tail_samples(sol, lo_r, cal)
    keep = s <= math.log(hi_r) + 1e-12
    s, y, dy = s[keep], y[keep], dy[keep]
    if s.size < cal.min_samples:
        raise InsufficientTail(f"only {s.size} tail samples (need {cal.min_samples})")
    slope = np.polyfit(s, y, 1)[0]
    mx = _maxima(s, y - slope * s, dy - slope, cal.min_prominence)
    if len(mx) < 2:
        # extend backwards through the remaining tail looking for a full period
        ext_lo = max(floor_r, sol.r[1] if sol.r.size > 1 else floor_r)
        if ext_lo < lo_r:
            s2, y2, dy2 = _tail_samples(sol, ext_lo, cal)
            keep = s2 <= math.log(hi_r) + 1e-12
            s2, y2, dy2 = s2[keep], y2[keep], dy2[keep]
            slope2 = np.polyfit(s2, y2, 1)[0]
            mx2 = _maxima(s2, y2 - slope2 * s2, dy2 - slope2, cal.min_prominence)
            if len(mx2) >= 2:
                s, y, dy, mx = s2, y2, dy2, mx2
    tail = _Tail(s, y, dy, float(s[0]), float(s[-1]), False)
    if len(mx) >= 2:
        tail.locked = True
        tail.maxima = [m for m, _ in mx]
    return tail


def _interp(tail: _Tail, x, values):
    return float(np.interp(x, tail.s, values))


def _refine_locked(tail: _Tail, kappa: float, prominence: float):
    """Re-detrend with kappa and return the last two same-phase points."""
    d = tail.lnu + kappa * tail.s
    mx = _maxima(tail.s, d, tail.dlnu + kappa, prominence)
    if len(mx) < 2:
        return None
    return mx[-2][0], mx[-1][0]


def _locked_points(sol: RadialSolution, tail: _Tail, cal: Calibration):
    """Consecutive same-phase points (s_a, s_b) and the secant exponent between them."""
    kappa = -float(np.polyfit(tail.s, tail.lnu, 1)[0])
    pts = None
    for _ in range(3):
        found = _refine_locked(tail, kappa, cal.min_prominence)
        if found is None:
            break
        pts = found
        sa, sb = pts
        ya = math.log(sol.interpolate(math.exp(sa))[0])
        yb = math.log(sol.interpolate(math.exp(sb))[0])
        kappa = -(yb - ya) / (sb - sa)
    return pts, kappa


# -- decay exponent ------------------------------------------------------------

def fit_decay_exponent(sol: RadialSolution, decades: float | None = None,
                       calibration: Calibration = DEFAULT) -> DecayFit:
    """Fit u ~ r^(-kappa) on the tail and classify Fast / Slow / Crossed / Undetermined."""
    cal = calibration
    if sol.status.kind == Status.CROSSED:
        return DecayFit(None, math.nan, CROSSED, (math.nan, math.nan), False, math.nan, False,
                        "solution crossed zero")
    if sol.status.kind != Status.REACHED:
        return DecayFit(None, math.nan, UNDETERMINED, (math.nan, math.nan), False, math.nan,
                        False, f"terminated with {sol.status.kind}")
    kappa, ci, tail, resid = _kappa(sol, cal, decades)
    stable = _kappa_stable(sol, cal, decades, kappa)
    n = sol.n
    reason = ""
    if not tail.locked and resid > cal.power_residual:
        cls = UNDETERMINED
        reason = "tail is not a power law"
    elif abs(kappa / (n - 2) - 1) <= cal.band:
        cls = FAST
    elif abs(kappa / half_dim(n) - 1) <= cal.band:
        cls = SLOW
    else:
        cls = UNDETERMINED
        reason = "exponent outside both bands"
    window = (math.exp(tail.lo), math.exp(tail.hi))
    return DecayFit(kappa, ci, cls, window, tail.locked, resid, stable, reason)


def _kappa(sol, cal, decades, end=None):
    tail = _window(sol, cal, decades, end)
    coef, cov = np.polyfit(tail.s, tail.lnu, 1, cov=True) if tail.s.size > 3 else (
        np.polyfit(tail.s, tail.lnu, 1), np.zeros((2, 2)))
    resid = float(np.sqrt(np.mean((tail.lnu - np.polyval(coef, tail.s)) ** 2)))
    kappa = -float(coef[0])
    ci = 1.96 * math.sqrt(max(cov[0, 0], 0.0))
    if tail.locked:
        pts, k_lock = _locked_points(sol, tail, cal)
        if pts is not None:
            kappa = k_lock
            tail.lo, tail.hi = pts
            ci = 0.0
        else:
            tail.locked = False
    return kappa, ci, tail, resid


def _kappa_stable(sol, cal, decades, kappa) -> bool:
    """Same fit one decade earlier; stable when the exponent moves by < 2%."""
    try:
        k2, _, _, _ = _kappa(sol, cal, decades, end=sol.r_end / 10)
    except InsufficientTail:
        return False
    return abs(k2 - kappa) <= cal.stability * abs(kappa)


# -- completeness and volume -----------------------------------------------------

def _integrand_growth(sol, tail_fit: DecayFit, cal, power: float, weight: float):
    """Growth rate in s of w * v^power = w * (r^m u)^power over the fit window."""
    m = half_dim(sol.n)
    lo, hi = math.log(tail_fit.window[0]), math.log(tail_fit.window[1])
    if tail_fit.locked:
        sa, sb = lo, hi
        ua = sol.interpolate(math.exp(sa))[0]
        ub = sol.interpolate(math.exp(sb))[0]
        ga = power * (m * sa + math.log(ua))
        gb = power * (m * sb + math.log(ub))
        return (gb - ga) / (sb - sa)
    s = np.linspace(lo, hi, max(cal.min_samples, 64))
    u, _ = sol.interpolate(np.exp(s))
    g = power * (m * s + np.log(u))
    return float(np.polyfit(s, g, 1)[0])


def _cumulative_on_log(sol: RadialSolution, integrand, start: float, cal: Calibration):
    """Running integral of integrand(r) dr from ``start`` sampled on the log grid."""
    grid = sol.log_grid(cal.per_decade, start=start)
    nodes = np.unique(np.concatenate([[start], grid, [sol.r_end]]))
    vals = quadrature.cumulative(integrand, nodes, rel_tol=max(1e-2 * sol.rel_tol, 1e-14))
    return nodes, vals


def _window_fit(nodes, vals, window):
    sel = (nodes >= window[0] * (1 - 1e-12)) & (nodes <= window[1] * (1 + 1e-12))
    x, y = np.log(nodes[sel]), vals[sel]
    if x.size < 3:
        return math.nan, math.nan
    coef = np.polyfit(x, y, 1)
    span = float(y.max() - y.min())
    resid = float(np.sqrt(np.mean((y - np.polyval(coef, x)) ** 2)))
    return float(coef[0]), resid / span if span > 0 else 0.0


def _secant(nodes, vals, window):
    pos = nodes > 0
    ln, vals = np.log(nodes[pos]), vals[pos]
    a = float(np.interp(math.log(window[0]), ln, vals))
    b = float(np.interp(math.log(window[1]), ln, vals))
    return (b - a) / (math.log(window[1]) - math.log(window[0]))


def length_curve(sol: RadialSolution, cal: Calibration = DEFAULT):
    """L(R) = int_1^R u^(2/(n-2)) dr on the log grid."""
    e = 2 / (sol.n - 2)
    start = max(1.0, float(sol.r[0]))

    def f(t):
        return np.abs(sol.interpolate(t)[0]) ** e

    return _cumulative_on_log(sol, f, start, cal)


def volume_curve(sol: RadialSolution, cal: Calibration = DEFAULT):
    """V(R) = w_n int_0^R u^(2n/(n-2)) r^(n-1) dr (from the first grid radius)."""
    n = sol.n
    q = 2 * n / (n - 2)
    w = sphere_area(n)

    def f(t):
        return w * np.abs(sol.interpolate(t)[0]) ** q * t ** (n - 1)

    start = float(sol.r[0])
    grid = sol.log_grid(cal.per_decade, start=max(start, sol.anchor))
    nodes = np.unique(np.concatenate([[start], sol.r[sol.r < (grid[0] if grid.size else 0)],
                                      grid, [sol.r_end]]))
    vals = quadrature.cumulative(f, nodes, rel_tol=max(1e-2 * sol.rel_tol, 1e-14))
    return nodes, vals


def _classify_rate(rate, cal, divergent, convergent, poly=None):
    if poly is not None and rate > cal.poly_rate:
        return poly
    if rate >= cal.divergent_rate:
        return divergent
    if rate <= cal.convergent_rate:
        return convergent
    return UNDETERMINED


def completeness_length(sol: RadialSolution, fit: DecayFit | None = None,
                        calibration: Calibration = DEFAULT) -> Growth:
    """Conformal length growth: Complete when L(R) grows linearly in ln R."""
    cal = calibration
    nan_window = (math.nan, math.nan)
    if sol.status.kind != Status.REACHED or sol.r_end <= 1.0:
        return Growth(UNDETERMINED, math.nan, math.nan, math.nan, math.nan, nan_window)
    try:
        fit = fit or fit_decay_exponent(sol, calibration=cal)
    except InsufficientTail:
        return Growth(UNDETERMINED, math.nan, math.nan, math.nan, math.nan, nan_window)
    if fit.kappa is None or fit.decay_class == UNDETERMINED:
        return Growth(UNDETERMINED, math.nan, math.nan, math.nan, math.nan, nan_window)
    rate = _integrand_growth(sol, fit, cal, 2 / (sol.n - 2), 1.0)
    nodes, vals = length_curve(sol, cal)
    slope, resid = _window_fit(nodes, vals, fit.window)
    if fit.locked:
        slope = _secant(nodes, vals, fit.window)
    cls = _classify_rate(rate, cal, COMPLETE, INCOMPLETE)
    return Growth(cls, slope, rate, math.exp(rate), resid, fit.window)


def total_volume(sol: RadialSolution, fit: DecayFit | None = None,
                 calibration: Calibration = DEFAULT) -> Growth:
    """Total-volume growth: Finite, LogDivergent (linear in ln R) or PolyDivergent."""
    cal = calibration
    nan_window = (math.nan, math.nan)
    if sol.status.kind != Status.REACHED:
        return Growth(UNDETERMINED, math.nan, math.nan, math.nan, math.nan, nan_window)
    try:
        fit = fit or fit_decay_exponent(sol, calibration=cal)
    except InsufficientTail:
        return Growth(UNDETERMINED, math.nan, math.nan, math.nan, math.nan, nan_window)
    if fit.kappa is None or fit.decay_class == UNDETERMINED:
        return Growth(UNDETERMINED, math.nan, math.nan, math.nan, math.nan, nan_window)
    n = sol.n
    rate = _integrand_growth(sol, fit, cal, 2 * n / (n - 2), sphere_area(n))
    nodes, vals = volume_curve(sol, cal)
    slope, resid = _window_fit(nodes, vals, fit.window)
    if fit.locked:
        slope = _secant(nodes, vals, fit.window)
    cls = _classify_rate(rate, cal, LOG_DIVERGENT, FINITE, POLY_DIVERGENT)
    return Growth(cls, slope, rate, math.exp(rate), resid, fit.window)


# -- fast-decay constant ---------------------------------------------------------

@dataclass
class C0Estimate:
    c0: float
    uncertainty: float
    direct: float
    r0: float
    tail_bound: float

    @property
    def relative_gap(self) -> float:
        return abs(self.c0 - self.direct) / abs(self.c0)

    def to_dict(self) -> dict:
        return {"c0": self.c0, "uncertainty": self.uncertainty, "direct": self.direct,
                "r0": self.r0, "tail_bound": self.tail_bound,
                "relative_gap": self.relative_gap}


def c0_limit(sol: RadialSolution, r0: float | None = None, fit: DecayFit | None = None,
             calibration: Calibration = DEFAULT) -> C0Estimate:
    """lim r^(n-2) u(r) from the flux identity

        (n-2) c0 = int_{r0}^inf K t^(n-1) u^p dt - r0^(n-1) u'(r0),

    truncated at r_max with the remainder bounded from the fitted decay.
    """
    fit = fit or fit_decay_exponent(sol, calibration=calibration)
    if fit.decay_class != FAST:
        raise ClassMismatch(f"c0 needs a fast-decay solution, got {fit.decay_class}")
    n = sol.n
    p = critical_power(n)
    if r0 is None:
        r0 = fit.window[0]
    if not (sol.r[0] < r0 < sol.r_end):
        raise ValueError("r0 outside the solution range")
    u0, up0 = sol.interpolate(r0)
    if up0 > 0:
        raise ValueError("need u'(r0) <= 0 at the tail anchor")

    def f(t):
        return np.asarray(sol.profile(t)) * t ** (n - 1) * np.abs(sol.interpolate(t)[0]) ** p

    nodes = np.unique(np.concatenate([[r0], sol.r[(sol.r > r0)]]))
    vals, _ = quadrature.integrate_intervals(f, nodes[:-1], nodes[1:],
                                             rel_tol=max(1e-2 * sol.rel_tol, 1e-14))
    integral = float(np.sum(vals))
    R = sol.r_end
    uR = float(sol.u[-1])
    kappa = fit.kappa
    e = n - 1 - kappa * p
    if e < -1:
        cR = R ** kappa * uR
        tail_central = float(sol.profile(R)) * cR ** p * R ** (e + 1) / (-(e + 1))
        tail_bound = sol.profile.bounds[1] * cR ** p * R ** (e + 1) / (-(e + 1))
    else:
        tail_central = tail_bound = math.inf
    c0 = (integral + tail_central - r0 ** (n - 1) * float(up0)) / (n - 2)
    direct = R ** (n - 2) * uR
    return C0Estimate(c0, tail_bound / (n - 2), direct, float(r0), tail_bound)


def a1_bounds(sol: RadialSolution, fit: DecayFit | None = None,
              calibration: Calibration = DEFAULT) -> tuple[float, float]:
    """(c1, c2) with c1 r^(2-n) <= u <= c2 r^(2-n) over the tail window."""
    fit = fit or fit_decay_exponent(sol, calibration=calibration)
    r = sol.log_grid(calibration.per_decade, start=fit.window[0])
    r = r[r <= fit.window[1]]
    u, _ = sol.interpolate(r)
    scaled = r ** (sol.n - 2) * u
    return float(scaled.min()), float(scaled.max())


# -- gradient ratio and omega ------------------------------------------------------

@dataclass
class HarnackRatio:
    sup: float
    argmax: float
    stable: bool
    tail_start: float

    def to_dict(self) -> dict:
        return {"sup": self.sup, "argmax": self.argmax, "stable": self.stable,
                "tail_start": self.tail_start}


def harnack_gradient_ratio(sol: RadialSolution, tail_start: float | None = None,
                           calibration: Calibration = DEFAULT) -> HarnackRatio:
    """sup of r |u'| / u over the tail; stable when the final decade does not raise it."""
    start = tail_start if tail_start is not None else max(10 * sol.profile.r0, sol.anchor)
    start = min(start, sol.r_end)
    r = sol.log_grid(calibration.per_decade, start=start)
    if r.size == 0:
        r = np.array([sol.r_end])
    u, up = sol.interpolate(r)
    with np.errstate(divide="ignore"):
        # infinite at a zero of u, which is the honest sup
        ratio = r * np.abs(up) / u
    i = int(np.argmax(ratio))
    sup = float(ratio[i])
    early = r <= sol.r_end / 10
    if np.any(early) and sup > 0:
        sup_early = float(ratio[early].max())
        stable = (sup - sup_early) <= calibration.harnack_stability * sup
    else:
        stable = False
    return HarnackRatio(sup, float(r[i]), bool(stable and math.isfinite(sup)), float(start))


@dataclass
class OmegaDiagnostic:
    r: np.ndarray
    omega: np.ndarray
    omega_prime: np.ndarray
    omega_prime_fd: np.ndarray
    max_rel_error: float
    flux_radial: np.ndarray    # w_n r^n (u' + m u / r)^2
    flux_cylinder: np.ndarray  # w_n v'(s)^2
    max_flux_gap: float

    def rows(self):
        return zip(self.r.tolist(), self.omega.tolist(), self.omega_prime.tolist(),
                   self.omega_prime_fd.tolist())


def _fornberg_weights(x0, x, order=1):
    """Finite-difference weights at x0 for the nodes x (Fornberg's recursion)."""
    n = len(x)
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def omega_diagnostic(sol: RadialSolution, calibration: Calibration = DEFAULT,
                     stencil_step: float = 1e-3) -> OmegaDiagnostic:
    """w(r) = w_n r^(n-2) u^2 with its analytic derivative checked by finite differences.

    Differences use a five-point stencil of relative width ``stencil_step``
    on the solution interpolant at each log-grid radius.  Errors are
    measured against the natural scale w(r)/r of the derivative.
    """
    n = sol.n
    m = half_dim(n)
    wn = sphere_area(n)
    r = sol.log_grid(calibration.per_decade)
    h = stencil_step * r
    inside = (r - 2 * h >= sol.r[0]) & (r + 2 * h <= sol.r_end)
    r = r[inside]
    u, up = sol.interpolate(r)
    omega = wn * r ** (n - 2) * u * u
    omega_p = 2 * wn * r ** (n - 2) * u * (up + m * u / r)
    offsets = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    wts = _fornberg_weights(0.0, offsets)
    fd = np.zeros_like(r)
    for k, off in enumerate(offsets):
        rk = r * (1 + off * stencil_step)
        uk, _ = sol.interpolate(rk)
        fd += wts[k] * wn * rk ** (n - 2) * uk * uk
    fd /= stencil_step * r
    scale = omega / r
    err = float(np.max(np.abs(fd - omega_p) / scale)) if r.size else 0.0
    flux_r = wn * r ** n * (up + m * u / r) ** 2
    vp = m * r ** m * u + r ** (m + 1) * up
    flux_c = wn * vp * vp
    gap_scale = np.maximum(np.abs(flux_c), 1e-300)
    gap = float(np.max(np.abs(flux_r - flux_c) / np.maximum(gap_scale, wn * (r ** m * u) ** 2)))
    return OmegaDiagnostic(r, omega, omega_p, fd, err, flux_r, flux_c, gap if r.size else 0.0)


# -- cylinder picture ----------------------------------------------------------------

@dataclass(frozen=True)
class Extremum:
    s: float
    kind: str
    v: float
    meets_bound: bool | None = None

    def to_dict(self) -> dict:
        return {"s": self.s, "kind": self.kind, "v": self.v, "meets_bound": self.meets_bound}


def local_extrema_scan(sol: CylinderSolution, prominence: float | None = None) -> list[Extremum]:
    """Sign changes of v' refined by bisection; maxima carry the lower-bound check.

    A maximum meets the bound when v >= (m^2 / K(e^s))^((n-2)/4), the
    value at which the potential force vanishes for the local curvature.
    """
    vp = sol.vp
    if sol.s.size < 3:
        return []
    scale = float(np.max(np.abs(sol.v)))
    prom = prominence if prominence is not None else max(1e-9 * scale, 1e-14)
    # pair consecutive nonzero slopes so an extremum sitting on a node is kept
    nz = np.nonzero(vp != 0)[0]
    flips = np.nonzero(np.sign(vp[nz[:-1]]) * np.sign(vp[nz[1:]]) < 0)[0]
    out: list[Extremum] = []
    m = sol.m
    # the starting value acts as a virtual extremum, so noise on a flat orbit is dropped
    last_v = float(sol.v[0])
    for i, j in zip(nz[flips], nz[flips + 1]):
        a, b = float(sol.s[i]), float(sol.s[j])
        fa = float(vp[i])
        for _ in range(200):
            mid = 0.5 * (a + b)
            if b - a <= 1e-13 * max(1.0, abs(mid)):
                break
            fm = float(sol.interpolate(mid)[1])
            if (fm > 0) == (fa > 0):
                a, fa = mid, fm
            else:
                b = mid
        sx = 0.5 * (a + b)
        vx = float(sol.interpolate(sx)[0])
        kind = "max" if vp[i] > 0 else "min"
        if abs(vx - last_v) < prom:
            # flat jitter: drop this pair
            if out:
                out.pop()
            last_v = out[-1].v if out else float(sol.v[0])
            continue
        bound = None
        if kind == "max":
            k = float(sol.curvature(sx))
            bound = vx >= (m * m / k) ** ((sol.n - 2) / 4) * (1 - 1e-9)
        out.append(Extremum(sx, kind, vx, bound))
        last_v = vx
    return out


def fit_linearized_tail(sol: CylinderSolution, s_center: float, window: float = 1.0,
                        normalize: bool = True, samples: int = 201):
    """Least-squares fit of a e^(-m s) + b e^(m s) to v(s_center + s) on |s| <= window.

    With ``normalize`` the data are divided by v(s_center) first.  The
    window must lie inside the solution range.  Returns (a, b, rms residual).
    """
    v_c, vp_c = sol.interpolate(s_center)
    v_c, vp_c = float(v_c), float(vp_c)
    k = float(sol.curvature(s_center))
    vpp_c = sol.m ** 2 * v_c - k * abs(v_c) ** sol.p
    if not (vpp_c > 0 and abs(vp_c) <= 1e-6 * max(abs(v_c), 1e-300) * max(sol.m, 1.0)):
        raise NotALocalMin(f"s={s_center} is not a local minimum of v "
                           f"(v'={vp_c:.3g}, v''={vpp_c:.3g})")
    if s_center - window < sol.s[0] or s_center + window > sol.s[-1]:
        raise InsufficientTail(f"window [{s_center - window}, {s_center + window}] leaves "
                               f"the solution range [{sol.s[0]}, {sol.s[-1]}]")
    s = np.linspace(-window, window, samples)
    v, _ = sol.interpolate(s_center + s)
    if normalize:
        v = v / v_c
    m = sol.m
    basis = np.column_stack([np.exp(-m * s), np.exp(m * s)])
    (a, b), *_ = np.linalg.lstsq(basis, v, rcond=None)
    resid = float(np.sqrt(np.mean((basis @ np.array([a, b]) - v) ** 2)))
    return float(a), float(b), resid


# -- aggregate ---------------------------------------------------------------------

@dataclass
class AsymptoticsReport:
    fit: DecayFit
    completeness: Growth
    volume: Growth
    c0: C0Estimate | None
    harnack: HarnackRatio
    calibration: Calibration
    note: str = ""

    @property
    def decay_class(self) -> str:
        return self.fit.decay_class

    @property
    def kappa(self):
        return self.fit.kappa

    def to_dict(self) -> dict:
        return {
            "decay": self.fit.to_dict(),
            "completeness": self.completeness.to_dict(),
            "volume": self.volume.to_dict(),
            "c0": None if self.c0 is None else self.c0.to_dict(),
            "harnack": self.harnack.to_dict(),
            "calibration": self.calibration.to_dict(),
            "note": self.note,
        }


def analyze(sol: RadialSolution, calibration: Calibration = DEFAULT) -> AsymptoticsReport:
    """Run every tail classifier once; InsufficientTail degrades to Undetermined."""
    cal = calibration
    note = ""
    try:
        fit = fit_decay_exponent(sol, calibration=cal)
    except InsufficientTail as exc:
        fit = DecayFit(None, math.nan, UNDETERMINED, (math.nan, math.nan), False, math.nan,
                       False, f"InsufficientTail: {exc}")
        note = "InsufficientTail"
    comp = completeness_length(sol, fit, cal) if fit.kappa is not None else Growth(
        UNDETERMINED, math.nan, math.nan, math.nan, math.nan, (math.nan, math.nan))
    vol = total_volume(sol, fit, cal) if fit.kappa is not None else Growth(
        UNDETERMINED, math.nan, math.nan, math.nan, math.nan, (math.nan, math.nan))
    c0 = None
    if fit.decay_class == FAST:
        try:
            c0 = c0_limit(sol, fit=fit, calibration=cal)
        except ValueError:
            c0 = None
    harn = harnack_gradient_ratio(sol, calibration=cal)
    return AsymptoticsReport(fit, comp, vol, c0, harn, cal, note)
