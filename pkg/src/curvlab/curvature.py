"""Radial scalar curvature profiles K(r) with exact derivatives.

Every built-in family is positive and bounded away from zero outside a
compact set.  Profiles are immutable and vectorised over ``r``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

ArrayLike = float | np.ndarray


class Kind(str, enum.Enum):
    CONSTANT = "Constant"
    PLATEAU = "Plateau"
    EXP_PERTURBED = "ExpPerturbed"
    POWER_PERTURBED = "PowerPerturbed"
    CUSTOM = "Custom"


class ProfileError(ValueError):
    """Raised for malformed profile parameters or failing custom callbacks."""


def _hermite_blend(r, a, b, ya, da, yb, db):
    """Cubic Hermite segment on [a, b] and its derivative."""
    h = b - a
    t = (r - a) / h
    t2, t3 = t * t, t * t * t
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + t
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    val = h00 * ya + h10 * h * da + h01 * yb + h11 * h * db
    dh00 = (6 * t2 - 6 * t) / h
    dh10 = 3 * t2 - 4 * t + 1
    dh01 = (-6 * t2 + 6 * t) / h
    dh11 = 3 * t2 - 2 * t
    der = dh00 * ya + dh10 * da + dh01 * yb + dh11 * db
    return val, der


@dataclass(frozen=True)
class CurvatureProfile:
    """A radial curvature function with its declared structure.

    ``bounds`` holds (a^2, b^2) with a^2 <= K(r) <= b^2 for r >= ``r0``.
    ``breakpoints`` lists radii where K is only C^1; the solver restarts
    there so that no step straddles a kink in K'.
    """

    kind: Kind
    k_infinity: float | None
    params: Mapping[str, float]
    bounds: tuple[float, float]
    r0: float = 1.0
    breakpoints: tuple[float, ...] = ()
    _k: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False, compare=False)
    _dk: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False, compare=False)

    def __call__(self, r: ArrayLike) -> ArrayLike:
        return self.evaluate(r)[0]

    def derivative(self, r: ArrayLike) -> ArrayLike:
        return self.evaluate(r)[1]

    def evaluate(self, r: ArrayLike) -> tuple[ArrayLike, ArrayLike]:
        scalar = np.ndim(r) == 0
        x = np.asarray(r, dtype=float)
        if self.kind is Kind.CUSTOM:
            try:
                k = np.asarray(self._k(x), dtype=float)
                dk = np.asarray(self._dk(x), dtype=float)
            except Exception as exc:  # noqa: BLE001 - propagate as profile failure
                raise ProfileError(f"custom profile evaluation failed: {exc}") from exc
            k = np.broadcast_to(k, x.shape).copy()
            dk = np.broadcast_to(dk, x.shape).copy()
        else:
            k, dk = _EVALUATORS[self.kind](self.params, x)
        if scalar:
            return float(k), float(dk)
        return k, dk

    @property
    def is_autonomous(self) -> bool:
        """True when K is constant, so the cylinder equation is autonomous."""
        return self.kind is Kind.CONSTANT

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "params": dict(self.params)}


def _eval_constant(p, r):
    return np.full_like(r, p["k_infinity"]), np.zeros_like(r)


def _eval_plateau(p, r):
    kin, kinf, r0 = p["inner"], p["k_infinity"], p["radius"]
    r1 = 1.1 * r0
    k = np.where(r <= r0, kin, kinf).astype(float)
    dk = np.zeros_like(r)
    mid = (r > r0) & (r < r1)
    if np.any(mid):
        val, der = _hermite_blend(r[mid], r0, r1, kin, 0.0, kinf, 0.0)
        k[mid] = val
        dk[mid] = der
    return k, dk


def _eval_exp(p, r):
    kinf, amp, rate = p["k_infinity"], p["amplitude"], p["rate"]
    e = amp * np.exp(-rate * r)
    return kinf + e, -rate * e


_POWER_CAP = 0.5


def _eval_power(p, r):
    kinf, amp, ell = p["k_infinity"], p["amplitude"], p["exponent"]
    k = np.empty_like(r)
    dk = np.empty_like(r)
    outer = r >= 1.0
    ro = r[outer]
    k[outer] = kinf + amp * ro ** (-ell)
    dk[outer] = -ell * amp * ro ** (-ell - 1)
    cap = r <= _POWER_CAP
    k[cap] = kinf + amp
    dk[cap] = 0.0
    mid = ~outer & ~cap
    if np.any(mid):
        val, der = _hermite_blend(r[mid], _POWER_CAP, 1.0, kinf + amp, 0.0, kinf + amp, -ell * amp)
        k[mid] = val
        dk[mid] = der
    return k, dk


_EVALUATORS = {
    Kind.CONSTANT: _eval_constant,
    Kind.PLATEAU: _eval_plateau,
    Kind.EXP_PERTURBED: _eval_exp,
    Kind.POWER_PERTURBED: _eval_power,
}


def _require_positive(**kw):
    for name, value in kw.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise ProfileError(f"{name} must be a positive finite number, got {value!r}")


def _sampled_bounds(kind, params, r_from, r_to):
    grid = np.concatenate([np.linspace(r_from, min(r_to, r_from + 10.0), 2001),
                           np.geomspace(max(r_from, 1e-2), r_to, 2001)])
    k, _ = _EVALUATORS[kind](params, grid)
    return float(k.min()), float(k.max())


def constant(k_infinity: float) -> CurvatureProfile:
    _require_positive(k_infinity=k_infinity)
    k = float(k_infinity)
    return CurvatureProfile(Kind.CONSTANT, k, {"k_infinity": k}, (k, k), r0=1.0)


def plateau(inner: float, k_infinity: float, radius: float) -> CurvatureProfile:
    """K = inner on [0, radius], K = k_infinity beyond 1.1*radius, C^1 blend between."""
    _require_positive(inner=inner, k_infinity=k_infinity, radius=radius)
    params = {"inner": float(inner), "k_infinity": float(k_infinity), "radius": float(radius)}
    lo, hi = min(inner, k_infinity), max(inner, k_infinity)
    return CurvatureProfile(Kind.PLATEAU, float(k_infinity), params, (lo, hi),
                            r0=float(radius), breakpoints=(float(radius), 1.1 * float(radius)))


def exp_perturbed(k_infinity: float, amplitude: float, rate: float) -> CurvatureProfile:
    """K(r) = k_infinity + amplitude * exp(-rate r)."""
    _require_positive(k_infinity=k_infinity, amplitude=amplitude, rate=rate)
    params = {"k_infinity": float(k_infinity), "amplitude": float(amplitude), "rate": float(rate)}
    return CurvatureProfile(Kind.EXP_PERTURBED, float(k_infinity), params,
                            (float(k_infinity), float(k_infinity + amplitude)), r0=1.0)


def power_perturbed(k_infinity: float, amplitude: float, exponent: float) -> CurvatureProfile:
    """K(r) = k_infinity + amplitude * r**-exponent for r >= 1, capped to a constant near 0."""
    _require_positive(k_infinity=k_infinity, amplitude=amplitude, exponent=exponent)
    params = {"k_infinity": float(k_infinity), "amplitude": float(amplitude),
              "exponent": float(exponent)}
    lo, hi = _sampled_bounds(Kind.POWER_PERTURBED, params, 1.0, 1e6)
    return CurvatureProfile(Kind.POWER_PERTURBED, float(k_infinity), params, (lo, hi),
                            r0=1.0, breakpoints=(_POWER_CAP, 1.0))


def custom(k: Callable, dk: Callable, *, bounds: tuple[float, float],
           k_infinity: float | None = None, r0: float = 1.0,
           breakpoints: tuple[float, ...] = (), name: str = "custom") -> CurvatureProfile:
    """Wrap user callbacks; both must accept numpy arrays."""
    if not (0 < bounds[0] <= bounds[1]):
        raise ProfileError("bounds must satisfy 0 < a^2 <= b^2")
    return CurvatureProfile(Kind.CUSTOM, k_infinity, {"name": name}, tuple(bounds), r0=r0,
                            breakpoints=tuple(breakpoints), _k=k, _dk=dk)


_BUILDERS = {
    Kind.CONSTANT: (constant, ("k_infinity",)),
    Kind.PLATEAU: (plateau, ("inner", "k_infinity", "radius")),
    Kind.EXP_PERTURBED: (exp_perturbed, ("k_infinity", "amplitude", "rate")),
    Kind.POWER_PERTURBED: (power_perturbed, ("k_infinity", "amplitude", "exponent")),
}


def from_dict(spec: Mapping) -> CurvatureProfile:
    """Build a profile from ``{"kind": ..., "params": {...}}``."""
    try:
        kind = Kind(spec["kind"])
    except (KeyError, ValueError):
        raise ProfileError(f"unknown profile kind {spec.get('kind')!r}") from None
    if kind is Kind.CUSTOM:
        raise ProfileError("Custom profiles are only available through the library API")
    builder, names = _BUILDERS[kind]
    params = dict(spec.get("params", {}))
    missing = [k for k in names if k not in params]
    extra = [k for k in params if k not in names]
    if missing or extra:
        raise ProfileError(f"{kind.value} expects params {list(names)}; "
                           f"missing {missing}, unexpected {extra}")
    return builder(**{k: params[k] for k in names})


def evaluate(profile: CurvatureProfile, r: float) -> tuple[float, float]:
    if r < 0:
        raise ValueError("r must be non-negative")
    return profile.evaluate(float(r))


# -- structural predicates ----------------------------------------------------

@dataclass(frozen=True)
class ConditionResult:
    holds: bool | None
    inconclusive: bool
    evidence: dict

    def to_dict(self) -> dict:
        return {"holds": self.holds, "inconclusive": self.inconclusive, "evidence": self.evidence}


@dataclass(frozen=True)
class ConditionReport:
    integrability: ConditionResult    # (I)  r K' in L^m outside the unit ball
    log_decay: ConditionResult        # (II) |K'| <= C / (r (ln r)^(1+eps))
    sign_constancy: ConditionResult   # (III) r K' of one sign on the tail

    @property
    def inconclusive(self) -> bool:
        return any(c.inconclusive for c in (self.integrability, self.log_decay, self.sign_constancy))

    @property
    def any_holds(self) -> bool:
        return any(c.holds for c in (self.integrability, self.log_decay, self.sign_constancy))

    def to_dict(self) -> dict:
        return {"I": self.integrability.to_dict(), "II": self.log_decay.to_dict(),
                "III": self.sign_constancy.to_dict(), "inconclusive": self.inconclusive}


SLOPE_MARGIN = 0.05
FIT_RESIDUAL_MAX = 0.5


def _tail_grid(lo: float, hi: float, per_decade: int = 64) -> np.ndarray:
    count = max(int(math.ceil(per_decade * math.log10(hi / lo))) + 1, 8)
    return np.geomspace(lo, hi, count)


def check_lemma24_conditions(profile: CurvatureProfile, n: int, m: float = 2.0,
                             eps: float = 0.5, r_max: float = 1e6) -> ConditionReport:
    """Decide the three alternative hypotheses under which the Pohozaev number exists.

    (I) fits the log-slope of |r K'|^m r^(n-1) over the final decade and
    requires slope < -1 - SLOPE_MARGIN.  (II) estimates the constant C and
    requires it not to grow over the final decade.  (III) counts sign
    changes of r K' from 10*r0 outward.
    """
    if m <= 1 or eps <= 0:
        raise ValueError("need m > 1 and eps > 0")
    if r_max < 10 * profile.r0:
        raise ValueError(f"r_max={r_max} does not reach the tail regime (need >= 10*r0)")

    # (I)
    last = _tail_grid(r_max / 10, r_max)
    _, dk = profile.evaluate(last)
    f = np.abs(last * dk) ** m * last ** (n - 1)
    positive = f > 1e-300
    if not np.any(positive):
        integ = ConditionResult(True, False, {"slope": -math.inf, "residual": 0.0,
                                              "reason": "integrand vanishes on the tail"})
    elif positive.sum() < 8:
        integ = ConditionResult(None, True, {"reason": "too few non-zero tail samples"})
    else:
        x, y = np.log(last[positive]), np.log(f[positive])
        slope, icpt = np.polyfit(x, y, 1)
        resid = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
        bad = resid > FIT_RESIDUAL_MAX
        integ = ConditionResult(None if bad else bool(slope < -1 - SLOPE_MARGIN), bad,
                                {"slope": float(slope), "residual": resid, "m": m})

    # (II)
    start = max(10 * profile.r0, math.e)
    tail = _tail_grid(start, r_max)
    _, dk = profile.evaluate(tail)
    g = np.abs(dk) * tail * np.log(tail) ** (1 + eps)
    split = tail >= r_max / 10
    c_early = float(g[~split].max()) if np.any(~split) else 0.0
    c_late = float(g[split].max())
    holds2 = c_late <= c_early * (1 + 1e-9) or c_late == 0.0
    logdec = ConditionResult(bool(holds2), False,
                             {"C_estimate": max(c_early, c_late), "C_final_decade": c_late,
                              "eps": eps})

    # (III)
    rdk = tail * dk
    scale = float(np.abs(rdk).max())
    signs = np.sign(rdk[np.abs(rdk) > 1e-14 * scale]) if scale > 0 else np.array([])
    changes = int(np.count_nonzero(np.diff(signs))) if signs.size else 0
    sign = 0 if signs.size == 0 else int(signs[-1])
    sgn = ConditionResult(changes == 0, False, {"sign_changes": changes, "tail_sign": sign,
                                                "tail_start": start,
                                                "note": "K bounds alpha, beta not checked; "
                                                        "K > 0 assumed"})
    return ConditionReport(integ, logdec, sgn)


def exp_lower_bound(profile: CurvatureProfile, r_from: float | None = None,
                    r_to: float = 1e3) -> tuple[bool, float, float]:
    """Test K'(r) >= -C exp(-c r) on [r_from, r_to]; returns (holds, C, c).

    Where K' is non-negative on the whole range the bound holds with C = 0.
    Otherwise the negative part is fitted as an exponential in r.
    """
    lo = profile.r0 if r_from is None else r_from
    r = np.linspace(lo, r_to, 4001)
    _, dk = profile.evaluate(r)
    neg = np.maximum(-dk, 0.0)
    active = neg > 1e-300
    if not np.any(active):
        return True, 0.0, 1.0
    if active.sum() < 16:
        return True, float(neg.max() * math.exp(lo)), 1.0
    x, y = r[active], np.log(neg[active])
    slope, icpt = np.polyfit(x, y, 1)
    if slope >= 0:
        return False, math.inf, 0.0
    rate = -float(slope)
    # tightest C for this rate, in log space to stay finite at large r
    lead = y + rate * x
    c_const = float(np.exp(lead.max()))
    # exponential decay must dominate, not merely fit on average
    spread = float(lead.max() - lead.min())
    return bool(rate > 1e-3 and spread < math.log(1e3)), c_const, rate
