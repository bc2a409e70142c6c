"""Closed-form solutions for constant curvature, used as oracles.

Bubble: the round-sphere solution of the radial equation.
Constant cylinder: the fixed point of the cylinder equation.
Cosh separatrix: the bubble seen in cylinder coordinates s = ln r.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


def sphere_area(n: int) -> float:
    """Volume of the unit sphere S^(n-1) in R^n, 2 pi^(n/2) / Gamma(n/2).

    Gamma at integers and half-integers is expanded by recursion.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    # Gamma(n/2) by downward recursion to Gamma(1) = 1 or Gamma(1/2) = sqrt(pi)
    if n % 2 == 0:
        g, x = 1.0, 1.0
    else:
        g, x = math.sqrt(math.pi), 0.5
    while x < n / 2:
        g *= x
        x += 1.0
    return 2.0 * math.pi ** (n / 2) / g


def half_dim(n: int) -> float:
    """m = (n - 2) / 2, the cylinder mass."""
    return (n - 2) / 2


def critical_power(n: int) -> float:
    return (n + 2) / (n - 2)


def _check_n(n):
    if int(n) != n or n < 3:
        raise ValueError("n must be an integer >= 3")


class ExactKind(str, enum.Enum):
    BUBBLE = "Bubble"
    CONSTANT_CYLINDER = "ConstantCylinder"
    COSH_SEPARATRIX = "CoshSeparatrix"


@dataclass(frozen=True)
class ExactSolution:
    kind: ExactKind
    n: int
    k_infinity: float
    parameter: float = 1.0   # lambda for the bubble, shift for the separatrix

    def radial(self, r):
        """(u, u') in the radial picture."""
        if self.kind is ExactKind.BUBBLE:
            return bubble(self.n, self.k_infinity, self.parameter, r)
        r = np.asarray(r, dtype=float)
        m = half_dim(self.n)
        s = np.log(r)
        if self.kind is ExactKind.CONSTANT_CYLINDER:
            v = np.full_like(r, constant_cylinder(self.n, self.k_infinity))
            vp = np.zeros_like(r)
        else:
            v, vp = cosh_separatrix(self.n, self.k_infinity, s, self.parameter)
        u = r ** (-m) * v
        return u, r ** (-m - 1) * (vp - m * v)

    def cylinder(self, s):
        """(v, v') in the cylinder picture."""
        s = np.asarray(s, dtype=float)
        if self.kind is ExactKind.CONSTANT_CYLINDER:
            return (np.full_like(s, constant_cylinder(self.n, self.k_infinity)),
                    np.zeros_like(s))
        shift = math.log(self.parameter) if self.kind is ExactKind.BUBBLE else self.parameter
        return cosh_separatrix(self.n, self.k_infinity, s, shift)


def bubble_height(n: int, K: float, lam: float) -> float:
    """u(0) of the bubble with scale lam."""
    return (n * (n - 2) / K) ** ((n - 2) / 4) * lam ** (-(n - 2) / 2)


def bubble_scale(n: int, K: float, u0: float) -> float:
    """Inverse of bubble_height: the lam with u(0) = u0."""
    c = (n * (n - 2) / K) ** ((n - 2) / 4)
    return (c / u0) ** (2 / (n - 2))


def bubble(n: int, K: float, lam: float, r):
    """u(r) = (n(n-2)/K)^((n-2)/4) (lam / (lam^2 + r^2))^((n-2)/2) and u'(r)."""
    _check_n(n)
    if K <= 0 or lam <= 0:
        raise ValueError("K and lambda must be positive")
    r = np.asarray(r, dtype=float)
    m = half_dim(n)
    amp = (n * (n - 2) / K) ** ((n - 2) / 4) * lam ** m
    q = lam * lam + r * r
    u = amp * q ** (-m)
    up = -2 * m * amp * r * q ** (-m - 1)
    return u, up


def bubble_second_derivative(n: int, K: float, lam: float, r):
    r = np.asarray(r, dtype=float)
    m = half_dim(n)
    amp = (n * (n - 2) / K) ** ((n - 2) / 4) * lam ** m
    q = lam * lam + r * r
    return -2 * m * amp * q ** (-m - 1) + 4 * m * (m + 1) * amp * r * r * q ** (-m - 2)


def bubble_tail_constant(n: int, K: float, lam: float) -> float:
    """lim r^(n-2) u(r) for the bubble."""
    return (n * (n - 2) / K) ** ((n - 2) / 4) * lam ** ((n - 2) / 2)


def constant_cylinder(n: int, K: float) -> float:
    """The positive constant v with m^2 v = K v^((n+2)/(n-2))."""
    _check_n(n)
    if K <= 0:
        raise ValueError("K must be positive")
    return ((n - 2) ** 2 / (4 * K)) ** ((n - 2) / 4)


def separatrix_amplitude(n: int, K: float) -> float:
    """C = (n(n-2)/(4K))^((n-2)/4), the peak of the cosh separatrix."""
    return (n * (n - 2) / (4 * K)) ** ((n - 2) / 4)


def cosh_separatrix(n: int, K: float, s, shift: float = 0.0):
    """v(s) = C cosh(s - shift)^(-(n-2)/2) and v'(s)."""
    _check_n(n)
    if K <= 0:
        raise ValueError("K must be positive")
    s = np.asarray(s, dtype=float)
    m = half_dim(n)
    c = separatrix_amplitude(n, K)
    x = s - shift
    # cosh^-m computed via exp to stay finite for large |x|
    ax = np.abs(x)
    sech = 2.0 * np.exp(-ax) / (1.0 + np.exp(-2.0 * ax))
    v = c * sech ** m
    vp = -m * np.tanh(x) * v
    return v, vp


def cosh_separatrix_second_derivative(n: int, K: float, s, shift: float = 0.0):
    v, _ = cosh_separatrix(n, K, s, shift)
    m = half_dim(n)
    t = np.tanh(np.asarray(s, dtype=float) - shift)
    return -m * v * (1 - (m + 1) * t * t)


def radial_residual(n: int, K, r, u, up, upp):
    """Relative residual of u'' + (n-1)/r u' + K u^p, scaled by the term magnitudes."""
    p = critical_power(n)
    terms = (upp, (n - 1) / r * up, K * u ** p)
    total = terms[0] + terms[1] + terms[2]
    scale = np.abs(terms[0]) + np.abs(terms[1]) + np.abs(terms[2])
    return np.abs(total) / np.where(scale > 0, scale, 1.0)


def cylinder_residual(n: int, K, v, vpp):
    """Relative residual of v'' - m^2 v + K v^p."""
    p = critical_power(n)
    m = half_dim(n)
    terms = (vpp, -m * m * v, K * v ** p)
    total = terms[0] + terms[1] + terms[2]
    scale = np.abs(terms[0]) + np.abs(terms[1]) + np.abs(terms[2])
    return np.abs(total) / np.where(scale > 0, scale, 1.0)


def constant_cylinder_pohozaev(n: int, K: float) -> float:
    """P = -omega_n m^2 v_cyl^2 / n for the constant cylinder solution."""
    m = half_dim(n)
    return -sphere_area(n) * m * m * constant_cylinder(n, K) ** 2 / n
