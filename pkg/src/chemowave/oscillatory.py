"""Asymptotic approximations for the reciprocal density under an oscillatory drive.

With no spatial dependence the reciprocal density r = 1/u obeys the linear ODE

    r' + (beta - a*cos(omega*t)) * r = beta,    r(0) = r_star,

which is the outer problem restricted to a single characteristic when the
chemotactic slope is modulated by a cosine in time.  Four closed-form
approximations cover the corners of parameter space:

- slow modulation (omega << 1): WKB form built from the quasi-static balance,
- fast modulation (omega >> 1): two-timescale average plus periodic ripple,
- dominant chemotaxis (a >> beta): leading-order exponential of the phase,
- dominant growth (a << beta): logistic-in-r base plus first correction.

An adaptive Runge-Kutta integration of the same ODE serves as the shared
reference for error measurements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from .model import DomainError

__all__ = [
    "OscillatorySpec",
    "RegimeError",
    "REGIMES",
    "APPROXIMATIONS",
    "r_reference",
    "r_slow_wkb",
    "r_fast_multiscale",
    "r_dominant_chemotaxis",
    "r_dominant_growth",
    "u_from_r",
    "regime_select",
]


@dataclass(frozen=True)
class OscillatorySpec:
    """Parameters of r' + (beta - a*cos(omega*t)) * r = beta with r(0) = r_star.

    Parameters
    ----------
    a : float
        Amplitude of the chemotactic modulation, a >= 0.
    beta : float
        Logistic growth rate, beta > 0.
    omega : float
        Angular frequency of the modulation, omega > 0.
    r_star : float
        Initial reciprocal density r* = 1/u0; r* >= 1 so the initial
        density does not exceed carrying capacity.
    """

    a: float
    beta: float
    omega: float
    r_star: float = 1.0

    def __post_init__(self) -> None:
        if not self.beta > 0.0:
            raise DomainError("growth rate beta must be positive")
        if not self.omega > 0.0:
            raise DomainError("frequency omega must be positive")
        if self.a < 0.0:
            raise DomainError("modulation amplitude a must be nonnegative")
        if self.r_star < 1.0:
            raise DomainError(
                "r_star must be >= 1 (initial density above carrying capacity)"
            )


class RegimeError(ValueError):
    """An approximation was evaluated outside its region of validity."""


def _times(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr: np.ndarray, scalar: bool):
    return float(arr) if scalar else arr


# ===== Reference integration =====


@lru_cache(maxsize=64)
def _dense_reference(spec: OscillatorySpec, t_ceiling: float):
    """Integrate the ODE once up to t_ceiling; return the dense interpolant."""

    a, beta, omega = spec.a, spec.beta, spec.omega

    def rhs(t, r):
        return beta - (beta - a * math.cos(omega * t)) * r[0]

    sol = solve_ivp(
        rhs,
        (0.0, t_ceiling),
        [spec.r_star],
        method="DOP853",
        rtol=1e-10,
        atol=1e-12,
        dense_output=True,
    )
    if not sol.success:
        raise ArithmeticError(
            f"reference integration failed at t={sol.t[-1]:.6g}: {sol.message}"
        )
    return sol.sol


def r_reference(spec: OscillatorySpec, t):
    """Adaptive Runge-Kutta solution of the reciprocal-density ODE.

    Accepts a scalar time or an array of times, all >= 0.  The dense
    interpolant is cached per spec (rounded up to a power-of-two horizon) so
    repeated evaluation over a grid integrates once.
    """

    arr, scalar = _times(t)
    if np.any(arr < 0.0):
        raise DomainError("reference solution is defined for t >= 0")
    t_max = float(arr.max()) if arr.size else 0.0
    ceiling = 2.0 ** math.ceil(math.log2(max(t_max, 1.0)))
    dense = _dense_reference(spec, ceiling)
    out = dense(arr.ravel())[0].reshape(arr.shape)
    return _ret(out, scalar)


# ===== Closed-form approximations =====


def r_slow_wkb(spec: OscillatorySpec, t):
    """Slow-modulation approximation, intended for omega << 1.

    r ~ beta/(beta - a*cos(omega*t))
        + (r* - beta/(beta - a)) * exp(-beta*t + (a/omega)*sin(omega*t))

    Requires beta > a; otherwise the quasi-static term is singular.
    """

    if spec.beta <= spec.a:
        raise RegimeError(
            "slow-modulation form requires beta > a "
            f"(got beta={spec.beta:g}, a={spec.a:g})"
        )
    arr, scalar = _times(t)
    quasi = spec.beta / (spec.beta - spec.a * np.cos(spec.omega * arr))
    decay = (spec.r_star - spec.beta / (spec.beta - spec.a)) * np.exp(
        -spec.beta * arr + (spec.a / spec.omega) * np.sin(spec.omega * arr)
    )
    return _ret(quasi + decay, scalar)


def _logistic_base(spec: OscillatorySpec, arr: np.ndarray) -> np.ndarray:
    return 1.0 + (spec.r_star - 1.0) * np.exp(-spec.beta * arr)


def r_fast_multiscale(spec: OscillatorySpec, t):
    """Fast-modulation approximation, intended for omega >> 1.

    r ~ (r* e^{-beta t} + 1 - e^{-beta t}) * (1 + (a/omega) sin(omega t))
    """

    arr, scalar = _times(t)
    ripple = 1.0 + (spec.a / spec.omega) * np.sin(spec.omega * arr)
    return _ret(_logistic_base(spec, arr) * ripple, scalar)


def r_dominant_chemotaxis(spec: OscillatorySpec, t):
    """Leading-order approximation for a >> beta: r ~ r* e^{(a/omega) sin(omega t)}."""

    arr, scalar = _times(t)
    return _ret(spec.r_star * np.exp((spec.a / spec.omega) * np.sin(spec.omega * arr)), scalar)


def r_dominant_growth(spec: OscillatorySpec, t):
    """First-order approximation for a << beta: r ~ r0 + (a/beta) r1.

    r0 is the logistic-in-r base solution and r1 solves
    r1' + beta*r1 = beta*cos(omega*t)*r0 with r1(0) = 0.  The e^{beta t}
    factors are divided through so large times do not overflow.
    """

    arr, scalar = _times(t)
    beta, omega, rs = spec.beta, spec.omega, spec.r_star
    gamma2 = beta * beta + omega * omega
    decay = np.exp(-beta * arr)
    s, c = np.sin(omega * arr), np.cos(omega * arr)
    r1 = (
        beta * ((rs - 1.0) * gamma2 * s * decay + omega * omega * s + omega * beta * c)
        / (omega * gamma2)
        - (beta * beta / gamma2) * decay
    )
    r0 = _logistic_base(spec, arr)
    return _ret(r0 + (spec.a / beta) * r1, scalar)


# ===== Density conversion and regime routing =====


def u_from_r(r):
    """Convert reciprocal density to density, u = 1/r.

    r must be positive; values r >= 1 map into (0, 1].
    """

    arr, scalar = _times(r)
    if np.any(arr <= 0.0):
        raise DomainError("reciprocal density must be positive")
    return _ret(1.0 / arr, scalar)


REGIMES = ("slow", "fast", "dominant-chemotaxis", "dominant-growth")

APPROXIMATIONS = {
    "slow": r_slow_wkb,
    "fast": r_fast_multiscale,
    "dominant-chemotaxis": r_dominant_chemotaxis,
    "dominant-growth": r_dominant_growth,
}


def regime_select(spec: OscillatorySpec) -> tuple[str, float]:
    """Pick the regime whose small parameter is smallest.

    The scores are omega (slow), 1/omega (fast), beta/a (dominant
    chemotaxis) and a/beta (dominant growth).  Ties go to the earlier
    entry in REGIMES order.
    """

    scores = (
        spec.omega,
        1.0 / spec.omega,
        spec.beta / spec.a if spec.a > 0.0 else math.inf,
        spec.a / spec.beta,
    )
    best = 0
    for i in range(1, 4):
        if scores[i] < scores[best]:
            best = i
    return REGIMES[best], scores[best]
