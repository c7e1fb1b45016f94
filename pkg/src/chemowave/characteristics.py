"""Outer (diffusion-free) solution by the method of characteristics.

With D = 0 the transport equation reduces along dx/dtau = alpha(tau, x) to

    du/dtau = u (beta (1 - u) - alpha_x),

so everything follows from the forward map F(t; s) (characteristic through
x = s at t = 0), its inverse G(t; x), and one scalar ODE along each curve.
The curve through s = 0 separates the region swept clean (u = 0, fed from
the x = 0 boundary) from the populated region, so x*(t) = F(t; 0) is the
wavefront location.

Closed forms exist for every profile family in `model`; a generic adaptive
Runge-Kutta fallback covers tabulated fields and doubles as the independent
cross-check for the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from . import model
from .model import (
    AffineSpace,
    ConstantGrowth,
    CoshProfile,
    Exponential,
    LinearInX,
    ProblemSpec,
    Quadratic,
    Separable,
    SinhProfile,
)
from .signals import Constant

__all__ = [
    "FrontBlowup",
    "BeforeFront",
    "CharacteristicsCrossed",
    "UnsupportedRegime",
    "CharacteristicSolution",
    "FrontTrajectory",
    "map_forward",
    "map_backward",
    "map_forward_rk",
    "map_backward_rk",
    "front_position",
    "front_speed",
    "front_trajectory",
    "front_plateau",
    "outer_density",
    "outer_density_small_u0",
]

# blowup denominators / branch arguments are compared against this
_EPS = 1e-14


class FrontBlowup(ArithmeticError):
    """A characteristic escapes to infinity in finite time.

    critical_time is in t units when the drive integral could be inverted,
    otherwise None; critical_T is always set (drive-integral units).
    """

    def __init__(self, critical_T: float, critical_time: Optional[float] = None):
        self.critical_T = critical_T
        self.critical_time = critical_time
        msg = f"characteristic blows up at drive integral T = {critical_T:.6g}"
        if critical_time is not None:
            msg += f" (t = {critical_time:.6g})"
        super().__init__(msg)


class BeforeFront(Exception):
    """Requested point lies left of the separating characteristic (u = 0)."""


class CharacteristicsCrossed(ArithmeticError):
    """Characteristics of a tabulated field crossed; the outer map is invalid."""


class UnsupportedRegime(ValueError):
    """A shortcut formula was requested outside its validity preconditions."""


# ===== closed-form one-parameter flows =====
#
# Each helper advances z by an "effective time" dT and raises FrontBlowup
# when the trajectory escapes within dT.  They are written for scalar use.


def _affine_flow(a: float, b: float, dT: float, z: float) -> float:
    # dz/dT = a z + b
    if a == 0.0:
        return z + b * dT
    e = math.exp(a * dT)
    return (a * z + b) * e / a - b / a


def _parabolic_flow(a: float, m: float, dT: float, z: float) -> float:
    # dz/dT = a (z - m)^2, double-root profile
    y = z - m
    den = 1.0 - a * y * dT
    if den <= _EPS:
        raise FrontBlowup(critical_T=1.0 / (a * y))
    return m + y / den


def _tan_flow(a: float, m: float, w0: float, dT: float, z: float) -> float:
    # dz/dT = a (z - m)^2 + w0^2 / a  (negative discriminant), w0 > 0
    theta = math.atan(a * (z - m) / w0) + w0 * dT
    if abs(theta) >= math.pi / 2.0 - _EPS:
        theta0 = math.atan(a * (z - m) / w0)
        lim = math.copysign(math.pi / 2.0, dT)
        raise FrontBlowup(critical_T=(lim - theta0) / w0)
    return m + (w0 / a) * math.tan(theta)


def _two_root_flow(r1: float, r2: float, rd: float, dT: float, z: float) -> float:
    # dz/dT = a (z - r1)(z - r2) with rd = a (r1 - r2) > 0 in the exponent:
    # (z-r1)/(z-r2) evolves as Q e^{rd dT}
    if z == r2:
        return z
    Q0 = (z - r1) / (z - r2)
    Q = Q0 * math.exp(rd * dT)
    den0 = 1.0 - Q0
    den = 1.0 - Q
    if den == 0.0 or (den0 > 0.0) != (den > 0.0):
        # trajectory crossed the simple pole between the t=0 state and now
        critical = math.log(1.0 / Q0) / rd if Q0 > 0.0 else float("nan")
        raise FrontBlowup(critical_T=critical)
    return (r1 - r2 * Q) / den


def _gd(z: float) -> float:
    # Gudermannian; maps R to (-pi/2, pi/2)
    return 2.0 * math.atan(math.tanh(0.5 * z))


def _gd_inv(w: float) -> float:
    return 2.0 * math.atanh(math.tan(0.5 * w))


# ===== trajectory/front containers =====


@dataclass(frozen=True)
class FrontTrajectory:
    """Sampled front path with exact evaluator attached.

    Positions are clamped to [0, L] for reporting; once the raw separating
    characteristic passes L the trajectory stays at L and exit_time records
    the first crossing.
    """

    ts: Tuple[float, ...]
    xs: Tuple[float, ...]
    exit_time: Optional[float]
    solution: "CharacteristicSolution"

    def __call__(self, t: float) -> float:
        return front_position(self.solution, t)

    def samples(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.ts), np.asarray(self.xs)


# ===== the solution object =====


@dataclass(frozen=True)
class CharacteristicSolution:
    spec: ProblemSpec
    family: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "family", model.closed_form_family(self.spec.alpha))

    # -- drive integral ----------------------------------------------------

    def drive_integral(self, t: float) -> float:
        """T(t) = int_0^t g for separable fields; t itself for linear-in-x
        (whose closed forms integrate their own signals)."""
        alpha = self.spec.alpha
        if isinstance(alpha, Separable):
            return alpha.g.cumulative(t)
        return t

    def _invert_drive_integral(self, T_target: float, t_hint: float) -> Optional[float]:
        """Best-effort first t with T(t) = T_target, for blowup reporting."""
        try:
            span = max(abs(t_hint), self.spec.t_end, 1e-6)
            ts = np.linspace(0.0, span, 513)
            vals = np.array([self.drive_integral(float(tt)) for tt in ts]) - T_target
            idx = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
            if idx.size == 0:
                return None
            i = int(idx[0])
            return float(brentq(lambda tt: self.drive_integral(tt) - T_target,
                                ts[i], ts[i + 1], xtol=1e-13))
        except Exception:
            return None

    def _with_time(self, exc: FrontBlowup, t: float) -> FrontBlowup:
        if exc.critical_time is None and math.isfinite(exc.critical_T):
            exc.critical_time = self._invert_drive_integral(exc.critical_T, t)
        return exc

    # -- forward map --------------------------------------------------------

    def map_forward(self, t: float, s: float) -> float:
        """F(t; s): position at time t of the characteristic from (0, s).

        Negative t is accepted (the maps are flows); it is used internally
        for the even-drive identity G(t; x) = F(-t; x).
        """
        alpha = self.spec.alpha
        if self.family == "numeric_fallback":
            return self.map_forward_rk(t, s)
        if isinstance(alpha, LinearInX):
            return self._linear_forward(t, s)
        T = alpha.g.cumulative(t)
        try:
            return self._separable_flow(alpha.f, T, s)
        except FrontBlowup as exc:
            raise self._with_time(exc, t)

    def _linear_forward(self, t: float, s: float) -> float:
        a, b = self.spec.alpha.a, self.spec.alpha.b
        A_t = a.cumulative(t)
        if isinstance(a, Constant):
            ib = b.exp_weighted(-a.value, t)
        else:
            ib = quad(lambda eta: b(eta) * math.exp(-a.cumulative(eta)),
                      0.0, t, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        return math.exp(A_t) * (s + ib)

    def _linear_backward(self, t: float, x: float) -> float:
        a, b = self.spec.alpha.a, self.spec.alpha.b
        A_t = a.cumulative(t)
        if isinstance(a, Constant):
            ib = b.exp_weighted(-a.value, t)
        else:
            ib = quad(lambda eta: b(eta) * math.exp(-a.cumulative(eta)),
                      0.0, t, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
        return math.exp(-A_t) * x - ib

    def _separable_flow(self, f, T: float, z: float) -> float:
        """Advance z by drive time T along dz/dT = f(z)."""
        if T == 0.0:
            return float(z)  # keep the t = 0 identity exact
        if isinstance(f, AffineSpace):
            return _affine_flow(f.a, f.b, T, z)
        if isinstance(f, Quadratic):
            if f.a == 0.0:
                return _affine_flow(f.b, f.c, T, z)
            delta = f.discriminant
            scale = max(1.0, f.b * f.b, abs(4.0 * f.a * f.c))
            m = -f.b / (2.0 * f.a)
            if abs(delta) <= 1e-12 * scale:
                return _parabolic_flow(f.a, m, T, z)
            if delta < 0.0:
                w0 = 0.5 * math.sqrt(-delta)
                return _tan_flow(f.a, m, w0, T, z)
            # log-ratio rate a (r1 - r2) = sqrt(delta) for either sign of a
            rd = math.sqrt(delta)
            r1 = (-f.b + rd) / (2.0 * f.a)
            r2 = (-f.b - rd) / (2.0 * f.a)
            return _two_root_flow(r1, r2, rd, T, z)
        if isinstance(f, Exponential):
            return self._exponential_flow(f, T, z)
        if isinstance(f, CoshProfile):
            rl = math.sqrt(f.lam)
            w = _gd(rl * z) + f.k * f.lam * T
            if abs(w) >= math.pi / 2.0 - _EPS:
                lim = math.copysign(math.pi / 2.0, w)
                raise FrontBlowup(critical_T=(lim - _gd(rl * z)) / (f.k * f.lam))
            return _gd_inv(w) / rl
        if isinstance(f, SinhProfile):
            rl = math.sqrt(f.lam)
            w = math.exp(f.k * f.lam * T) * math.tanh(0.5 * rl * z)
            if abs(w) >= 1.0 - _EPS:
                t0 = math.tanh(0.5 * rl * z)
                crit = math.log(1.0 / abs(t0)) / (f.k * f.lam) if t0 != 0.0 else float("inf")
                raise FrontBlowup(critical_T=crit)
            return 2.0 * math.atanh(w) / rl
        raise UnsupportedRegime(f"no closed-form flow for {type(f).__name__}")

    @staticmethod
    def _exponential_flow(f: Exponential, T: float, x: float) -> float:
        # substitute z = e^{lam x}: dz/dT = lam (a + b z^2)
        lam, a, b = f.lam, f.a, f.b
        z = math.exp(lam * x)
        if b == 0.0:
            zf = z + a * lam * T
            if zf <= _EPS:
                raise FrontBlowup(critical_T=-z / (a * lam))
            return math.log(zf) / lam
        if a == 0.0:
            den = 1.0 - lam * b * z * T
            if den <= _EPS:
                raise FrontBlowup(critical_T=1.0 / (lam * b * z))
            return math.log(z / den) / lam
        if a * b > 0.0:
            kap = math.sqrt(b / a)
            phi = math.atan(kap * z) + kap * lam * a * T
            if phi >= math.pi / 2.0 - _EPS or phi <= _EPS:
                lim = math.pi / 2.0 if phi >= math.pi / 2.0 - _EPS else 0.0
                raise FrontBlowup(critical_T=(lim - math.atan(kap * z)) / (kap * lam * a))
            return math.log(math.tan(phi) / kap) / lam
        # a b < 0: fixed point at z = 1/kap; trajectories stay on one side
        kap = math.sqrt(-b / a)
        w = kap * z
        if w == 1.0:
            return x
        if w < 1.0:
            phi = math.atanh(w) + kap * lam * a * T
            if phi <= _EPS:
                raise FrontBlowup(critical_T=-math.atanh(w) / (kap * lam * a))
            return math.log(math.tanh(phi) / kap) / lam
        # above the fixed point: arcoth(kap z) advances at the same rate
        phi = math.atanh(1.0 / w) + kap * lam * a * T
        if phi <= _EPS:
            raise FrontBlowup(critical_T=-math.atanh(1.0 / w) / (kap * lam * a))
        return math.log(1.0 / (kap * math.tanh(phi))) / lam

    # -- backward map -------------------------------------------------------

    def map_backward(self, t: float, x: float) -> float:
        """G(t; x): label of the characteristic through (t, x).

        Raises BeforeFront when the point lies left of the separating
        characteristic (the caller maps that to density 0).
        """
        alpha = self.spec.alpha
        if self.family == "numeric_fallback":
            return self._numeric_backward(t, x)
        if isinstance(alpha, LinearInX):
            s = self._linear_backward(t, x)
        else:
            T = alpha.g.cumulative(t)
            try:
                s = self._separable_flow(alpha.f, -T, x)
            except FrontBlowup:
                # backward escape: the characteristic entered from -infinity,
                # which only happens left of the front
                raise BeforeFront(f"x={x} is left of the front at t={t}")
        if s < 0.0:
            if s < -1e-12 * max(1.0, self.spec.domain.length):
                raise BeforeFront(f"x={x} is left of the front at t={t}")
            s = 0.0
        return s

    # -- adaptive RK fallback ------------------------------------------------

    def map_forward_rk(self, t: float, s: float,
                       rtol: float = 1e-9, atol: float = 1e-12) -> float:
        """F(t; s) by adaptive RK on dx/dtau = alpha(tau, x); this is the
        numeric route used both for tabulated fields and as the independent
        cross-check of every closed form."""
        if t == 0.0:
            return float(s)
        alpha = self.spec.alpha
        sol = solve_ivp(lambda tau, y: [alpha.value(tau, y[0])],
                        (0.0, t), [float(s)], method="DOP853",
                        rtol=rtol, atol=atol, dense_output=False)
        if not sol.success:
            raise FrontBlowup(critical_T=float("nan"),
                              critical_time=float(sol.t[-1]))
        return float(sol.y[0, -1])

    def map_backward_rk(self, t: float, x: float,
                        rtol: float = 1e-9, atol: float = 1e-12) -> float:
        if t == 0.0:
            return float(x)
        alpha = self.spec.alpha
        sol = solve_ivp(lambda tau, y: [alpha.value(tau, y[0])],
                        (t, 0.0), [float(x)], method="DOP853",
                        rtol=rtol, atol=atol)
        if not sol.success:
            raise BeforeFront(f"backward characteristic from x={x} failed")
        return float(sol.y[0, -1])

    def _numeric_backward(self, t: float, x: float) -> float:
        xstar = self.map_forward_rk(t, 0.0)
        L = self.spec.domain.length
        if x < xstar - 1e-10 * max(1.0, L):
            raise BeforeFront(f"x={x} is left of the front at t={t}")
        s = self.map_backward_rk(t, x)
        # round-trip residual guards against crossing characteristics, which
        # tabulated fields can produce without warning
        back = self.map_forward_rk(t, s)
        if abs(back - x) > 1e-6 * max(1.0, abs(x)):
            raise CharacteristicsCrossed(
                f"round trip through (t={t}, x={x}) returned {back}; "
                "characteristics have crossed or tolerances are exhausted")
        return max(s, 0.0)


# ===== module-level operations (thin wrappers over the solution object) =====


def map_forward(cs: CharacteristicSolution, t: float, s: float) -> float:
    return cs.map_forward(t, s)


def map_backward(cs: CharacteristicSolution, t: float, x: float) -> float:
    return cs.map_backward(t, x)


def map_forward_rk(cs: CharacteristicSolution, t: float, s: float, **kw) -> float:
    return cs.map_forward_rk(t, s, **kw)


def map_backward_rk(cs: CharacteristicSolution, t: float, x: float, **kw) -> float:
    return cs.map_backward_rk(t, x, **kw)


def front_position(cs: CharacteristicSolution, t: float) -> float:
    """x*(t) = F(t; 0), clamped to [0, L] for reporting.

    The raw characteristic may leave the domain (oscillatory drives pull it
    below 0; strong fields push it past L); the physical front is then at
    the corresponding boundary.
    """
    L = cs.spec.domain.length
    raw = cs.map_forward(t, 0.0)
    return min(max(raw, 0.0), L)


def front_speed(cs: CharacteristicSolution, t: float) -> float:
    """dx*/dt = alpha(t, x*(t)); positive means rightward."""
    raw = cs.map_forward(t, 0.0)
    return float(cs.spec.alpha.value(t, raw))


def front_trajectory(cs: CharacteristicSolution, t_end: Optional[float] = None,
                     n: int = 257) -> FrontTrajectory:
    """Sample the front on [0, t_end] and locate the domain-exit time."""
    t_end = cs.spec.t_end if t_end is None else t_end
    L = cs.spec.domain.length
    ts = np.linspace(0.0, t_end, n)

    def raw(tt: float) -> float:
        try:
            return cs.map_forward(float(tt), 0.0)
        except FrontBlowup:
            return float("inf")

    vals = np.array([raw(tt) for tt in ts])
    exit_time = None
    over = np.nonzero(vals >= L)[0]
    if over.size:
        i = int(over[0])
        if i == 0:
            exit_time = 0.0
        else:
            exit_time = float(brentq(lambda tt: min(raw(tt), 2.0 * L) - L,
                                     ts[i - 1], ts[i], xtol=1e-13))
    xs = np.clip(vals, 0.0, L)
    return FrontTrajectory(ts=tuple(float(v) for v in ts),
                           xs=tuple(float(v) for v in xs),
                           exit_time=exit_time, solution=cs)


# ===== density along characteristics =====


def _growth_along(cs: CharacteristicSolution, s: float):
    """beta(eta, F(eta; s)) as a scalar function of eta."""
    beta = cs.spec.beta

    if isinstance(beta, ConstantGrowth):
        b0 = beta.beta0
        return lambda eta: b0
    return lambda eta: float(beta.value(eta, cs.map_forward(eta, s)))


def _growth_integral(cs: CharacteristicSolution, s: float, t: float) -> float:
    """B(t) = int_0^t beta(eta, F(eta; s)) d eta."""
    beta = cs.spec.beta
    if isinstance(beta, ConstantGrowth):
        return beta.beta0 * t
    fn = _growth_along(cs, s)
    return quad(fn, 0.0, t, epsabs=1e-12, epsrel=1e-9, limit=200)[0]


def _slope_integral(cs: CharacteristicSolution, s: float, t: float) -> float:
    """Hint(t) = int_0^t alpha_x(eta, F(eta; s)) d eta.

    For separable fields alpha_x = f'(F) g and dF = f(F) g d eta collapse the
    integral to log(f(F)/f(s)); for linear-in-x fields alpha_x = a(eta).
    """
    alpha = cs.spec.alpha
    if isinstance(alpha, LinearInX):
        return alpha.a.cumulative(t)
    if isinstance(alpha, Separable):
        f = alpha.f
        fs = float(f(s))
        if fs == 0.0:
            # stuck on a fixed point of the flow
            return float(f.derivative(s)) * alpha.g.cumulative(t)
        fF = float(f(cs.map_forward(t, s)))
        return math.log(abs(fF / fs))
    raise UnsupportedRegime("tabulated fields have no closed slope integral")


def outer_density(cs: CharacteristicSolution, t: float, x: float,
                  epsrel: float = 1e-9) -> float:
    """Outer density at (t, x): 0 left of the front, otherwise the solution
    of the reciprocal-density ODE along the characteristic through (t, x).

    The running exponent uses the closed slope integral; the remaining
    single integral is evaluated by adaptive quadrature with the inner
    exponent memoized at the outer nodes.
    """
    if t == 0.0:
        return float(cs.spec.u0(x))
    try:
        s = cs.map_backward(t, x)
    except BeforeFront:
        return 0.0
    return _density_along(cs, s, t, epsrel=epsrel)


def front_plateau(cs: CharacteristicSolution, t: float) -> float:
    """Outer density carried by the separating characteristic (label 0);
    this is the plateau level immediately right of the front."""
    if t == 0.0:
        return float(cs.spec.u0(0.0))
    return _density_along(cs, 0.0, t)


def _density_along(cs: CharacteristicSolution, s: float, t: float,
                   epsrel: float = 1e-9) -> float:
    u00 = float(cs.spec.u0(max(s, 0.0)))
    if u00 == 0.0:
        return 0.0
    beta = cs.spec.beta
    alpha = cs.spec.alpha

    @lru_cache(maxsize=4096)
    def exponent(eta: float) -> float:
        return _growth_integral(cs, s, eta) - _slope_integral(cs, s, eta)

    # fully closed path: constant growth with constant linear-in-x slope
    if (isinstance(beta, ConstantGrowth) and isinstance(alpha, LinearInX)
            and isinstance(alpha.a, Constant)):
        b0, a0 = beta.beta0, alpha.a.value
        P = (b0 - a0) * t
        J = b0 * (math.expm1(P) / (b0 - a0) if b0 != a0 else t)
        return u00 * math.exp(P) / (1.0 + u00 * J)

    growth = _growth_along(cs, s)
    J = quad(lambda eta: growth(eta) * math.exp(exponent(eta)),
             0.0, t, epsabs=1e-14, epsrel=epsrel, limit=200)[0]
    P = exponent(t)
    return u00 * math.exp(P) / (1.0 + u00 * J)


def outer_density_small_u0(cs: CharacteristicSolution, t: float, x: float) -> float:
    """First-order-in-u0 shortcut u = u0(G) e^t f(G)/f(x) for autonomous
    separable fields with unit growth.

    Valid to O(u0^2); preconditions are enforced, not assumed.
    """
    alpha = cs.spec.alpha
    if not isinstance(alpha, Separable):
        raise UnsupportedRegime("small-u0 shortcut needs a separable field")
    if not (isinstance(alpha.g, Constant) and alpha.g.value == 1.0):
        raise UnsupportedRegime("small-u0 shortcut needs a steady drive g = 1")
    beta = cs.spec.beta
    if not (isinstance(beta, ConstantGrowth) and beta.beta0 == 1.0):
        raise UnsupportedRegime("small-u0 shortcut needs unit growth")
    if cs.spec.u0.max_value > 0.1:
        raise UnsupportedRegime("small-u0 shortcut needs max u0 <= 0.1")
    if t == 0.0:
        return float(cs.spec.u0(x))
    try:
        s = cs.map_backward(t, x)
    except BeforeFront:
        return 0.0
    fs, fx = float(alpha.f(s)), float(alpha.f(x))
    return float(cs.spec.u0(s)) * math.exp(t) * fs / fx
