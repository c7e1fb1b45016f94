"""Microdevice reductions: quasi-steady chemoattractant profiles and the
transport problems they induce.

A shallow culture chamber with chemoattractant supplied at the walls is
described by four dimensionless groups Pi1..Pi4.  When the agent diffuses
much faster than cells grow (Pi3 >> 1) its profile v(t, x) is slaved to the
wall drives and solves one of three steady problems depending on how the
cells consume it:

    zero uptake       v_xx = 0        v linear in x       (WeakConsumption)
    saturated uptake  v_xx = lam      v quadratic in x    (HighNutrient)
    linear uptake     v_xx = lam v    v sinh / cosh in x  (LowNutrient*)

Each regime induces alpha = k v_x and beta = m(v) for the cell transport
problem, which is linear-in-x or separable, so the machinery in
`characteristics` applies directly.  This module carries the regime closed
forms for the transition coordinate and the small-u0 density alongside the
generic reduction; the full coupled system (without the quasi-steady
assumption) is solved by `pde.solve_coupled` against the same spec object.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from . import characteristics
from .model import (
    ConstantGrowth,
    CoshProfile,
    DomainError,
    GrowthField,
    InitialProfile,
    LinearInV,
    LinearInX,
    ProblemSpec,
    Separable,
    SinhProfile,
    SpatialDomain,
    Uniform,
    VProfile,
    u0_from_json,
)
from .signals import Constant, Cosine, Ramp, Sampled, TimeSignal, signal_from_json

__all__ = [
    "REGIMES",
    "MichaelisMenten",
    "Hill",
    "DimensionalParams",
    "MicrodeviceSpec",
    "OuterChemoProfile",
    "nondimensionalize",
    "uptake_per_cell",
    "chemo_profile",
    "build_transport_problem",
    "closed_form_front",
    "closed_form_density",
    "vprofile_from_json",
    "microdevice_from_json",
]

REGIMES = (
    "WeakConsumption",
    "HighNutrient",
    "LowNutrientGradient",
    "LowNutrientSymmetric",
)

# how the coupled solver treats the agent sink in each regime
_UPTAKE_KIND = {
    "WeakConsumption": "zero",
    "HighNutrient": "constant",
    "LowNutrientGradient": "linear",
    "LowNutrientSymmetric": "linear",
}


# ===== per-cell uptake kinetics =====


@dataclass(frozen=True)
class MichaelisMenten:
    """w_pc = v / (v + k_m)."""

    k_m: float

    def __post_init__(self):
        if not self.k_m > 0.0:
            raise ValueError("MichaelisMenten requires k_m > 0")


@dataclass(frozen=True)
class Hill:
    """w_pc = v^n / (v^n + k_h^n)."""

    k_h: float
    n: float

    def __post_init__(self):
        if not self.k_h > 0.0:
            raise ValueError("Hill requires k_h > 0")
        if not self.n > 0.0:
            raise ValueError("Hill requires n > 0")


def uptake_per_cell(v, kinetics: Union[MichaelisMenten, Hill]):
    """Fraction of the maximal rate one cell draws at agent level v.

    Monotone in v, 0 at v = 0, saturating below 1; negative v is a domain
    error since the kinetics are only meaningful for concentrations.
    """
    va = np.asarray(v, dtype=float)
    if np.any(va < 0.0):
        raise DomainError("uptake_per_cell requires v >= 0")
    if isinstance(kinetics, MichaelisMenten):
        out = va / (va + kinetics.k_m)
    elif isinstance(kinetics, Hill):
        vn = va ** kinetics.n
        out = vn / (vn + kinetics.k_h ** kinetics.n)
    else:
        raise ValueError(f"unknown kinetics {type(kinetics).__name__}")
    return float(out) if np.ndim(v) == 0 else out


# ===== dimensional constants and their collapse =====


@dataclass(frozen=True)
class DimensionalParams:
    """Dimensional device constants.

    d_cell, d_agent are diffusivities, chi the chemotactic coefficient,
    growth_rate the cell doubling rate, uptake_rate the maximal agent
    consumption rate, carrying_density and agent_scale the density and
    concentration used to nondimensionalize, length the chamber size.
    """

    d_cell: float
    chi: float
    d_agent: float
    growth_rate: float
    uptake_rate: float
    carrying_density: float
    agent_scale: float
    length: float

    def __post_init__(self):
        for name in ("d_cell", "chi", "d_agent", "growth_rate", "uptake_rate",
                     "carrying_density", "agent_scale", "length"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"DimensionalParams.{name} must be positive")


# ===== quasi-steady chemoattractant profile =====


@dataclass(frozen=True)
class OuterChemoProfile(VProfile):
    """v(t, x) for one consumption regime, driven by the wall signals.

    The low-nutrient shapes are sinh(sqrt(lam) x) (gradient: v = 0 at the
    left wall) and cosh(sqrt(lam) x) (symmetric: zero flux at the left
    wall), scaled by psi2(t).  Those shapes reach sinh(sqrt(lam)) resp.
    cosh(sqrt(lam)) at x = 1 rather than 1; `normalized` divides them out so
    the right wall sees exactly psi2.
    """

    regime: str
    lam: float
    psi1: TimeSignal
    psi2: TimeSignal
    normalized: bool = False

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if self.lam < 0.0:
            raise ValueError("lam must be >= 0")
        if _UPTAKE_KIND[self.regime] == "linear" and not self.lam > 0.0:
            raise ValueError("low-nutrient profiles require lam > 0")

    @property
    def norm(self) -> float:
        """Divisor applied to the low-nutrient shapes (1 unless normalized)."""
        if not self.normalized:
            return 1.0
        rl = math.sqrt(self.lam)
        if self.regime == "LowNutrientGradient":
            return math.sinh(rl)
        if self.regime == "LowNutrientSymmetric":
            return math.cosh(rl)
        return 1.0

    def value(self, t: float, x):
        xa = np.asarray(x, dtype=float)
        if self.regime == "WeakConsumption":
            p1 = self.psi1(t)
            out = (self.psi2(t) - p1) * xa + p1
        elif self.regime == "HighNutrient":
            p1 = self.psi1(t)
            out = (0.5 * self.lam * xa + (self.psi2(t) - p1 - 0.5 * self.lam)) * xa + p1
            if np.any(out < 0.0):
                warnings.warn(
                    "high-nutrient outer profile dips negative; the drives "
                    "violate psi2 - psi1 >= lam/2", stacklevel=2)
        elif self.regime == "LowNutrientGradient":
            out = self.psi2(t) * np.sinh(math.sqrt(self.lam) * xa) / self.norm
        else:
            out = self.psi2(t) * np.cosh(math.sqrt(self.lam) * xa) / self.norm
        return float(out) if np.ndim(x) == 0 else out

    def to_json(self) -> dict:
        return {
            "kind": "outer_chemo",
            "regime": self.regime,
            "lambda": self.lam,
            "psi1": self.psi1.to_json(),
            "psi2": self.psi2.to_json(),
            "normalized": self.normalized,
        }


def vprofile_from_json(doc: dict) -> VProfile:
    kind = doc.get("kind")
    if kind == "outer_chemo":
        return OuterChemoProfile(
            regime=str(doc["regime"]),
            lam=float(doc["lambda"]),
            psi1=signal_from_json(doc["psi1"]),
            psi2=signal_from_json(doc["psi2"]),
            normalized=bool(doc.get("normalized", False)),
        )
    raise ValueError(f"unknown chemoattractant profile kind {kind!r}")


# ===== the device spec =====


@dataclass(frozen=True)
class MicrodeviceSpec:
    """One reduced device scenario: groups, uptake number, drives, growth law.

    pi2 is the chemotactic group k.  lam bundles the uptake constants:
    Pi4 K / Pi3 for saturated uptake, Pi4 K / (k_m Pi3) for linear uptake,
    0 when consumption is neglected.  A LinearInV growth law is rebound to
    this spec's own outer profile, so m always means m(v) with the regime's
    v.  `normalized` rescales the low-nutrient profiles so the right wall
    sees exactly psi2 (see OuterChemoProfile); the induced chemotactic
    strength scales down by the same factor (`k_eff`).
    """

    pi1: float
    pi2: float
    pi3: float
    pi4: float
    lam: float
    regime: str
    psi1: TimeSignal
    psi2: TimeSignal
    m: GrowthField
    u0: InitialProfile
    t_end: float = 1.0
    normalized: bool = False

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if self.pi1 < 0.0:
            raise ValueError("pi1 must be >= 0")
        if self.pi2 < 0.0:
            raise ValueError("pi2 must be >= 0")  # 0 switches chemotaxis off
        for name in ("pi3", "pi4"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.lam < 0.0:
            raise ValueError("lam must be >= 0")
        if _UPTAKE_KIND[self.regime] == "linear" and not self.lam > 0.0:
            raise ValueError("low-nutrient regimes require lam > 0")
        if not self.t_end > 0.0:
            raise ValueError("t_end must be positive")
        if self.pi3 < 10.0:
            warnings.warn(
                f"Pi3 = {self.pi3:g} < 10: the quasi-steady agent profile is "
                "a poor reduction", stacklevel=2)
        if self.lam > 0.0 and not (1.0 / self.pi3 < self.lam < self.pi3):
            warnings.warn(
                f"lam = {self.lam:g} lies outside (1/Pi3, Pi3); the reduction "
                "treats lam as order one", stacklevel=2)
        if isinstance(self.m, LinearInV):
            object.__setattr__(self, "m", LinearInV(self.m.m0, self.outer_profile))

    # -- derived views -------------------------------------------------------

    @property
    def outer_profile(self) -> OuterChemoProfile:
        return OuterChemoProfile(self.regime, self.lam, self.psi1, self.psi2,
                                 self.normalized)

    @property
    def uptake_kind(self) -> str:
        """Agent sink used by the coupled solver: zero, constant, or linear."""
        return _UPTAKE_KIND[self.regime]

    @property
    def symmetric(self) -> bool:
        """True when the left wall is a mirror (zero agent flux) instead of
        a prescribed value."""
        return self.regime == "LowNutrientSymmetric"

    @property
    def k_eff(self) -> float:
        """Chemotactic strength entering the characteristic maps; equals
        pi2 unless the profile is normalized."""
        return self.pi2 / self.outer_profile.norm

    def chemo(self, t: float, x):
        """Outer agent profile v(t, x)."""
        return self.outer_profile.value(t, x)

    def wall_values(self, t: float) -> Tuple[Optional[float], float]:
        """Dirichlet data for the coupled solver; left is None for the
        symmetric (mirrored) configuration."""
        left = None if self.symmetric else float(self.chemo(t, 0.0))
        return left, float(self.chemo(t, 1.0))

    def to_json(self) -> dict:
        return {
            "pi1": self.pi1,
            "pi2": self.pi2,
            "pi3": self.pi3,
            "pi4": self.pi4,
            "lambda": self.lam,
            "regime": self.regime,
            "psi1": self.psi1.to_json(),
            "psi2": self.psi2.to_json(),
            "m": self.m.to_json(),
            "u0": self.u0.to_json(),
            "t_end": self.t_end,
            "normalized": self.normalized,
        }


def microdevice_from_json(doc: dict) -> MicrodeviceSpec:
    try:
        regime = str(doc["regime"])
        lam = float(doc.get("lambda", 0.0))
        psi1 = signal_from_json(doc["psi1"])
        psi2 = signal_from_json(doc["psi2"])
        normalized = bool(doc.get("normalized", False))
        mdoc = doc["m"]
        kind = mdoc.get("kind")
        if kind == "constant":
            m: GrowthField = ConstantGrowth(float(mdoc["value"]))
        elif kind == "linear_in_v":
            # any explicit profile in the document is superseded by the
            # spec's own outer profile (the rebinding in __post_init__)
            profile = OuterChemoProfile(regime, lam, psi1, psi2, normalized)
            m = LinearInV(float(mdoc["m0"]), profile)
        else:
            raise ValueError(f"unknown growth kind {kind!r} for a device spec")
        return MicrodeviceSpec(
            pi1=float(doc["pi1"]),
            pi2=float(doc["pi2"]),
            pi3=float(doc["pi3"]),
            pi4=float(doc["pi4"]),
            lam=lam,
            regime=regime,
            psi1=psi1,
            psi2=psi2,
            m=m,
            u0=u0_from_json(doc["u0"]),
            t_end=float(doc.get("t_end", 1.0)),
            normalized=normalized,
        )
    except KeyError as exc:
        raise ValueError(f"device document missing field {exc}")


def nondimensionalize(dp: DimensionalParams, regime: str, *,
                      psi1: TimeSignal, psi2: TimeSignal,
                      m: GrowthField, u0: InitialProfile,
                      uptake_scale: Optional[float] = None,
                      k_m: Optional[float] = None,
                      t_end: float = 1.0,
                      normalized: bool = False) -> MicrodeviceSpec:
    """Collapse dimensional constants into the four groups and lam.

    uptake_scale is the saturated per-cell uptake fraction K; k_m the
    linear-kinetics constant.  lam = 0 (zero uptake), Pi4 K / Pi3
    (saturated), or Pi4 K / (k_m Pi3) (linear).
    """
    denom = dp.growth_rate * dp.length * dp.length
    pi1 = dp.d_cell / denom
    pi2 = dp.chi * dp.agent_scale / denom
    pi3 = dp.d_agent / denom
    pi4 = dp.uptake_rate * dp.carrying_density / (dp.growth_rate * dp.agent_scale)
    if regime == "WeakConsumption":
        lam = 0.0
    elif regime == "HighNutrient":
        if uptake_scale is None:
            raise ValueError("HighNutrient needs uptake_scale (saturated uptake K)")
        lam = pi4 * uptake_scale / pi3
    elif regime in REGIMES:
        if uptake_scale is None or k_m is None:
            raise ValueError("low-nutrient regimes need uptake_scale and k_m")
        lam = pi4 * uptake_scale / (k_m * pi3)
    else:
        raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    return MicrodeviceSpec(pi1=pi1, pi2=pi2, pi3=pi3, pi4=pi4, lam=lam,
                           regime=regime, psi1=psi1, psi2=psi2, m=m, u0=u0,
                           t_end=t_end, normalized=normalized)


def chemo_profile(md: MicrodeviceSpec, t: float, x):
    """Outer agent profile v(t, x); module-level twin of md.chemo."""
    return md.chemo(t, x)


# ===== transport problem construction =====


def _affine_parts(sig: TimeSignal) -> Optional[Tuple[float, float]]:
    # (slope, intercept) when the signal is affine in t, else None
    if isinstance(sig, Constant):
        return 0.0, sig.value
    if isinstance(sig, Ramp):
        return sig.rate, 0.0
    return None


def _scaled_difference(scale: float, hi: TimeSignal, lo: TimeSignal,
                       offset: float, horizon: float) -> TimeSignal:
    """TimeSignal for scale*(hi(t) - lo(t)) + offset.

    Exact whenever the combination stays inside the closed signal set
    (affine pieces, one cosine against an affine piece, equal-frequency
    cosines); otherwise a dense piecewise-linear sample over [0, horizon].
    """
    a_hi, a_lo = _affine_parts(hi), _affine_parts(lo)
    if a_hi is not None and a_lo is not None:
        slope = scale * (a_hi[0] - a_lo[0])
        const = scale * (a_hi[1] - a_lo[1]) + offset
        if slope == 0.0:
            return Constant(const)
        if const == 0.0:
            return Ramp(slope)
        # affine with both terms: exact as a two-knot piecewise-linear signal
        return Sampled((0.0, horizon), (const, const + slope * horizon))
    if isinstance(hi, Cosine) and a_lo is not None and a_lo[0] == 0.0:
        return Cosine(scale * hi.amplitude, hi.omega,
                      scale * (hi.offset - a_lo[1]) + offset)
    if isinstance(lo, Cosine) and a_hi is not None and a_hi[0] == 0.0:
        return Cosine(-scale * lo.amplitude, lo.omega,
                      scale * (a_hi[1] - lo.offset) + offset)
    if isinstance(hi, Cosine) and isinstance(lo, Cosine) and hi.omega == lo.omega:
        return Cosine(scale * (hi.amplitude - lo.amplitude), hi.omega,
                      scale * (hi.offset - lo.offset) + offset)
    ts = np.linspace(0.0, horizon, 4097)
    vals = [scale * (hi(float(tt)) - lo(float(tt))) + offset for tt in ts]
    return Sampled(tuple(float(tt) for tt in ts), tuple(vals))


def build_transport_problem(md: MicrodeviceSpec, diffusion: float = 0.0,
                            cell_count: int = 256) -> ProblemSpec:
    """ProblemSpec on the unit chamber with the regime's alpha = k v_x and
    beta = m(v).

    diffusion defaults to 0 (the outer construction); PDE comparisons pass
    the physical pi1.
    """
    k, lam = md.pi2, md.lam
    if md.regime == "WeakConsumption":
        alpha = LinearInX(a=Constant(0.0),
                          b=_scaled_difference(k, md.psi2, md.psi1, 0.0, md.t_end))
    elif md.regime == "HighNutrient":
        alpha = LinearInX(a=Constant(k * lam),
                          b=_scaled_difference(k, md.psi2, md.psi1,
                                               -0.5 * k * lam, md.t_end))
    elif md.regime == "LowNutrientGradient":
        alpha = Separable(f=CoshProfile(k=md.k_eff, lam=lam), g=md.psi2)
    else:
        alpha = Separable(f=SinhProfile(k=md.k_eff, lam=lam), g=md.psi2)
    return ProblemSpec(
        domain=SpatialDomain(length=1.0, cell_count=cell_count),
        diffusion=diffusion,
        alpha=alpha,
        beta=md.m,
        u0=md.u0,
        t_end=md.t_end,
    )


# ===== regime closed forms =====


def closed_form_front(md: MicrodeviceSpec, t: float, clamp: bool = True) -> float:
    """Transition coordinate x*(t) from the regime closed form.

    Matches characteristics.front_position on the problem built by
    build_transport_problem to rounding; clamp=False returns the raw
    characteristic, which may leave [0, 1].
    """
    if t < 0.0:
        raise DomainError(f"closed_form_front requires t >= 0, got {t}")
    k, lam = md.pi2, md.lam
    if md.regime == "WeakConsumption":
        raw = k * (md.psi2.cumulative(t) - md.psi1.cumulative(t))
    elif md.regime == "HighNutrient":
        rate = k * lam
        grow = math.exp(rate * t)
        drive = md.psi2.exp_weighted(-rate, t) - md.psi1.exp_weighted(-rate, t)
        raw = 0.5 * (1.0 - grow) + k * grow * drive
    elif md.regime == "LowNutrientGradient":
        keff = md.k_eff
        theta = 0.5 * keff * lam * md.psi2.cumulative(t)
        if abs(theta) >= 0.25 * math.pi:
            # S = tan(theta) hits 1 and the log diverges: the transition has
            # left the device
            raise characteristics.FrontBlowup(
                critical_T=0.5 * math.pi / (keff * lam))
        s_val = math.tan(theta)
        raw = math.log((1.0 + s_val) / (1.0 - s_val)) / math.sqrt(lam)
    else:
        raw = 0.0
    if not clamp:
        return raw
    return min(max(raw, 0.0), 1.0)


def _high_series_coeffs(md: MicrodeviceSpec, t: float):
    """(quad, h1, h2) of the high-nutrient exponent for psi1 = 0 and a
    constant or ramp psi2; None for other drives.

    quad is exact; h1, h2 keep the linear-in-lam correction, so the
    truncation error of the density is O(lam^2 t^2) relative.
    """
    if not (isinstance(md.psi1, Constant) and md.psi1.value == 0.0):
        return None
    k, lam, m0 = md.pi2, md.lam, md.m.m0
    quad = -m0 * math.expm1(-2.0 * k * lam * t) / (4.0 * k)
    if isinstance(md.psi2, Constant):
        pb = md.psi2.value
        h1 = 3.0 * m0 * pb * t - 1.5 * m0 * lam * t
        h2 = (0.5 * k * m0 * pb * pb * t * t
              + lam * k * m0 * pb * t * t * (k * pb * t / 3.0 - 0.5))
        return quad, h1, h2
    if isinstance(md.psi2, Ramp):
        rho = md.psi2.rate
        h1 = 1.5 * m0 * rho * t * t - 1.5 * m0 * lam * t
        h2 = (k * m0 * rho * rho * t ** 4 / 8.0
              + lam * k * m0 * rho * t ** 3 * (7.0 * k * rho * t * t / 120.0 - 0.25))
        return quad, h1, h2
    return None


def _density_fallback(md: MicrodeviceSpec, t: float, x: float) -> float:
    cs = characteristics.CharacteristicSolution(build_transport_problem(md))
    return characteristics.outer_density(cs, t, x)


def closed_form_density(md: MicrodeviceSpec, t: float, x: float) -> float:
    """Small-u0 density right of the transition from the regime closed form.

    Zero left of the raw front.  The closed forms require m = m0 v with a
    uniform u0 <= 0.1 (and, for the high-nutrient series, psi1 = 0 with a
    constant or ramp psi2); anything else falls back to the characteristics
    quadrature, which is exact in u0 but slower.
    """
    if t < 0.0:
        raise DomainError(f"closed_form_density requires t >= 0, got {t}")
    if t == 0.0:
        return float(md.u0(x))
    raw = closed_form_front(md, t, clamp=False)
    if x < raw:
        return 0.0
    if not (isinstance(md.m, LinearInV) and isinstance(md.u0, Uniform)
            and md.u0.u0 <= 0.1):
        return _density_fallback(md, t, x)
    m0, u00 = md.m.m0, md.u0.u0
    k, lam = md.pi2, md.lam

    if md.regime == "WeakConsumption":
        expo = (m0 / k) * raw * (x - 0.5 * raw) + m0 * md.psi1.cumulative(t)
        return u00 * math.exp(expo)

    if md.regime == "HighNutrient":
        coeffs = _high_series_coeffs(md, t)
        if coeffs is None:
            return _density_fallback(md, t, x)
        quad, h1, h2 = coeffs
        xi = x - raw
        return u00 * math.exp(quad * xi * xi + h1 * xi / 3.0 + h2 - k * lam * t)

    # low-nutrient power laws; the exponent carries the bare k even when the
    # profile is normalized (m(v) and k v_xx rescale together)
    rl = math.sqrt(lam)
    power = (m0 - k * lam) / (k * lam)
    if md.regime == "LowNutrientGradient":
        theta = 0.5 * md.k_eff * lam * md.psi2.cumulative(t)
        s_val = math.tan(theta)
        ex = math.exp(-rl * x)
        if ex + s_val <= 0.0:
            # backward characteristic diverged: continuous extension is 0
            return 0.0
        g_val = math.log((1.0 - ex * s_val) / (ex + s_val)) / rl
        return u00 * (math.cosh(rl * x) / math.cosh(rl * g_val)) ** power

    drive = md.k_eff * lam * md.psi2.cumulative(t)
    if x == 0.0:
        # sinh-ratio limit at the mirror wall
        return u00 * math.exp(drive * power)
    g_val = 2.0 * math.atanh(math.exp(-drive) * math.tanh(0.5 * rl * x)) / rl
    return u00 * (math.sinh(rl * x) / math.sinh(rl * g_val)) ** power
