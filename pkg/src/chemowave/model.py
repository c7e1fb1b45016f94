"""Transport-problem description: domain, fields, initial data.

The governing equation is

    u_t + (alpha(t,x) u)_x = D u_xx + beta(t,x) u (1 - u)

on x in [0, L] with zero-flux boundaries.  This module only *describes* such
problems; the characteristic maps live in `characteristics`, the reference
solver in `pde`.  Everything here is immutable and safe to share across
threads or sweep workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np

from .signals import TimeSignal, signal_from_json

__all__ = [
    "DomainError",
    "ValidationError",
    "SpatialDomain",
    "AffineSpace",
    "Quadratic",
    "Exponential",
    "CoshProfile",
    "SinhProfile",
    "NumericSpace",
    "LinearInX",
    "Separable",
    "ChemotaxisField",
    "ConstantGrowth",
    "LinearInV",
    "NumericGrowth",
    "GrowthField",
    "Uniform",
    "SampledProfile",
    "InitialProfile",
    "ProblemSpec",
    "ValidationReport",
    "evaluate_alpha",
    "alpha_x",
    "cumulative_g",
    "validate_spec",
    "require_valid",
    "spec_to_json",
    "spec_from_json",
]

# Warn above this diffusion: the outer (diffusion-free) construction assumes
# D small; reference parameter sets use 1e-3 .. 1e-4, so one order of
# magnitude of headroom is allowed before the warning fires.
D_WARN_THRESHOLD = 0.05


class DomainError(ValueError):
    """Evaluation requested outside [0, L] x [0, t_end]."""


class ValidationError(ValueError):
    """A ProblemSpec violates its invariants; carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


# ===== spatial profiles f(x) for separable fields =====


class SpaceFn:
    """Spatial factor of a separable chemotactic field, alpha = f(x) g(t)."""

    def __call__(self, x):
        raise NotImplementedError

    def derivative(self, x, h: float = 1e-4):
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class AffineSpace(SpaceFn):
    """f(x) = a x + b."""

    a: float
    b: float

    def __call__(self, x):
        return self.a * x + self.b

    def derivative(self, x, h: float = 1e-4):
        return self.a * np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else self.a

    def to_json(self) -> dict:
        return {"kind": "affine", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Quadratic(SpaceFn):
    """f(x) = a x^2 + b x + c; the discriminant b^2 - 4ac picks the
    closed-form branch of the characteristic map."""

    a: float
    b: float
    c: float

    @property
    def discriminant(self) -> float:
        return self.b * self.b - 4.0 * self.a * self.c

    def __call__(self, x):
        return (self.a * x + self.b) * x + self.c

    def derivative(self, x, h: float = 1e-4):
        return 2.0 * self.a * x + self.b

    def to_json(self) -> dict:
        return {"kind": "quadratic", "a": self.a, "b": self.b, "c": self.c}


@dataclass(frozen=True)
class Exponential(SpaceFn):
    """f(x) = a e^{-lam x} + b e^{lam x}, lam != 0."""

    a: float
    b: float
    lam: float

    def __post_init__(self):
        if self.lam == 0.0:
            raise ValueError("Exponential space profile requires lam != 0")

    def __call__(self, x):
        lx = self.lam * np.asarray(x, dtype=float) if np.ndim(x) else self.lam * x
        return self.a * np.exp(-lx) + self.b * np.exp(lx)

    def derivative(self, x, h: float = 1e-4):
        lx = self.lam * np.asarray(x, dtype=float) if np.ndim(x) else self.lam * x
        return self.lam * (self.b * np.exp(lx) - self.a * np.exp(-lx))

    def to_json(self) -> dict:
        return {"kind": "exponential", "a": self.a, "b": self.b, "lam": self.lam}


@dataclass(frozen=True)
class CoshProfile(SpaceFn):
    """f(x) = k sqrt(lam) cosh(sqrt(lam) x), lam > 0.

    This is the gradient shape of a sinh-type chemoattractant profile; k is
    the chemotactic group carried through from the device scaling.
    """

    k: float
    lam: float

    def __post_init__(self):
        if self.lam <= 0.0:
            raise ValueError("CoshProfile requires lam > 0")

    def __call__(self, x):
        rl = math.sqrt(self.lam)
        return self.k * rl * np.cosh(rl * np.asarray(x, dtype=float)) if np.ndim(x) \
            else self.k * rl * math.cosh(rl * x)

    def derivative(self, x, h: float = 1e-4):
        rl = math.sqrt(self.lam)
        return self.k * self.lam * (np.sinh(rl * np.asarray(x, dtype=float)) if np.ndim(x)
                                    else math.sinh(rl * x))

    def to_json(self) -> dict:
        return {"kind": "cosh", "k": self.k, "lam": self.lam}


@dataclass(frozen=True)
class SinhProfile(SpaceFn):
    """f(x) = k sqrt(lam) sinh(sqrt(lam) x), lam > 0."""

    k: float
    lam: float

    def __post_init__(self):
        if self.lam <= 0.0:
            raise ValueError("SinhProfile requires lam > 0")

    def __call__(self, x):
        rl = math.sqrt(self.lam)
        return self.k * rl * (np.sinh(rl * np.asarray(x, dtype=float)) if np.ndim(x)
                              else math.sinh(rl * x))

    def derivative(self, x, h: float = 1e-4):
        rl = math.sqrt(self.lam)
        return self.k * self.lam * (np.cosh(rl * np.asarray(x, dtype=float)) if np.ndim(x)
                                    else math.cosh(rl * x))

    def to_json(self) -> dict:
        return {"kind": "sinh", "k": self.k, "lam": self.lam}


@dataclass(frozen=True)
class NumericSpace(SpaceFn):
    """Piecewise-linear tabulated profile; no closed-form characteristic map."""

    xs: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        vs = np.asarray(self.values, dtype=float)
        if xs.ndim != 1 or xs.size < 2 or xs.size != vs.size:
            raise ValueError("NumericSpace needs matching xs/values of length >= 2")
        if not np.all(np.diff(xs) > 0):
            raise ValueError("NumericSpace xs must be strictly increasing")
        object.__setattr__(self, "xs", tuple(float(v) for v in xs))
        object.__setattr__(self, "values", tuple(float(v) for v in vs))

    def __call__(self, x):
        return np.interp(x, self.xs, self.values)

    def derivative(self, x, h: float = 1e-4):
        # centered difference; h is supplied by the caller as L/1e4
        return (np.interp(np.asarray(x) + h, self.xs, self.values)
                - np.interp(np.asarray(x) - h, self.xs, self.values)) / (2.0 * h)

    def to_json(self) -> dict:
        return {"kind": "sampled_space", "xs": list(self.xs), "values": list(self.values)}


# ===== chemotactic field alpha(t, x) =====


@dataclass(frozen=True)
class LinearInX:
    """alpha(t, x) = a(t) x + b(t)."""

    a: TimeSignal
    b: TimeSignal

    def value(self, t: float, x):
        return self.a(t) * x + self.b(t)

    def slope(self, t: float, x, h: float = 1e-4):
        a = self.a(t)
        return a * np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else a

    def to_json(self) -> dict:
        return {"kind": "linear_in_x", "a": self.a.to_json(), "b": self.b.to_json()}


@dataclass(frozen=True)
class Separable:
    """alpha(t, x) = f(x) g(t)."""

    f: SpaceFn
    g: TimeSignal

    def value(self, t: float, x):
        return self.f(x) * self.g(t)

    def slope(self, t: float, x, h: float = 1e-4):
        return self.f.derivative(x, h) * self.g(t)

    def to_json(self) -> dict:
        return {"kind": "separable", "f": self.f.to_json(), "g": self.g.to_json()}


ChemotaxisField = Union[LinearInX, Separable]


# ===== growth field beta(t, x) =====


@dataclass(frozen=True)
class ConstantGrowth:
    beta0: float

    def value(self, t: float, x):
        return np.full(np.shape(x), self.beta0) if np.ndim(x) else self.beta0

    def to_json(self) -> dict:
        return {"kind": "constant", "value": self.beta0}


@dataclass(frozen=True)
class LinearInV:
    """beta = m0 * v(t, x) for a known chemoattractant profile v."""

    m0: float
    v_profile: "VProfile"

    def value(self, t: float, x):
        return self.m0 * self.v_profile.value(t, x)

    def to_json(self) -> dict:
        return {"kind": "linear_in_v", "m0": self.m0,
                "profile": self.v_profile.to_json()}


class VProfile:
    """Anything evaluable as v(t, x) with a JSON form; see microdevice."""

    def value(self, t: float, x):
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class NumericGrowth:
    """Arbitrary callable beta(t, x); programmatic use only, not serializable."""

    fn: Callable[[float, np.ndarray], np.ndarray]

    def value(self, t: float, x):
        return self.fn(t, x)

    def to_json(self) -> dict:
        raise ValueError("NumericGrowth cannot be serialized to JSON")


GrowthField = Union[ConstantGrowth, LinearInV, NumericGrowth]


# ===== initial profile =====


@dataclass(frozen=True)
class Uniform:
    u0: float

    def __call__(self, x):
        return np.full(np.shape(x), self.u0) if np.ndim(x) else self.u0

    @property
    def max_value(self) -> float:
        return self.u0

    def to_json(self) -> dict:
        return {"kind": "uniform", "value": self.u0}


@dataclass(frozen=True)
class SampledProfile:
    xs: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        vs = np.asarray(self.values, dtype=float)
        if xs.ndim != 1 or xs.size < 2 or xs.size != vs.size:
            raise ValueError("SampledProfile needs matching xs/values of length >= 2")
        if not np.all(np.diff(xs) > 0):
            raise ValueError("SampledProfile xs must be strictly increasing")
        object.__setattr__(self, "xs", tuple(float(v) for v in xs))
        object.__setattr__(self, "values", tuple(float(v) for v in vs))

    def __call__(self, x):
        return np.interp(x, self.xs, self.values)

    @property
    def max_value(self) -> float:
        return max(self.values)

    def to_json(self) -> dict:
        return {"kind": "sampled", "xs": list(self.xs), "values": list(self.values)}


InitialProfile = Union[Uniform, SampledProfile]


# ===== domain and full problem =====


@dataclass(frozen=True)
class SpatialDomain:
    length: float = 1.0
    cell_count: int = 256

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("domain length must be positive")
        if self.cell_count < 8:
            raise ValueError("cell_count must be >= 8")

    def to_json(self) -> dict:
        return {"length": self.length, "cell_count": self.cell_count}


@dataclass(frozen=True)
class ProblemSpec:
    domain: SpatialDomain
    diffusion: float
    alpha: ChemotaxisField
    beta: GrowthField
    u0: InitialProfile
    t_end: float

    def to_json(self) -> dict:
        return spec_to_json(self)


# ===== operations =====


def _check_domain(spec: ProblemSpec, t: float, x) -> None:
    L = spec.domain.length
    if not 0.0 <= t <= spec.t_end:
        raise DomainError(f"t={t} outside [0, {spec.t_end}]")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0.0) or np.any(xa > L):
        raise DomainError(f"x outside [0, {L}]")


def evaluate_alpha(spec: ProblemSpec, t: float, x):
    """Chemotactic flux velocity alpha(t, x) with domain checking."""
    _check_domain(spec, t, x)
    return spec.alpha.value(t, x)


def alpha_x(spec: ProblemSpec, t: float, x):
    """Spatial derivative of alpha.  Analytic for closed-form variants,
    centered difference with h = L/1e4 for tabulated profiles."""
    _check_domain(spec, t, x)
    return spec.alpha.slope(t, x, h=spec.domain.length * 1e-4)


def cumulative_g(signal: TimeSignal, t: float) -> float:
    """Running integral of a drive signal from 0 to t."""
    if t < 0.0:
        raise DomainError(f"cumulative_g requires t >= 0, got {t}")
    return signal.cumulative(t)


_FAMILIES = {
    AffineSpace: "separable_affine",
    Quadratic: "separable_quadratic",
    Exponential: "separable_exponential",
    CoshProfile: "separable_cosh",
    SinhProfile: "separable_sinh",
    NumericSpace: "numeric_fallback",
}


def closed_form_family(alpha: ChemotaxisField) -> str:
    """Tag naming which closed-form characteristic map applies."""
    if isinstance(alpha, LinearInX):
        return "linear_in_x"
    if isinstance(alpha, Separable):
        return _FAMILIES.get(type(alpha.f), "numeric_fallback")
    return "numeric_fallback"


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    family: str
    violations: Tuple[str, ...]
    warnings: Tuple[str, ...]


def validate_spec(spec: ProblemSpec) -> ValidationReport:
    """Check the problem invariants; never raises.

    Growth positivity for non-constant beta is checked by sampling a coarse
    (t, x) lattice; a field that dips negative between samples will only be
    caught at solve time.
    """
    violations = []
    warnings = []

    if spec.diffusion < 0.0:
        violations.append("diffusion must be >= 0")
    if not spec.t_end > 0.0:
        violations.append("t_end must be positive")

    u0max = spec.u0.max_value
    u0min = spec.u0.u0 if isinstance(spec.u0, Uniform) else min(spec.u0.values)
    if u0max > 1.0:
        violations.append("initial density above carrying capacity")
    if u0min < 0.0:
        violations.append("initial density negative")

    try:
        ts = np.linspace(0.0, spec.t_end, 5)
        xs = np.linspace(0.0, spec.domain.length, 21)
        bmin = min(float(np.min(np.asarray(spec.beta.value(t, xs)))) for t in ts)
        if bmin < 0.0:
            violations.append("growth field negative on sampled lattice")
        for t in ts:
            np.asarray(spec.alpha.value(t, xs))
    except Exception as exc:  # evaluability is itself an invariant
        violations.append(f"field evaluation failed: {exc}")

    if spec.diffusion > D_WARN_THRESHOLD:
        warnings.append(
            f"outer approximation regime violated: diffusion {spec.diffusion} "
            f"> {D_WARN_THRESHOLD}")

    return ValidationReport(
        ok=not violations,
        family=closed_form_family(spec.alpha),
        violations=tuple(violations),
        warnings=tuple(warnings),
    )


def require_valid(spec: ProblemSpec) -> ValidationReport:
    """validate_spec, but raising ValidationError when anything is violated."""
    report = validate_spec(spec)
    if not report.ok:
        raise ValidationError(report.violations)
    return report


# ===== JSON (de)serialization =====


_SPACE_KINDS = {
    "affine": lambda d: AffineSpace(float(d["a"]), float(d["b"])),
    "quadratic": lambda d: Quadratic(float(d["a"]), float(d["b"]), float(d["c"])),
    "exponential": lambda d: Exponential(float(d["a"]), float(d["b"]), float(d["lam"])),
    "cosh": lambda d: CoshProfile(float(d["k"]), float(d["lam"])),
    "sinh": lambda d: SinhProfile(float(d["k"]), float(d["lam"])),
    "sampled_space": lambda d: NumericSpace(tuple(d["xs"]), tuple(d["values"])),
}


def space_fn_from_json(doc: dict) -> SpaceFn:
    kind = doc.get("kind")
    if kind not in _SPACE_KINDS:
        raise ValueError(f"unknown space profile kind {kind!r}")
    return _SPACE_KINDS[kind](doc)


def alpha_from_json(doc: dict) -> ChemotaxisField:
    kind = doc.get("kind")
    if kind == "linear_in_x":
        return LinearInX(signal_from_json(doc["a"]), signal_from_json(doc["b"]))
    if kind == "separable":
        return Separable(space_fn_from_json(doc["f"]), signal_from_json(doc["g"]))
    raise ValueError(f"unknown chemotaxis field kind {kind!r}")


def growth_from_json(doc: dict) -> GrowthField:
    kind = doc.get("kind")
    if kind == "constant":
        return ConstantGrowth(float(doc["value"]))
    if kind == "linear_in_v":
        from . import microdevice  # deferred: microdevice imports this module

        profile = microdevice.vprofile_from_json(doc["profile"])
        return LinearInV(float(doc["m0"]), profile)
    raise ValueError(f"unknown growth field kind {kind!r}")


def u0_from_json(doc: dict) -> InitialProfile:
    kind = doc.get("kind")
    if kind == "uniform":
        return Uniform(float(doc["value"]))
    if kind == "sampled":
        return SampledProfile(tuple(doc["xs"]), tuple(doc["values"]))
    raise ValueError(f"unknown initial profile kind {kind!r}")


def spec_to_json(spec: ProblemSpec) -> dict:
    return {
        "domain": spec.domain.to_json(),
        "diffusion": spec.diffusion,
        "alpha": spec.alpha.to_json(),
        "beta": spec.beta.to_json(),
        "u0": spec.u0.to_json(),
        "t_end": spec.t_end,
    }


def spec_from_json(doc: dict) -> ProblemSpec:
    try:
        domain = SpatialDomain(float(doc["domain"]["length"]),
                               int(doc["domain"]["cell_count"]))
        return ProblemSpec(
            domain=domain,
            diffusion=float(doc["diffusion"]),
            alpha=alpha_from_json(doc["alpha"]),
            beta=growth_from_json(doc["beta"]),
            u0=u0_from_json(doc["u0"]),
            t_end=float(doc["t_end"]),
        )
    except KeyError as exc:
        raise ValueError(f"problem document missing field {exc}")
