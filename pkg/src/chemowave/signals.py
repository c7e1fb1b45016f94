"""Time-dependent drive signals.

Every signal knows three things: its value at time t, its running integral
T(t) = int_0^t sig(eta) d eta, and the exponentially weighted integral
int_0^t sig(eta) e^{r eta} d eta.  The last two are closed-form for the
analytic variants, which is what keeps the characteristic maps exact instead
of stacking quadrature error on top of model error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

__all__ = [
    "TimeSignal",
    "Constant",
    "Cosine",
    "Ramp",
    "Sampled",
    "signal_from_json",
]


class TimeSignal:
    """Base class for scalar signals of time, evaluable for all t >= 0."""

    def __call__(self, t: float) -> float:
        raise NotImplementedError

    def cumulative(self, t: float) -> float:
        """Running integral int_0^t sig(eta) d eta."""
        raise NotImplementedError

    def exp_weighted(self, r: float, t: float) -> float:
        """int_0^t sig(eta) e^{r eta} d eta, exact per variant."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


def _expm1_div(r: float, t: float) -> float:
    # (e^{rt} - 1)/r with the r -> 0 limit handled.
    if r == 0.0:
        return t
    return math.expm1(r * t) / r


@dataclass(frozen=True)
class Constant(TimeSignal):
    value: float

    def __call__(self, t: float) -> float:
        return self.value

    def cumulative(self, t: float) -> float:
        return self.value * t

    def exp_weighted(self, r: float, t: float) -> float:
        return self.value * _expm1_div(r, t)

    def to_json(self) -> dict:
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True)
class Cosine(TimeSignal):
    """amplitude * cos(omega * t) + offset."""

    amplitude: float
    omega: float
    offset: float = 0.0

    def __call__(self, t: float) -> float:
        return self.amplitude * math.cos(self.omega * t) + self.offset

    def cumulative(self, t: float) -> float:
        if self.omega == 0.0:
            return (self.amplitude + self.offset) * t
        return self.amplitude * math.sin(self.omega * t) / self.omega + self.offset * t

    def exp_weighted(self, r: float, t: float) -> float:
        out = self.offset * _expm1_div(r, t)
        w = self.omega
        if w == 0.0:
            return out + self.amplitude * _expm1_div(r, t)
        # int_0^t cos(w eta) e^{r eta} = [e^{rt}(r cos wt + w sin wt) - r]/(r^2+w^2)
        e = math.exp(r * t)
        out += self.amplitude * (e * (r * math.cos(w * t) + w * math.sin(w * t)) - r) / (r * r + w * w)
        return out

    def to_json(self) -> dict:
        return {"kind": "cosine", "amplitude": self.amplitude,
                "omega": self.omega, "offset": self.offset}


@dataclass(frozen=True)
class Ramp(TimeSignal):
    """rate * t."""

    rate: float

    def __call__(self, t: float) -> float:
        return self.rate * t

    def cumulative(self, t: float) -> float:
        return 0.5 * self.rate * t * t

    def exp_weighted(self, r: float, t: float) -> float:
        if r == 0.0:
            return 0.5 * self.rate * t * t
        # int_0^t eta e^{r eta} = [e^{rt}(rt - 1) + 1]/r^2
        return self.rate * (math.exp(r * t) * (r * t - 1.0) + 1.0) / (r * r)

    def to_json(self) -> dict:
        return {"kind": "ramp", "rate": self.rate}


@dataclass(frozen=True)
class Sampled(TimeSignal):
    """Piecewise-linear interpolant through (knots, values).

    Held constant at the end values outside the knot range so the signal is
    evaluable for all t >= 0.  Knots must be strictly increasing.
    """

    knots: Tuple[float, ...]
    values: Tuple[float, ...]
    _cum: Tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.ndim != 1 or k.size < 2 or k.size != v.size:
            raise ValueError("Sampled needs matching knot/value arrays of length >= 2")
        if not np.all(np.diff(k) > 0):
            raise ValueError("Sampled knots must be strictly increasing")
        object.__setattr__(self, "knots", tuple(float(x) for x in k))
        object.__setattr__(self, "values", tuple(float(x) for x in v))
        # cumulative integral from knots[0] to each knot (trapezoid is exact
        # for a piecewise-linear function)
        seg = 0.5 * (v[1:] + v[:-1]) * np.diff(k)
        object.__setattr__(self, "_cum", tuple(np.concatenate(([0.0], np.cumsum(seg)))))

    def __call__(self, t: float) -> float:
        return float(np.interp(t, self.knots, self.values))

    def _integral_from_first_knot(self, t: float) -> float:
        k = self.knots
        if t <= k[0]:
            return self.values[0] * (t - k[0])
        if t >= k[-1]:
            return self._cum[-1] + self.values[-1] * (t - k[-1])
        i = int(np.searchsorted(k, t, side="right")) - 1
        dt = t - k[i]
        vt = self(t)
        return self._cum[i] + 0.5 * (self.values[i] + vt) * dt

    def cumulative(self, t: float) -> float:
        return self._integral_from_first_knot(t) - self._integral_from_first_knot(0.0)

    def exp_weighted(self, r: float, t: float) -> float:
        if t == 0.0:
            return 0.0
        if r == 0.0:
            return self.cumulative(t)
        # exact per linear segment: int e^{r eta}(v0 + m(eta-t0)) d eta
        lo, hi, sign = (0.0, t, 1.0) if t >= 0.0 else (t, 0.0, -1.0)
        pts = [lo] + [k for k in self.knots if lo < k < hi] + [hi]
        total = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            va, vb = self(a), self(b)
            m = (vb - va) / (b - a)
            ea, eb = math.exp(r * a), math.exp(r * b)
            total += (eb * vb - ea * va) / r - m * (eb - ea) / (r * r)
        return sign * total

    def to_json(self) -> dict:
        return {"kind": "sampled", "knots": list(self.knots), "values": list(self.values)}


_KINDS = {
    "constant": lambda d: Constant(float(d["value"])),
    "cosine": lambda d: Cosine(float(d["amplitude"]), float(d["omega"]),
                               float(d.get("offset", 0.0))),
    "ramp": lambda d: Ramp(float(d["rate"])),
    "sampled": lambda d: Sampled(tuple(d["knots"]), tuple(d["values"])),
}


def signal_from_json(doc: dict) -> TimeSignal:
    try:
        kind = doc["kind"]
    except (TypeError, KeyError):
        raise ValueError(f"time signal document needs a 'kind' field, got {doc!r}")
    try:
        return _KINDS[kind](doc)
    except KeyError:
        raise ValueError(f"unknown time signal kind {kind!r}")
