"""Inner transition layer and the composite density approximation.

The front is a smoothed step of width O(sqrt(D t)).  In layer coordinates the
leading-order inner profile is the error-function ramp

    U(X, tau) = (1 + erf(X / (2 sqrt(tau)))) / 2,

and gluing it to the outer solution gives a composite density that is
uniformly valid away from the right boundary:

    x <  x*(t):  u_front/2 * (erf(xi) + 1)
    x >= x*(t):  u_front/2 * (erf(xi) - 1) + u_outer(t, x)

with xi = (x - x*(t)) / (2 sqrt(t D)) and u_front the outer density carried
by the separating characteristic.  Both branches meet at u_front/2 because
G(t; x*(t)) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .characteristics import (
    CharacteristicSolution,
    FrontBlowup,
    front_plateau,
    outer_density,
)

__all__ = ["CompositeSolution", "inner_profile", "composite_density", "composite_profile"]


def inner_profile(X: float, tau: float):
    """Leading-order layer profile in inner variables; 1/2 at X = 0."""
    if tau <= 0.0:
        raise ValueError(f"inner_profile requires tau > 0, got {tau}")
    return 0.5 * (1.0 + erf(np.asarray(X) / (2.0 * math.sqrt(tau)))) if np.ndim(X) \
        else 0.5 * (1.0 + float(erf(X / (2.0 * math.sqrt(tau)))))


@dataclass(frozen=True)
class CompositeSolution:
    """Outer solution plus erf layer for a specific diffusion level.

    The diffusion only sets the layer width; the outer maps come from the
    attached characteristic solution.
    """

    cs: CharacteristicSolution
    diffusion: float

    def __post_init__(self):
        if self.diffusion < 0.0:
            raise ValueError("diffusion must be >= 0")

    def density(self, t: float, x: float) -> float:
        return composite_density(self, t, x)


def composite_density(comp: CompositeSolution, t: float, x: float) -> float:
    """Uniformly valid density at (t, x); requires t > 0.

    The layer is centered on the raw separating characteristic F(t; 0): when
    the drive pulls it below x = 0 the erf tail (not a clamped step at 0) is
    what the full solution relaxes to, and once it leaves through x = L only
    the swept state remains in the interior.
    """
    if t <= 0.0:
        raise ValueError(f"composite_density requires t > 0, got {t}")
    cs = comp.cs
    try:
        xstar = cs.map_forward(t, 0.0)
    except FrontBlowup:
        return 0.0
    u_front = front_plateau(cs, t)
    width = 2.0 * math.sqrt(t * comp.diffusion)
    if width == 0.0:
        # no layer: collapse to the outer solution
        return outer_density(cs, t, x) if x >= xstar else 0.0
    xi = (x - xstar) / width
    e = float(erf(xi))
    if x < xstar:
        return 0.5 * u_front * (e + 1.0)
    return 0.5 * u_front * (e - 1.0) + outer_density(cs, t, x)


def composite_profile(comp: CompositeSolution, t: float, xs) -> np.ndarray:
    """composite_density sampled over an array of positions."""
    return np.array([composite_density(comp, t, float(x)) for x in np.asarray(xs)])
