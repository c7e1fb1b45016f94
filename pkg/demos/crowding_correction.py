"""How much the logistic crowding factor matters at small inoculum.

Along a characteristic the density is

    u = u0 exp(P) / (1 + u0 J),

where P accumulates growth and J is the crowding integral.  Dropping the
denominator gives the cheap small-u0 shortcut u ~ u0 exp(P).  The absolute
gap between the two is u0**2 J exp(P) + O(u0**3), so halving the inoculum
should quarter the absolute gap while only halving the relative one.  This
script measures both scalings on the exponential-drive preset.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from chemowave.characteristics import (
    CharacteristicSolution,
    outer_density,
    outer_density_small_u0,
)
from chemowave.cli import load_preset
from chemowave.model import Uniform, spec_from_json


def sup_gap(u0: float, t: float = 0.4, relative: bool = False) -> float:
    spec = spec_from_json(load_preset("exponential")["spec"])
    spec = dataclasses.replace(spec, u0=Uniform(u0))
    cs = CharacteristicSolution(spec)
    xs = cs.map_forward(t, 0.0) + np.linspace(0.05, 0.6, 7)
    worst = 0.0
    for x in xs:
        full = outer_density(cs, t, float(x))
        cheap = outer_density_small_u0(cs, t, float(x))
        gap = abs(cheap - full)
        worst = max(worst, gap / full if relative else gap)
    return worst


def main() -> None:
    print(f"{'u0':>8} {'abs gap':>12} {'rel gap':>12}")
    levels = [0.1, 0.05, 0.025, 0.0125]
    gaps = [(sup_gap(u0), sup_gap(u0, relative=True)) for u0 in levels]
    for u0, (a, r) in zip(levels, gaps):
        print(f"{u0:8.4f} {a:12.4e} {r:12.4e}")
    print()
    for (u0, (a1, r1)), (a2, r2) in zip(zip(levels, gaps), gaps[1:]):
        print(f"u0 {u0:g} -> {u0 / 2:g}: absolute gap ratio {a2 / a1:.3f} "
              f"(expect ~0.25), relative {r2 / r1:.3f} (expect ~0.5)")


if __name__ == "__main__":
    main()
