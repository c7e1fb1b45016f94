"""Oscillatory drives: zero-mean front excursions and ratio asymptotics.

Part 1 uses the packaged "oscillatory" preset, whose drive is a cosine in
time: the front surges forward, stalls, and returns, with zero net
displacement over a full period because the drive integral vanishes.

Part 2 looks at the plateau-ratio ODE r(t) for a cell density riding an
oscillatory chemoattractant, and compares the four closed-form
approximations against the resolved reference on their home turf:

  slow                1/omega-expansion with a WKB phase,
  fast                multiple-scales average plus an O(1/omega) ripple,
  dominant-chemotaxis growth switched off,
  dominant-growth     chemotaxis a small perturbation of the logistic arc.
"""

from __future__ import annotations

import math

import numpy as np

from chemowave.characteristics import CharacteristicSolution, front_position
from chemowave.cli import load_preset
from chemowave.model import spec_from_json
from chemowave.oscillatory import (
    APPROXIMATIONS,
    OscillatorySpec,
    r_reference,
    regime_select,
)


def excursion() -> None:
    spec = spec_from_json(load_preset("oscillatory")["spec"])
    cs = CharacteristicSolution(spec)
    period = 2.0 * math.pi / spec.alpha.a.omega
    print(f"cosine drive, period {period:.4f}")
    for frac in (0.125, 0.25, 0.375, 0.5, 0.75, 1.0):
        t = frac * period
        print(f"  t = {frac:5.3f} P  x* = {front_position(cs, t):+.6f}")
    print("  (returns to the origin: the drive integral is zero-mean)\n")


def regimes() -> None:
    cases = {
        "slow": OscillatorySpec(a=2.0, beta=3.0, omega=0.05, r_star=20.0),
        "fast": OscillatorySpec(a=2.0, beta=3.0, omega=60.0, r_star=20.0),
        "dominant-chemotaxis": OscillatorySpec(a=1.0, beta=1e-3, omega=1.0, r_star=20.0),
        "dominant-growth": OscillatorySpec(a=5e-3, beta=1.0, omega=1.0, r_star=20.0),
    }
    print(f"{'regime':>20} {'selected':>20} {'sup error':>10}")
    for name, spec in cases.items():
        ts = np.linspace(0.0, 5.0, 1001)[1:]
        approx = APPROXIMATIONS[name](spec, ts)
        ref = r_reference(spec, ts)
        err = float(np.max(np.abs(approx - ref)))
        picked, score = regime_select(spec)
        print(f"{name:>20} {picked:>20} {err:10.2e}")


if __name__ == "__main__":
    excursion()
    regimes()
