"""Front trajectories for the three branches of a quadratic drive.

For a steady quadratic drive alpha(x) = a + b x + c x**2 the front obeys
dx*/dt = alpha(x*), and the closed form depends on the sign of the
discriminant b**2 - 4 a c:

  > 0  two real stagnation points; the front relaxes along a tanh arc,
  = 0  a double root; algebraic 1/(1 - t)-type approach,
  < 0  no real roots; the trajectory is a shifted tangent and escapes to
       infinity in finite time (FrontBlowup carries the critical time).

All three branches share the same small-time expansion
x*(t) ~ a t / (1 - b t / 2), checked below against the exact maps.
"""

from __future__ import annotations

import numpy as np

from chemowave.characteristics import (
    CharacteristicSolution,
    FrontBlowup,
    front_position,
    front_speed,
)
from chemowave.cli import load_preset
from chemowave.model import spec_from_json


def branch(name: str) -> None:
    spec = spec_from_json(load_preset(name)["spec"])
    f = spec.alpha.f
    disc = f.b * f.b - 4.0 * f.a * f.c
    cs = CharacteristicSolution(spec)

    print(f"{name}: alpha(x) = {f.a:g} + {f.b:g} x + {f.c:g} x^2, "
          f"discriminant = {disc:g}")
    for t in (0.05, 0.1, 0.2, 0.4):
        try:
            x = front_position(cs, t)
            v = front_speed(cs, t)
            print(f"  t = {t:4.2f}  x* = {x:9.6f}  speed = {v:8.4f}")
        except FrontBlowup as exc:
            print(f"  t = {t:4.2f}  blown up ({exc})")
            break

    # shared small-time behavior, independent of the discriminant sign
    for t in (0.0025, 0.005):
        approx = f.a * t / (1.0 - 0.5 * f.b * t)
        exact = front_position(cs, t)
        print(f"  small t = {t:.4f}: exact {exact:.8f} vs a t/(1 - b t/2) "
              f"{approx:.8f} (gap {abs(exact - approx):.2e})")
    print()


def main() -> None:
    for name in ("quad_pos", "quad_zero", "quad_neg"):
        branch(name)

    # the complex-root branch escapes once the tangent argument hits pi/2
    spec = spec_from_json(load_preset("quad_neg")["spec"])
    cs = CharacteristicSolution(spec)
    ts = np.linspace(0.0, 2.0, 801)
    alive = None
    for t in ts[1:]:
        try:
            front_position(cs, float(t))
            alive = float(t)
        except FrontBlowup as exc:
            print(f"quad_neg front survives to t = {alive:.4f}, "
                  f"blows up by t = {t:.4f}")
            print(f"  reported critical drive integral T = {exc.critical_T:.6f}")
            break


if __name__ == "__main__":
    main()
