"""Analytical and numerical tools for chemotaxis waves in heterogeneous
chemoattractant fields: characteristic maps, front trajectories, matched
layer approximations, oscillatory asymptotics, a finite-volume reference
solver, and a comparison harness."""

__version__ = "0.1.0"

from . import (  # noqa: F401
    characteristics,
    harness,
    layer,
    microdevice,
    model,
    oscillatory,
    pde,
    signals,
)
