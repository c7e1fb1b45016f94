"""Shared builders for the test suite."""
from __future__ import annotations

import json
from importlib.resources import files

import pytest

from chemowave.model import (
    ConstantGrowth,
    LinearInX,
    ProblemSpec,
    Separable,
    SpatialDomain,
    Uniform,
)
from chemowave.signals import Constant, Cosine

PRESET_NAMES = (
    "linear", "oscillatory", "quad_zero", "quad_neg", "quad_pos",
    "exponential", "device_weak", "device_high", "device_gradient",
    "device_symmetric",
)


def preset_doc(name: str) -> dict:
    return json.loads((files("chemowave") / "presets" / f"{name}.json").read_text())


def linear_spec(n: int = 256, t_end: float = 1.0, length: float = 4.0) -> ProblemSpec:
    """a = 2, b = 1 linear-in-x field with unit growth."""
    return ProblemSpec(
        domain=SpatialDomain(length, n),
        diffusion=1e-3,
        alpha=LinearInX(Constant(2.0), Constant(1.0)),
        beta=ConstantGrowth(1.0),
        u0=Uniform(0.05),
        t_end=t_end,
    )


def separable_spec(f, g=None, n: int = 256, t_end: float = 1.0,
                   length: float = 4.0, u0: float = 0.05) -> ProblemSpec:
    return ProblemSpec(
        domain=SpatialDomain(length, n),
        diffusion=1e-3,
        alpha=Separable(f, g if g is not None else Constant(1.0)),
        beta=ConstantGrowth(1.0),
        u0=Uniform(u0),
        t_end=t_end,
    )


def oscillatory_spec(n: int = 256) -> ProblemSpec:
    """cos(10 t) (x + 3) drive on the unit interval."""
    import math
    return ProblemSpec(
        domain=SpatialDomain(1.0, n),
        diffusion=1e-3,
        alpha=LinearInX(Cosine(1.0, 10.0), Cosine(3.0, 10.0)),
        beta=ConstantGrowth(1.0),
        u0=Uniform(0.05),
        t_end=2.0 * math.pi / 10.0,
    )


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(20260815)
