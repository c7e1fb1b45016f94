"""Problem description layer: field evaluation, validation, serialization."""
from __future__ import annotations

import math

import numpy as np
import pytest

from chemowave.model import (
    AffineSpace,
    ConstantGrowth,
    CoshProfile,
    DomainError,
    Exponential,
    LinearInV,
    LinearInX,
    NumericSpace,
    ProblemSpec,
    Quadratic,
    SampledProfile,
    Separable,
    SinhProfile,
    SpatialDomain,
    Uniform,
    ValidationError,
    alpha_x,
    closed_form_family,
    cumulative_g,
    evaluate_alpha,
    require_valid,
    spec_from_json,
    spec_to_json,
    validate_spec,
)
from chemowave.signals import Constant, Cosine, Ramp, Sampled

from conftest import linear_spec, oscillatory_spec, separable_spec


# ===== evaluation examples =====


def test_evaluate_alpha_linear_in_x():
    spec = linear_spec()
    assert evaluate_alpha(spec, 0.3, 0.5) == pytest.approx(2.0, abs=1e-15)


def test_evaluate_alpha_separable_exponential():
    spec = separable_spec(Exponential(2.0, 0.0, 1.0))
    assert evaluate_alpha(spec, 0.0, 0.0) == pytest.approx(2.0, abs=1e-15)


def test_evaluate_alpha_oscillatory_at_half_period():
    # cos(10 t) = -1 at t = pi/10, so alpha = -(x + 3)
    spec = oscillatory_spec()
    t = math.pi / 10.0
    for x in (0.0, 0.4, 1.0):
        assert evaluate_alpha(spec, t, x) == pytest.approx(-(x + 3.0), abs=1e-12)


def test_evaluate_alpha_domain_checked():
    spec = linear_spec(t_end=1.0, length=4.0)
    with pytest.raises(DomainError):
        evaluate_alpha(spec, 1.5, 0.5)
    with pytest.raises(DomainError):
        evaluate_alpha(spec, 0.5, 4.5)
    with pytest.raises(DomainError):
        evaluate_alpha(spec, 0.5, -0.1)


def test_alpha_x_examples():
    assert alpha_x(linear_spec(), 0.2, 1.3) == pytest.approx(2.0, abs=1e-15)
    spec_q = separable_spec(Quadratic(1.0, 2.0, 1.0))
    assert alpha_x(spec_q, 0.0, 0.5) == pytest.approx(3.0, abs=1e-14)


def test_alpha_x_numeric_fallback():
    xs = np.linspace(0.0, 4.0, 4001)
    spec = separable_spec(NumericSpace(tuple(xs), tuple(2.0 * xs + 1.0)))
    assert alpha_x(spec, 0.1, 1.7) == pytest.approx(2.0, abs=1e-6)


FIELD_SPECS = [
    linear_spec(),
    oscillatory_spec(),
    separable_spec(AffineSpace(1.5, 0.3)),
    separable_spec(Quadratic(1.0, 2.0, 1.0)),
    separable_spec(Exponential(1.2, 0.4, 1.0)),
    separable_spec(CoshProfile(1.0, 0.1)),
    separable_spec(SinhProfile(1.0, 0.1)),
]


@pytest.mark.parametrize("spec", FIELD_SPECS, ids=lambda s: closed_form_family(s.alpha))
def test_alpha_x_matches_finite_differences(spec, rng):
    """Analytic slope vs centered difference at 100 random interior points."""
    h = 1e-6
    ts = rng.uniform(0.0, spec.t_end, size=100)
    xs = rng.uniform(0.1, spec.domain.length - 0.1, size=100)
    for t, x in zip(ts, xs):
        fd = (evaluate_alpha(spec, t, x + h) - evaluate_alpha(spec, t, x - h)) / (2 * h)
        got = alpha_x(spec, float(t), float(x))
        assert abs(got - fd) <= 1e-6 * (1.0 + abs(got))


def test_cumulative_g_examples():
    assert cumulative_g(Constant(1.0), 0.4) == pytest.approx(0.4, abs=1e-15)
    assert cumulative_g(Cosine(1.0, 10.0), math.pi / 10.0) == pytest.approx(0.0, abs=1e-15)
    assert cumulative_g(Ramp(1.0), 2.0) == pytest.approx(2.0, abs=1e-15)
    with pytest.raises(DomainError):
        cumulative_g(Constant(1.0), -0.2)


def test_evaluation_is_pure():
    spec = oscillatory_spec()
    a1 = evaluate_alpha(spec, 0.123456, 0.7)
    a2 = evaluate_alpha(spec, 0.123456, 0.7)
    assert a1 == a2  # bit-identical


# ===== family tags =====


@pytest.mark.parametrize("spec, family", [
    (linear_spec(), "linear_in_x"),
    (separable_spec(AffineSpace(1.0, 0.5)), "separable_affine"),
    (separable_spec(Quadratic(1.0, 2.0, 1.0)), "separable_quadratic"),
    (separable_spec(Exponential(2.0, 0.0, 1.0)), "separable_exponential"),
    (separable_spec(CoshProfile(1.0, 0.1)), "separable_cosh"),
    (separable_spec(SinhProfile(1.0, 0.1)), "separable_sinh"),
])
def test_closed_form_family(spec, family):
    assert closed_form_family(spec.alpha) == family


def test_numeric_family_tag():
    xs = np.linspace(0.0, 4.0, 64)
    spec = separable_spec(NumericSpace(tuple(xs), tuple(np.tanh(xs))))
    assert closed_form_family(spec.alpha) == "numeric_fallback"


# ===== validation =====


def test_validate_spec_ok():
    rep = validate_spec(linear_spec())
    assert rep.ok
    assert rep.family == "linear_in_x"
    assert rep.violations == ()
    assert rep.warnings == ()


def test_validate_spec_density_above_capacity():
    spec = linear_spec()
    bad = ProblemSpec(spec.domain, spec.diffusion, spec.alpha, spec.beta,
                      Uniform(1.5), spec.t_end)
    rep = validate_spec(bad)
    assert not rep.ok
    assert any("above carrying capacity" in v for v in rep.violations)
    with pytest.raises(ValidationError):
        require_valid(bad)


def test_validate_spec_negative_density():
    spec = linear_spec()
    bad = ProblemSpec(spec.domain, spec.diffusion, spec.alpha, spec.beta,
                      Uniform(-0.1), spec.t_end)
    assert any("negative" in v for v in validate_spec(bad).violations)


def test_validate_spec_large_diffusion_warns():
    spec = linear_spec()
    loose = ProblemSpec(spec.domain, 0.5, spec.alpha, spec.beta, spec.u0, spec.t_end)
    rep = validate_spec(loose)
    assert rep.ok  # a warning, not a violation
    assert any("outer approximation" in w for w in rep.warnings)


def test_validate_spec_negative_growth():
    spec = linear_spec()
    bad = ProblemSpec(spec.domain, spec.diffusion, spec.alpha,
                      ConstantGrowth(-1.0), spec.u0, spec.t_end)
    assert any("growth" in v for v in validate_spec(bad).violations)


def test_domain_constructor_guards():
    with pytest.raises(ValueError):
        SpatialDomain(-1.0, 128)
    with pytest.raises(ValueError):
        SpatialDomain(1.0, 4)


# ===== serialization =====


JSON_SPECS = [
    linear_spec(),
    oscillatory_spec(),
    separable_spec(AffineSpace(1.5, 0.3), g=Ramp(0.5)),
    separable_spec(Quadratic(2.0, 2.0, 2.0), g=Cosine(1.0, 3.0)),
    separable_spec(Exponential(2.0, 0.0, 1.0)),
    separable_spec(CoshProfile(1.0, 0.1), g=Sampled((0.0, 1.0), (1.0, 0.5))),
    separable_spec(SinhProfile(0.7, 0.2)),
]


@pytest.mark.parametrize("spec", JSON_SPECS, ids=lambda s: closed_form_family(s.alpha))
def test_spec_json_round_trip_lossless(spec):
    back = spec_from_json(spec_to_json(spec))
    assert back == spec
    # values agree bit for bit after the round trip
    for frac_t, frac_x in [(0.0, 0.0), (0.5, 0.3), (1.0, 0.9)]:
        t, x = frac_t * spec.t_end, frac_x * spec.domain.length
        assert evaluate_alpha(back, t, x) == evaluate_alpha(spec, t, x)
    assert spec_to_json(back) == spec_to_json(spec)


def test_sampled_profile_round_trip():
    xs = np.linspace(0.0, 4.0, 33)
    spec = ProblemSpec(
        domain=SpatialDomain(4.0, 64),
        diffusion=1e-3,
        alpha=LinearInX(Constant(1.0), Constant(0.5)),
        beta=ConstantGrowth(1.0),
        u0=SampledProfile(tuple(xs), tuple(0.02 + 0.01 * np.sin(xs))),
        t_end=1.0,
    )
    back = spec_from_json(spec_to_json(spec))
    assert back == spec
    assert back.u0(1.234) == spec.u0(1.234)


def test_linear_in_v_growth_serialization():
    from chemowave.microdevice import OuterChemoProfile
    prof = OuterChemoProfile("WeakConsumption", 0.0, Constant(0.0), Constant(1.0), False)
    growth = LinearInV(1.0, prof)
    doc = growth.to_json()
    assert doc["kind"] == "linear_in_v"
    assert growth.value(0.3, 0.25) == pytest.approx(0.25, abs=1e-15)


def test_spec_json_rejects_unknown_kind():
    doc = spec_to_json(linear_spec())
    doc["alpha"]["kind"] = "mystery"
    with pytest.raises(ValueError):
        spec_from_json(doc)
