"""Device reductions: uptake kinetics, outer profiles, regime closed forms."""
from __future__ import annotations

import json
import math
import warnings

import numpy as np
import pytest

from chemowave.characteristics import (
    CharacteristicSolution,
    FrontBlowup,
    front_position,
    outer_density,
)
from chemowave.microdevice import (
    REGIMES,
    DimensionalParams,
    Hill,
    MichaelisMenten,
    MicrodeviceSpec,
    build_transport_problem,
    chemo_profile,
    closed_form_density,
    closed_form_front,
    microdevice_from_json,
    nondimensionalize,
    uptake_per_cell,
    vprofile_from_json,
)
from chemowave.model import (
    ConstantGrowth,
    CoshProfile,
    DomainError,
    LinearInV,
    LinearInX,
    Separable,
    SinhProfile,
    Uniform,
    growth_from_json,
    validate_spec,
)
from chemowave.signals import Constant, Cosine, Ramp

RL = math.sqrt(0.1)


def md_make(regime, lam=0.1, psi1=0.0, psi2=None, m0=1.0, u0=0.05,
            t_end=2.0 / 3.0, normalized=False, pi2=1.0) -> MicrodeviceSpec:
    psi2 = Constant(1.0) if psi2 is None else psi2
    return MicrodeviceSpec(
        pi1=1e-4, pi2=pi2, pi3=100.0, pi4=1.0, lam=lam, regime=regime,
        psi1=Constant(psi1), psi2=psi2,
        m=LinearInV(m0, None), u0=Uniform(u0), t_end=t_end,
        normalized=normalized,
    )


# ===== uptake kinetics =====


def test_uptake_examples():
    assert uptake_per_cell(2.0, MichaelisMenten(2.0)) == 0.5
    assert uptake_per_cell(0.0, MichaelisMenten(1.0)) == 0.0
    assert uptake_per_cell(3.0, Hill(1.0, 2.0)) == pytest.approx(0.9, abs=1e-15)


def test_uptake_vectorized_and_saturating():
    vals = uptake_per_cell(np.array([0.0, 1.0, 1e9]), MichaelisMenten(1.0))
    assert vals[0] == 0.0
    assert vals[1] == pytest.approx(0.5, abs=1e-15)
    assert 0.999 < vals[2] < 1.0
    assert np.all(np.diff(vals) > 0)


def test_uptake_rejects_negative_concentration():
    with pytest.raises(DomainError, match="v >= 0"):
        uptake_per_cell(-0.1, MichaelisMenten(1.0))


@pytest.mark.parametrize("bad", [lambda: MichaelisMenten(0.0),
                                 lambda: Hill(0.0, 2.0),
                                 lambda: Hill(1.0, 0.0)])
def test_kinetics_constructor_guards(bad):
    with pytest.raises(ValueError):
        bad()


# ===== dimensional collapse =====


def unit_params(**overrides) -> DimensionalParams:
    base = dict(d_cell=1e-4, chi=1.0, d_agent=100.0, growth_rate=1.0,
                uptake_rate=1.0, carrying_density=1.0, agent_scale=1.0,
                length=1.0)
    base.update(overrides)
    return DimensionalParams(**base)


def test_dimensional_params_must_be_positive():
    with pytest.raises(ValueError, match="growth_rate"):
        unit_params(growth_rate=0.0)


def test_nondimensionalize_groups_and_lam():
    md = nondimensionalize(
        unit_params(), "HighNutrient", psi1=Constant(0.0), psi2=Constant(1.0),
        m=ConstantGrowth(1.0), u0=Uniform(0.05), uptake_scale=10.0,
    )
    assert (md.pi1, md.pi2, md.pi3, md.pi4) == (1e-4, 1.0, 100.0, 1.0)
    assert md.lam == pytest.approx(0.1, abs=1e-15)

    linear = nondimensionalize(
        unit_params(), "LowNutrientGradient", psi1=Constant(0.0),
        psi2=Constant(1.0), m=ConstantGrowth(1.0), u0=Uniform(0.05),
        uptake_scale=10.0, k_m=1.0,
    )
    assert linear.lam == pytest.approx(0.1, abs=1e-15)


def test_nondimensionalize_requires_uptake_constants():
    kw = dict(psi1=Constant(0.0), psi2=Constant(1.0),
              m=ConstantGrowth(1.0), u0=Uniform(0.05))
    with pytest.raises(ValueError, match="uptake_scale"):
        nondimensionalize(unit_params(), "HighNutrient", **kw)
    with pytest.raises(ValueError, match="k_m"):
        nondimensionalize(unit_params(), "LowNutrientSymmetric",
                          uptake_scale=10.0, **kw)
    with pytest.raises(ValueError, match="unknown regime"):
        nondimensionalize(unit_params(), "Saturated", uptake_scale=1.0, **kw)


# ===== outer agent profiles =====


def test_chemo_profile_weak_is_affine():
    md = md_make("WeakConsumption", lam=0.0)
    xs = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(chemo_profile(md, 0.3, xs), xs, atol=1e-15)


def test_chemo_profile_high_reduces_to_affine_at_zero_lam():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # lam window notice
        md = md_make("HighNutrient", lam=1e-16)
    xs = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(chemo_profile(md, 0.3, xs), xs, atol=1e-12)


def test_chemo_profile_low_nutrient_shapes():
    md = md_make("LowNutrientGradient")
    assert chemo_profile(md, 0.5, 1.0) == pytest.approx(math.sinh(RL), abs=1e-15)
    sym = md_make("LowNutrientSymmetric", normalized=True)
    assert chemo_profile(sym, 0.5, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert chemo_profile(sym, 0.5, 0.0) == pytest.approx(1.0 / math.cosh(RL),
                                                         abs=1e-15)
    norm = md_make("LowNutrientGradient", normalized=True)
    assert chemo_profile(norm, 0.5, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_chemo_profile_warns_on_negative_dip():
    # quadratic profile dips below zero when psi2 - psi1 < lam/2
    md = md_make("HighNutrient", lam=0.5, psi2=Constant(0.1))
    with pytest.warns(UserWarning, match="dips negative"):
        chemo_profile(md, 0.0, np.linspace(0.0, 1.0, 11))


def test_k_eff_tracks_normalization():
    assert md_make("LowNutrientGradient").k_eff == 1.0
    norm = md_make("LowNutrientGradient", normalized=True)
    assert norm.k_eff == pytest.approx(1.0 / math.sinh(RL), rel=1e-15)
    sym = md_make("LowNutrientSymmetric", normalized=True)
    assert sym.k_eff == pytest.approx(1.0 / math.cosh(RL), rel=1e-15)


def test_wall_values_mirror_left_wall():
    sym = md_make("LowNutrientSymmetric")
    assert sym.wall_values(0.3)[0] is None
    grad = md_make("LowNutrientGradient")
    assert grad.wall_values(0.3) == (0.0, pytest.approx(math.sinh(RL)))


def test_uptake_kind_per_regime():
    kinds = {r: md_make(r, lam=0.0 if r == "WeakConsumption" else 0.1).uptake_kind
             for r in REGIMES}
    assert kinds == {
        "WeakConsumption": "zero",
        "HighNutrient": "constant",
        "LowNutrientGradient": "linear",
        "LowNutrientSymmetric": "linear",
    }


# ===== spec construction guards =====


def test_spec_guards():
    with pytest.raises(ValueError, match="unknown regime"):
        md_make("Anything")
    with pytest.raises(ValueError, match="pi2"):
        md_make("WeakConsumption", lam=0.0, pi2=-1.0)
    with pytest.raises(ValueError, match="low-nutrient"):
        md_make("LowNutrientGradient", lam=0.0)
    with pytest.raises(ValueError, match="t_end"):
        md_make("WeakConsumption", lam=0.0, t_end=0.0)
    md_make("WeakConsumption", lam=0.0, pi2=0.0)  # chemotaxis off is valid


def test_spec_warnings():
    with pytest.warns(UserWarning, match="quasi-steady"):
        MicrodeviceSpec(pi1=1e-4, pi2=1.0, pi3=2.0, pi4=1.0, lam=0.0,
                        regime="WeakConsumption", psi1=Constant(0.0),
                        psi2=Constant(1.0), m=ConstantGrowth(1.0),
                        u0=Uniform(0.05))
    with pytest.warns(UserWarning, match="order one"):
        md_make("HighNutrient", lam=500.0)


def test_linear_growth_rebinds_to_own_profile():
    md = md_make("LowNutrientGradient", normalized=True)
    assert isinstance(md.m, LinearInV)
    assert md.m.v_profile == md.outer_profile


# ===== transport problem construction =====


def test_build_transport_problem_fields():
    high = build_transport_problem(md_make("HighNutrient"))
    assert isinstance(high.alpha, LinearInX)
    assert high.alpha.a(0.0) == pytest.approx(0.1, abs=1e-15)
    assert high.alpha.b(0.0) == pytest.approx(0.95, abs=1e-15)

    weak = build_transport_problem(md_make("WeakConsumption", lam=0.0))
    assert weak.alpha.value(0.2, 0.7) == pytest.approx(1.0, abs=1e-15)

    grad = build_transport_problem(md_make("LowNutrientGradient"))
    assert isinstance(grad.alpha, Separable)
    assert isinstance(grad.alpha.f, CoshProfile)

    sym = build_transport_problem(md_make("LowNutrientSymmetric"))
    assert isinstance(sym.alpha.f, SinhProfile)

    assert validate_spec(high).ok


# ===== regime closed forms against the characteristic fallback =====

FRONT_CASES = {
    "weak": lambda: md_make("WeakConsumption", lam=0.0),
    "weak-osc": lambda: md_make("WeakConsumption", lam=0.0,
                                psi2=Cosine(1.0, 10 * math.pi, 1.0)),
    "weak-ramp": lambda: md_make("WeakConsumption", lam=0.0, psi2=Ramp(1.0)),
    "high": lambda: md_make("HighNutrient"),
    "high-ramp": lambda: md_make("HighNutrient", psi2=Ramp(1.0)),
    "high-osc": lambda: md_make("HighNutrient", psi2=Cosine(1.0, 10 * math.pi, 1.0)),
    "gradient": lambda: md_make("LowNutrientGradient"),
    "gradient-norm": lambda: md_make("LowNutrientGradient", normalized=True),
    "symmetric": lambda: md_make("LowNutrientSymmetric"),
    "symmetric-norm": lambda: md_make("LowNutrientSymmetric", normalized=True),
}


@pytest.mark.parametrize("case", sorted(FRONT_CASES))
def test_closed_form_front_matches_characteristics(case):
    md = FRONT_CASES[case]()
    cs = CharacteristicSolution(build_transport_problem(md))
    for t in np.linspace(0.0, md.t_end, 50):
        assert closed_form_front(md, float(t)) == pytest.approx(
            front_position(cs, float(t)), abs=1e-8)


def test_front_examples():
    high = md_make("HighNutrient")
    assert closed_form_front(high, 2.0 / 3.0) == pytest.approx(
        9.5 * math.expm1(0.1 * 2.0 / 3.0), abs=1e-14)
    grad = md_make("LowNutrientGradient")
    assert closed_form_front(grad, 2.0 / 3.0) == pytest.approx(
        0.21097484627515187, abs=1e-12)
    assert closed_form_front(md_make("LowNutrientSymmetric"), 0.37) == 0.0
    weak = md_make("WeakConsumption", lam=0.0, t_end=2.0)
    assert closed_form_front(weak, 1.5) == 1.0  # clamped at the far wall
    assert closed_form_front(weak, 1.5, clamp=False) == pytest.approx(1.5)
    with pytest.raises(DomainError):
        closed_form_front(weak, -0.1)


def test_front_blowup_consistent_between_routes():
    md = md_make("LowNutrientGradient", pi2=40.0, t_end=2.0)
    cs = CharacteristicSolution(build_transport_problem(md))
    with pytest.raises(FrontBlowup) as closed:
        closed_form_front(md, 1.5)
    with pytest.raises(FrontBlowup):
        front_position(cs, 1.5)
    # theta = pi/4 at T = pi / (2 k lam)
    assert closed.value.critical_T == pytest.approx(math.pi / 8.0, abs=1e-12)


# ===== closed-form densities =====


def test_weak_density_example():
    md = md_make("WeakConsumption", lam=0.0)
    assert closed_form_density(md, 0.4, 0.8) == pytest.approx(
        0.05 * math.exp(0.24), abs=1e-15)
    assert closed_form_density(md, 0.4, 0.39) == 0.0
    assert closed_form_density(md, 0.0, 0.5) == 0.05
    with pytest.raises(DomainError):
        closed_form_density(md, -0.1, 0.5)


def test_density_fallback_used_for_general_growth():
    md = md_make("WeakConsumption", lam=0.0)
    general = MicrodeviceSpec(
        pi1=1e-4, pi2=1.0, pi3=100.0, pi4=1.0, lam=0.0,
        regime="WeakConsumption", psi1=Constant(0.0), psi2=Constant(1.0),
        m=ConstantGrowth(1.0), u0=Uniform(0.05), t_end=2.0 / 3.0,
    )
    cs = CharacteristicSolution(build_transport_problem(general))
    got = closed_form_density(general, 0.5, 0.8)
    assert got == pytest.approx(outer_density(cs, 0.5, 0.8), rel=1e-12)
    # and the quadrature differs from the small-u0 shortcut at finite u0
    assert got != pytest.approx(closed_form_density(md, 0.5, 0.8), rel=1e-4)


def small_u0_gap(make, u0: float, t: float = 0.5) -> float:
    md = make(u0)
    cs = CharacteristicSolution(build_transport_problem(md))
    x0 = closed_form_front(md, t)
    rel = 0.0
    for x in np.linspace(min(x0 + 0.02, 0.9), 0.95, 7):
        a = closed_form_density(md, t, float(x))
        b = outer_density(cs, t, float(x))
        rel = max(rel, abs(a - b) / abs(b))
    return rel


@pytest.mark.parametrize("case, make", [
    ("weak", lambda u0: md_make("WeakConsumption", lam=0.0, u0=u0)),
    ("weak-psi1", lambda u0: md_make("WeakConsumption", lam=0.0, u0=u0, psi1=0.25)),
    ("gradient-norm", lambda u0: md_make("LowNutrientGradient", u0=u0,
                                         normalized=True)),
    ("symmetric", lambda u0: md_make("LowNutrientSymmetric", u0=u0)),
    ("high-const", lambda u0: md_make("HighNutrient", u0=u0)),
])
def test_density_error_scales_linearly_in_u0(case, make):
    # the shortcut drops the O(u0^2) crowding term, so halving u0 halves
    # the relative gap to the exact quadrature
    coarse = small_u0_gap(make, 0.02)
    fine = small_u0_gap(make, 0.01)
    assert 0.35 <= fine / coarse <= 0.65


def test_symmetric_density_continuous_at_mirror_wall():
    md = md_make("LowNutrientSymmetric", u0=0.01)
    at_wall = closed_form_density(md, 0.5, 0.0)
    near_wall = closed_form_density(md, 0.5, 1e-9)
    assert at_wall == pytest.approx(near_wall, abs=1e-12)
    cs = CharacteristicSolution(build_transport_problem(md))
    assert at_wall == pytest.approx(outer_density(cs, 0.5, 0.0), rel=2e-2)


@pytest.mark.parametrize("drive", [Constant(1.0), Ramp(1.0)])
def test_high_series_error_quarters_when_lam_halves(drive):
    errs = []
    with warnings.catch_warnings():
        # a ramp drive starts below lam/2, so the dip notice is expected
        warnings.simplefilter("ignore", UserWarning)
        for lam in (0.2, 0.1):
            make = lambda u0, lam=lam: md_make("HighNutrient", lam=lam,
                                               psi2=drive, u0=u0)
            errs.append(small_u0_gap(make, 1e-6))
    assert 0.175 <= errs[1] / errs[0] <= 0.325


def test_high_nutrient_continuous_at_zero_lam():
    weak = md_make("WeakConsumption", lam=0.0)
    front_gap, dens_gap = [], []
    for lam in (0.02, 0.01):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # lam window notice
            high = md_make("HighNutrient", lam=lam)
        front_gap.append(abs(closed_form_front(high, 0.5)
                             - closed_form_front(weak, 0.5)))
        dens_gap.append(abs(closed_form_density(high, 0.5, 0.8)
                            - closed_form_density(weak, 0.5, 0.8)))
    assert 0.35 <= front_gap[1] / front_gap[0] <= 0.65
    assert 0.35 <= dens_gap[1] / dens_gap[0] <= 0.65


def test_gradient_density_positive_inside_device():
    # the log argument stays positive for every x while x*(t) <= 1
    md = md_make("LowNutrientGradient", t_end=3.0)
    for t in np.linspace(0.0, 3.0, 60):
        try:
            raw = closed_form_front(md, float(t), clamp=False)
        except FrontBlowup:
            break
        if raw > 1.0:
            break
        theta = 0.5 * md.k_eff * md.lam * md.psi2.cumulative(float(t))
        s_val = math.tan(theta)
        xs = np.linspace(0.0, 1.0, 33)
        den = (1.0 - s_val * s_val) + 2.0 * s_val * np.sinh(RL * xs)
        assert np.all(den > 0.0)


# ===== serialization =====


@pytest.mark.parametrize("build", [
    lambda: md_make("HighNutrient"),
    lambda: md_make("LowNutrientGradient", normalized=True),
    lambda: md_make("WeakConsumption", lam=0.0,
                    psi2=Cosine(1.0, 10 * math.pi, 1.0)),
])
def test_spec_json_round_trip(build):
    md = build()
    doc = json.loads(json.dumps(md.to_json()))
    assert microdevice_from_json(doc) == md


def test_profile_and_growth_round_trip():
    md = md_make("LowNutrientGradient")
    assert vprofile_from_json(md.outer_profile.to_json()) == md.outer_profile
    assert growth_from_json(md.m.to_json()) == md.m
    with pytest.raises(ValueError, match="unknown chemoattractant"):
        vprofile_from_json({"kind": "affine"})
