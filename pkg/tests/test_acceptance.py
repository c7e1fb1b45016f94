"""Eight end-to-end guarantees; each test prints the margins it measured.

Run with -v to get one pass/fail line per criterion.
"""
from __future__ import annotations

import dataclasses
import math
import time

import numpy as np
import pytest

from chemowave.characteristics import (
    CharacteristicSolution,
    front_position,
    outer_density,
    outer_density_small_u0,
)
from chemowave.harness import config_from_json, run_compare
from chemowave.microdevice import (
    build_transport_problem,
    closed_form_front,
    microdevice_from_json,
)
from chemowave.model import ConstantGrowth, Uniform, spec_from_json
from chemowave.oscillatory import (
    OscillatorySpec,
    r_dominant_chemotaxis,
    r_dominant_growth,
    r_reference,
    r_slow_wkb,
)
from chemowave.pde import SolverConfig, solve_cell_pde, solve_coupled, transient_decay_check
from conftest import PRESET_NAMES, preset_doc

PROBLEM_PRESETS = tuple(n for n in PRESET_NAMES if not n.startswith("device_"))
DEVICE_PRESETS = tuple(n for n in PRESET_NAMES if n.startswith("device_"))


def assert_rows_accurate(report, sup_tol=0.05, front_tol=5.0):
    assert report.failure is None, report.failure
    for row in report.rows:
        assert row.front_error <= front_tol * row.layer_width + 1e-12
        assert row.sup_error <= sup_tol * row.plateau


def test_criterion_1_linear_wave_accuracy_and_runtime():
    report = run_compare(config_from_json(preset_doc("linear")))
    assert_rows_accurate(report)
    worst = max(r.sup_error / r.plateau for r in report.rows)
    print(f"\n  linear N=1024: sup {worst:.2%} of plateau "
          f"(bar 5%), wall {report.wall_time:.1f}s (bar 10s)")
    assert report.wall_time < 10.0


def test_criterion_2_oscillatory_front_excursion_and_return():
    doc = preset_doc("oscillatory")
    period = 2.0 * math.pi / 10.0
    times = [period / 8.0, period / 4.0, 3.0 * period / 8.0,
             period / 2.0, 3.0 * period / 4.0]
    doc["times"] = times
    report = run_compare(config_from_json(doc))
    assert report.failure is None, report.failure
    D = 1e-3
    for row in report.rows:
        assert row.front_error <= 5.0 * row.layer_width + 1e-12, row.t
    half = next(r for r in report.rows if abs(r.t - period / 2.0) < 1e-12)
    return_tol = 2.0 * math.sqrt(D * half.t)
    print(f"\n  front errors {[f'{r.front_error:.1e}' for r in report.rows]}, "
          f"|x*(pi/10)| = {abs(half.front_numeric):.2e} (bar {return_tol:.2e})")
    assert abs(half.front_numeric) <= return_tol


def test_criterion_3_quadratic_branches_and_small_time_formula():
    details = []
    for name in ("quad_zero", "quad_neg", "quad_pos"):
        doc = preset_doc(name)
        report = run_compare(config_from_json(doc))
        assert_rows_accurate(report)
        f = doc["spec"]["alpha"]["f"]
        a, b, c = f["a"], f["b"], f["c"]
        disc = b * b - 4.0 * a * c
        cs = CharacteristicSolution(spec_from_json(doc["spec"]))
        for t in (0.0025, 0.005):
            exact = front_position(cs, t)
            approx = c * t / (1.0 - 0.5 * b * t)
            bound = (t * math.sqrt(abs(disc)) / 2.0) ** 2 / 3.0 + 1e-6
            rel = abs(approx - exact) / exact
            assert rel <= bound, (name, t, rel, bound)
        details.append(f"{name} rel {rel:.1e} (bar {bound:.1e})")
    print("\n  small-t formula at t=0.005: " + "; ".join(details))


def test_criterion_4_exponential_accuracy_and_density_scaling():
    doc = preset_doc("exponential")
    report = run_compare(config_from_json(doc))
    assert_rows_accurate(report)

    spec = spec_from_json(doc["spec"])

    def gap(u0val: float) -> float:
        varied = dataclasses.replace(spec, u0=Uniform(u0val))
        cs = CharacteristicSolution(varied)
        t = 0.4
        x0 = front_position(cs, t)
        worst = 0.0
        for x in np.linspace(x0 + 0.05, 0.95, 7):
            shortcut = outer_density_small_u0(cs, t, float(x))
            full = outer_density(cs, t, float(x))
            worst = max(worst, abs(shortcut - full))
        return worst

    ratio = gap(0.05) / gap(0.025)
    print(f"\n  halving u0 shrinks the shortcut gap by {ratio:.2f}x (bar 4 +- 20%)")
    assert 3.2 <= ratio <= 4.8


def test_criterion_5_oscillatory_regime_error_scalings():
    def sup_err(fn, spec, t_end, n=801):
        ts = np.linspace(0.0, t_end, n)
        return float(np.max(np.abs(np.asarray(fn(spec, ts), dtype=float)
                                   - r_reference(spec, ts))))

    def averaged_err(omega):
        spec = OscillatorySpec(2.0, 3.0, omega, 20.0)
        ts = np.linspace(0.0, 5.0, 2001)
        base = 1.0 + (spec.r_star - 1.0) * np.exp(-spec.beta * ts)
        return float(np.max(np.abs(base - r_reference(spec, ts))))

    checks = {
        "slow halves with omega": (
            lambda: sup_err(r_slow_wkb, OscillatorySpec(2.0, 3.0, 0.05, 20.0), 10.0)
            / sup_err(r_slow_wkb, OscillatorySpec(2.0, 3.0, 0.1, 20.0), 10.0),
            (0.35, 0.65)),
        "fast halves with 1/omega": (
            lambda: averaged_err(40.0) / averaged_err(20.0), (0.35, 0.65)),
        "chemotaxis scales with beta": (
            lambda: sup_err(r_dominant_chemotaxis,
                            OscillatorySpec(1.0, 0.0005, 1.0, 20.0), 5.0)
            / sup_err(r_dominant_chemotaxis,
                      OscillatorySpec(1.0, 0.001, 1.0, 20.0), 5.0),
            (0.35, 0.65)),
        "growth scales with a^2": (
            lambda: sup_err(r_dominant_growth,
                            OscillatorySpec(0.005, 1.0, 1.0, 20.0), 10.0)
            / sup_err(r_dominant_growth,
                      OscillatorySpec(0.01, 1.0, 1.0, 20.0), 10.0),
            (0.17, 0.33)),
    }
    lines = []
    for label, (measure, (lo, hi)) in checks.items():
        start = time.perf_counter()
        ratio = measure()
        elapsed = time.perf_counter() - start
        lines.append(f"{label}: {ratio:.3f} in [{lo}, {hi}] ({elapsed:.2f}s)")
        assert lo <= ratio <= hi, (label, ratio)
        assert elapsed < 1.0, (label, elapsed)
    print("\n  " + "\n  ".join(lines))


def test_criterion_6_transient_decay_rates():
    lines = []
    for mu, zeta, lam in [(0, 0, 0.0), (1, 0, 0.1), (1, 1, 0.1)]:
        report = transient_decay_check(
            mu, zeta, 100.0, lam,
            v0=lambda x: 0.3 * np.sin(math.pi * x)
            - 0.07 * np.sin(2.0 * math.pi * x),
        )
        assert report.modes == (1, 2)
        for k, rel in zip(report.modes, report.relative_errors):
            assert rel <= 0.10, (mu, zeta, k, rel)
        lines.append(f"mu={mu} zeta={zeta}: rel "
                     + ", ".join(f"{e:.1e}" for e in report.relative_errors))
    print("\n  " + "\n  ".join(lines))


def test_criterion_7_microdevice_closed_forms_and_coupled_fronts():
    lines = []
    for name in DEVICE_PRESETS:
        doc = preset_doc(name)
        md = microdevice_from_json(doc["spec"]["device"])
        cs = CharacteristicSolution(build_transport_problem(md))
        worst = 0.0
        for t in np.linspace(0.0, md.t_end, 50):
            closed = closed_form_front(md, float(t))
            worst = max(worst, abs(closed - front_position(cs, float(t))))
            if md.symmetric:
                assert closed == 0.0
                assert front_position(cs, float(t)) == 0.0
        assert worst <= 1e-8, (name, worst)

        report = run_compare(config_from_json(doc))
        assert report.failure is None, report.failure
        front_errs = []
        for row in report.rows:
            assert row.front_error <= 5.0 * row.layer_width + 1e-12, (name, row.t)
            front_errs.append(row.front_error)
        lines.append(f"{name}: routes agree to {worst:.1e}, "
                     f"PDE front err {max(front_errs):.1e}")
    print("\n  " + "\n  ".join(lines))


def test_criterion_8_conservation_positivity_and_inversion():
    # positivity on every preset, solved as configured
    min_u = math.inf
    for name in PRESET_NAMES:
        doc = preset_doc(name)
        solver = SolverConfig(n=int(doc["solver"]["n"]))
        if name in DEVICE_PRESETS:
            md = microdevice_from_json(doc["spec"]["device"])
            sol = solve_coupled(md, solver, save_times=doc["times"])
        else:
            spec = spec_from_json(doc["spec"])
            sol = solve_cell_pde(spec, solver, save_times=doc["times"])
        min_u = min(min_u, float(sol.u.min()))
        assert float(sol.u.min()) >= -1e-12, name

    # exact mass balance once growth is switched off
    worst_drift = 0.0
    for name in PROBLEM_PRESETS:
        spec = dataclasses.replace(spec_from_json(preset_doc(name)["spec"]),
                                   beta=ConstantGrowth(0.0))
        sol = solve_cell_pde(spec, SolverConfig(n=512))
        drift = abs(sol.total_mass(-1) - sol.total_mass(0)) / sol.total_mass(0)
        worst_drift = max(worst_drift, drift)
        assert drift <= 1e-12, name

    # characteristic maps invert and the even drive is time-symmetric
    rng = np.random.default_rng(20260815)
    worst_inv = 0.0
    for name in PROBLEM_PRESETS:
        spec = spec_from_json(preset_doc(name)["spec"])
        cs = CharacteristicSolution(spec)
        for _ in range(50):
            t = float(rng.uniform(0.0, spec.t_end))
            s = float(rng.uniform(0.0, 0.5))
            x = cs.map_forward(t, s)
            back = cs.map_backward(t, x)
            err = abs(back - s) / max(1.0, abs(s))
            worst_inv = max(worst_inv, err)
            assert err <= 1e-10, name

    osc = CharacteristicSolution(spec_from_json(preset_doc("oscillatory")["spec"]))
    worst_sym = 0.0
    for _ in range(50):
        t = float(rng.uniform(0.0, 2.0 * math.pi / 10.0))
        # probe right of the front, where the backward label is defined
        x = osc.map_forward(t, float(rng.uniform(0.0, 0.5)))
        worst_sym = max(worst_sym,
                        abs(osc.map_backward(t, x) - osc.map_forward(-t, x)))
    assert worst_sym <= 1e-10
    print(f"\n  min u {min_u:.1e}, mass drift {worst_drift:.1e}, "
          f"inversion {worst_inv:.1e}, even-drive symmetry {worst_sym:.1e}")
