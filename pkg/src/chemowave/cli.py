"""Command line front end: solve, compare, sweep, export tables.

Subcommands mirror the library operations one to one.  Exit codes: 0 on
success, 1 for configuration or input problems, 2 for numeric failures
(solver breakdown, front blowup), 3 when `compare --enforce` finds the
tolerances violated.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib.resources import files
from pathlib import Path

import numpy as np

from . import harness, microdevice, model, oscillatory, pde
from .characteristics import CharacteristicSolution, FrontBlowup, front_trajectory
from .layer import CompositeSolution, composite_profile

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2
EXIT_ACCEPTANCE = 3


# ===== document loading =====


def preset_names() -> list[str]:
    root = files("chemowave") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> dict:
    path = files("chemowave") / "presets" / f"{name}.json"
    if not path.is_file():
        raise ValueError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return json.loads(path.read_text())


def _load_doc(args) -> dict:
    if getattr(args, "preset", None):
        return load_preset(args.preset)
    if getattr(args, "config", None):
        return json.loads(Path(args.config).read_text())
    raise ValueError("either --config or --preset is required")


def _spec_solver_times(doc: dict):
    """Accept an experiment, bare problem, or device document."""
    if "spec" in doc:
        cfg = harness.config_from_json(doc)
        return cfg.spec, cfg.solver, cfg.times
    if "device" in doc:
        spec = microdevice.microdevice_from_json(doc["device"])
    elif "regime" in doc:
        spec = microdevice.microdevice_from_json(doc)
    else:
        spec = model.spec_from_json(doc)
    return spec, pde.SolverConfig(), (spec.t_end,)


def _times_override(args, times):
    if getattr(args, "times", None):
        return tuple(float(v) for v in args.times.split(","))
    return times


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _analytic_pieces(spec, solver):
    if isinstance(spec, microdevice.MicrodeviceSpec):
        transport = microdevice.build_transport_problem(spec, diffusion=spec.pi1)
        cs = CharacteristicSolution(transport)
        return cs, CompositeSolution(cs, spec.pi1), 1.0, solver.n or 256
    model.require_valid(spec)
    cs = CharacteristicSolution(spec)
    return (cs, CompositeSolution(cs, spec.diffusion), spec.domain.length,
            solver.n or spec.domain.cell_count)


# ===== subcommands =====


def cmd_solve_pde(args) -> int:
    spec, solver, times = _spec_solver_times(_load_doc(args))
    times = _times_override(args, times)
    if isinstance(spec, microdevice.MicrodeviceSpec):
        sol = pde.solve_coupled(spec, solver, save_times=times)
    else:
        sol = pde.solve_cell_pde(spec, solver, save_times=times)
    out = _out_dir(args)
    if args.format == "csv":
        path = out / "states.csv"
        sol.to_csv(path)
    else:
        path = out / "states.json"
        doc = {"times": [float(t) for t in sol.times],
               "x": [float(v) for v in sol.grid.centers],
               "u": [[float(v) for v in row] for row in sol.u]}
        if sol.v is not None:
            doc["v"] = [[float(v) for v in row] for row in sol.v]
        path.write_text(json.dumps(doc) + "\n")
    d = sol.diagnostics
    print(f"wrote {path} ({d.steps} steps, u in [{d.min_u:.3e}, {d.max_u:.3e}])")
    return EXIT_OK


def cmd_solve_analytic(args) -> int:
    spec, solver, times = _spec_solver_times(_load_doc(args))
    times = _times_override(args, times)
    cs, comp, length, n = _analytic_pieces(spec, solver)
    xs = pde.Grid(length, n).centers
    records = []
    for t in times:
        u = composite_profile(comp, t, xs)
        records.extend({"t": float(t), "x": float(x), "u": float(v)}
                       for x, v in zip(xs, u))
    out = _out_dir(args)
    if args.format == "csv":
        path = out / "analytic.csv"
        with open(path, "w", newline="") as fh:
            fh.write("t,x,u\n")
            for r in records:
                fh.write(f"{r['t']:.17g},{r['x']:.17g},{r['u']:.17g}\n")
    else:
        path = out / "analytic.json"
        path.write_text(json.dumps(records) + "\n")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    doc = _load_doc(args)
    if "spec" not in doc:
        raise ValueError("compare needs an experiment document ('spec' field)")
    cfg = harness.config_from_json(doc)
    report = harness.run_compare(cfg)
    harness.emit_outputs(report, args.out, configs=(cfg,), fmt=args.format)
    if report.failure is not None:
        print(f"{cfg.name}: FAILED ({report.failure})")
        return EXIT_NUMERIC
    for r in report.rows:
        rel = r.sup_error / r.plateau if r.plateau > 0 else float("nan")
        state = "pass" if r.passed else "FAIL"
        extra = " window-empty" if r.window_empty else f" sup={rel:.3%}"
        print(f"{cfg.name} t={r.t:g}: front_err={r.front_error:.3e} "
              f"(tol {cfg.front_tol * r.layer_width:.3e}){extra} -> {state}")
    if args.enforce and not report.passed:
        return EXIT_ACCEPTANCE
    return EXIT_OK


def cmd_front(args) -> int:
    spec, solver, _ = _spec_solver_times(_load_doc(args))
    cs, _, _, _ = _analytic_pieces(spec, solver)
    traj = front_trajectory(cs, n=args.points)
    out = _out_dir(args)
    if args.format == "csv":
        path = out / "front.csv"
        with open(path, "w", newline="") as fh:
            fh.write("t,xstar\n")
            for t, x in zip(traj.ts, traj.xs):
                fh.write(f"{t:.17g},{x:.17g}\n")
    else:
        path = out / "front.json"
        path.write_text(json.dumps(
            [{"t": t, "xstar": x} for t, x in zip(traj.ts, traj.xs)]) + "\n")
    if traj.exit_time is not None:
        print(f"front reaches x = L at t = {traj.exit_time:.6g}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_oscillatory(args) -> int:
    if getattr(args, "config", None):
        doc = json.loads(Path(args.config).read_text())
    else:
        if args.a is None or args.beta is None or args.omega is None:
            raise ValueError("oscillatory needs --config or --a/--beta/--omega")
        doc = {}
    spec = oscillatory.OscillatorySpec(
        a=float(doc.get("a", args.a if args.a is not None else 1.0)),
        beta=float(doc.get("beta", args.beta if args.beta is not None else 1.0)),
        omega=float(doc.get("omega", args.omega if args.omega is not None else 1.0)),
        r_star=float(doc.get("r_star", args.r_star)))
    t_end = float(doc.get("t_end", args.t_end))
    n = int(doc.get("points", args.points))
    if args.regime:
        name = args.regime
        if name not in oscillatory.APPROXIMATIONS:
            raise ValueError(f"regime must be one of {oscillatory.REGIMES}")
        score = float("nan")
    else:
        name, score = oscillatory.regime_select(spec)
    fn = oscillatory.APPROXIMATIONS[name]
    ts = np.linspace(0.0, t_end, n)
    r_ap = np.asarray(fn(spec, ts), dtype=float)
    r_ref = np.asarray(oscillatory.r_reference(spec, ts), dtype=float)
    err = np.abs(r_ap - r_ref)
    out = _out_dir(args)
    if args.format == "csv":
        path = out / "oscillatory.csv"
        with open(path, "w", newline="") as fh:
            fh.write("t,r_regime,r_reference,error\n")
            for row in zip(ts, r_ap, r_ref, err):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    else:
        path = out / "oscillatory.json"
        path.write_text(json.dumps(
            [{"t": float(a), "r_regime": float(b), "r_reference": float(c),
              "error": float(d)} for a, b, c, d in zip(ts, r_ap, r_ref, err)])
            + "\n")
    print(f"regime {name} (score {score:g}); max |error| = {float(err.max()):.3e}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_microdevice(args) -> int:
    doc = _load_doc(args)
    if "spec" in doc:
        doc = doc["spec"]
    if "device" in doc:
        doc = doc["device"]
    md = microdevice.microdevice_from_json(doc)
    print(f"regime {md.regime}: Pi1={md.pi1:g} Pi2={md.pi2:g} Pi3={md.pi3:g} "
          f"Pi4={md.pi4:g} lambda={md.lam:g} uptake={md.uptake_kind} "
          f"k_eff={md.k_eff:g}")
    out = _out_dir(args)
    ts = np.linspace(0.0, md.t_end, 129)
    t_prof = 0.0
    with open(out / "device_front.csv", "w", newline="") as fh:
        fh.write("t,xstar\n")
        for tt in ts:
            try:
                x0 = microdevice.closed_form_front(md, float(tt))
            except FrontBlowup as exc:
                print(f"front blows up before t = {tt:.6g} "
                      f"(critical horizon {exc.critical_T:.6g})")
                break
            fh.write(f"{tt:.17g},{x0:.17g}\n")
            t_prof = float(tt)
    xs = np.linspace(0.0, 1.0, 257)
    v = microdevice.chemo_profile(md, t_prof, xs)
    u = np.array([microdevice.closed_form_density(md, t_prof, float(x))
                  for x in xs])
    with open(out / "device_profiles.csv", "w", newline="") as fh:
        fh.write("t,x,v,u\n")
        for x, vv, uu in zip(xs, v, u):
            fh.write(f"{t_prof:.17g},{x:.17g},{vv:.17g},{uu:.17g}\n")
    print(f"wrote {out / 'device_profiles.csv'} (profiles at t = {t_prof:g}) "
          f"and {out / 'device_front.csv'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc = _load_doc(args)
    if "base" not in doc or "grid" not in doc:
        raise ValueError("sweep needs a document with 'base' and 'grid' fields")
    base = harness.config_from_json(doc["base"])
    grid = doc["grid"]
    parallel = args.parallel if args.parallel else doc.get("parallel")
    docs = harness.sweep_documents(base, grid)
    reports = harness.run_sweep(base, grid, parallel)
    configs = tuple(harness.config_from_json(d) for d in docs)
    harness.emit_outputs(reports, args.out, configs=configs, fmt=args.format)
    failed = 0
    for rep in reports:
        if rep.failure is not None:
            failed += 1
            print(f"{rep.name}: FAILED ({rep.failure})")
        else:
            worst = max((r.front_error for r in rep.rows), default=float("nan"))
            print(f"{rep.name}: {'pass' if rep.passed else 'FAIL'} "
                  f"(worst front_err {worst:.3e})")
    print(f"{len(reports)} runs, {failed} failed")
    return EXIT_OK


# ===== parser =====


class _Parser(argparse.ArgumentParser):
    # bad flags are a validation problem, not argparse's default exit 2
    def error(self, message):
        raise ValueError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chemowave",
                description="Chemotaxis wave analytics and reference solver.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, with_times=False):
        sp.add_argument("--config", help="path to a JSON document")
        sp.add_argument("--preset", help="packaged preset name "
                        f"({', '.join(preset_names())})")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if with_times:
            sp.add_argument("--times", help="comma separated save times")

    sp = sub.add_parser("solve-pde", help="run the reference solver")
    add_common(sp, with_times=True)
    sp.set_defaults(func=cmd_solve_pde)

    sp = sub.add_parser("solve-analytic", help="sample the composite solution")
    add_common(sp, with_times=True)
    sp.set_defaults(func=cmd_solve_analytic)

    sp = sub.add_parser("compare", help="analytic versus numeric comparison")
    add_common(sp)
    sp.add_argument("--enforce", action="store_true",
                    help="exit 3 when tolerances are violated")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("front", help="front trajectory table")
    add_common(sp)
    sp.add_argument("--points", type=int, default=257)
    sp.set_defaults(func=cmd_front)

    sp = sub.add_parser("oscillatory", help="reciprocal-density approximations")
    sp.add_argument("--config", help="path to a JSON document")
    sp.add_argument("--out", default="out")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--a", type=float, help="modulation amplitude")
    sp.add_argument("--beta", type=float, help="growth rate")
    sp.add_argument("--omega", type=float, help="modulation frequency")
    sp.add_argument("--r-star", dest="r_star", type=float, default=1.0)
    sp.add_argument("--t-end", dest="t_end", type=float, default=1.0)
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--regime", choices=oscillatory.REGIMES,
                    help="override the automatic regime choice")
    sp.set_defaults(func=cmd_oscillatory)

    sp = sub.add_parser("microdevice", help="device reduction tables")
    add_common(sp)
    sp.set_defaults(func=cmd_microdevice)

    sp = sub.add_parser("sweep", help="grid of comparisons")
    add_common(sp)
    sp.add_argument("--parallel", type=int, help="worker processes")
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (pde.SolverFailure, FrontBlowup, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
