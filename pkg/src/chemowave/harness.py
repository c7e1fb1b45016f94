"""Experiment runner: analytic profiles against the reference solver.

A comparison takes one problem (cell equation alone, or a coupled device
scenario), solves it numerically, evaluates the composite analytic density
at the same cells, and measures front and interior errors at the requested
times.  Interior metrics are restricted to the window

    [x*(t) + m1 sqrt(D t),  L - m2]

so that neither the transition layer nor the right-wall layer contaminates
the comparison.  Results serialize to a fixed five-file set (config echo,
long-format profile table, front table, summary table, plot script) so that
runs are diffable; all floats are written with 17 significant digits and no
timestamps, making repeated runs byte-identical.
"""

from __future__ import annotations

import copy
import csv
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import pde
from .characteristics import (
    CharacteristicSolution,
    UnsupportedRegime,
    front_plateau,
    front_position,
    front_trajectory,
)
from .layer import CompositeSolution, composite_profile
from .microdevice import MicrodeviceSpec, build_transport_problem, microdevice_from_json
from .model import ProblemSpec, require_valid, spec_from_json

__all__ = [
    "ExperimentConfig",
    "TimeComparison",
    "ErrorReport",
    "run_compare",
    "run_sweep",
    "emit_outputs",
    "locate_front",
    "config_to_json",
    "config_from_json",
    "report_to_json",
]


# ===== configuration =====


@dataclass(frozen=True)
class ExperimentConfig:
    """One named comparison: problem, solver knobs, times and margins.

    front_margin is measured in units of sqrt(D t); right_margin in x.  The
    front tolerance is front_tol * sqrt(D t) and the interior tolerance is
    sup_tol relative to the analytic plateau.  numeric selects the profile
    the analytics are compared against: "pde" runs the reference solver,
    "analytic" samples the composite itself (a plumbing self-check; every
    error is then exactly zero).
    """

    name: str
    spec: Union[ProblemSpec, MicrodeviceSpec]
    solver: pde.SolverConfig = pde.SolverConfig()
    times: Tuple[float, ...] = (0.2, 0.4)
    front_margin: float = 5.0
    right_margin: float = 0.1
    sup_tol: float = 0.05
    front_tol: float = 5.0
    numeric: str = "pde"

    def __post_init__(self):
        times = tuple(sorted(float(t) for t in self.times))
        if not times:
            raise ValueError("config needs at least one comparison time")
        if times[0] <= 0.0:
            raise ValueError("comparison times must be positive")
        if times[-1] > self.spec.t_end + 1e-12:
            raise ValueError(
                f"comparison time {times[-1]} exceeds t_end = {self.spec.t_end}")
        object.__setattr__(self, "times", times)
        if self.front_margin < 0.0 or self.right_margin < 0.0:
            raise ValueError("window margins must be >= 0")
        if not (self.sup_tol > 0.0 and self.front_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if self.numeric not in ("pde", "analytic"):
            raise ValueError("numeric must be 'pde' or 'analytic'")

    @property
    def diffusion(self) -> float:
        if isinstance(self.spec, MicrodeviceSpec):
            return self.spec.pi1
        return self.spec.diffusion


def config_to_json(cfg: ExperimentConfig) -> dict:
    if isinstance(cfg.spec, MicrodeviceSpec):
        spec_doc = {"device": cfg.spec.to_json()}
    else:
        spec_doc = cfg.spec.to_json()
    sv = cfg.solver
    return {
        "name": cfg.name,
        "spec": spec_doc,
        "solver": {"n": sv.n, "cfl": sv.cfl, "integrator": sv.integrator,
                   "limiter": sv.limiter, "rtol": sv.rtol, "atol": sv.atol},
        "times": list(cfg.times),
        "front_margin": cfg.front_margin,
        "right_margin": cfg.right_margin,
        "sup_tol": cfg.sup_tol,
        "front_tol": cfg.front_tol,
        "numeric": cfg.numeric,
    }


def _solver_from_json(doc: Optional[dict]) -> pde.SolverConfig:
    if doc is None:
        return pde.SolverConfig()
    allowed = {"n", "cfl", "integrator", "limiter", "rtol", "atol"}
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unknown solver fields {sorted(unknown)}")
    kw = dict(doc)
    if kw.get("n") is not None:
        kw["n"] = int(kw["n"])
    for key in ("cfl", "rtol", "atol"):
        if key in kw:
            kw[key] = float(kw[key])
    return pde.SolverConfig(**kw)


def config_from_json(doc: dict) -> ExperimentConfig:
    try:
        spec_doc = doc["spec"]
        if "device" in spec_doc:
            spec = microdevice_from_json(spec_doc["device"])
        else:
            spec = spec_from_json(spec_doc)
        return ExperimentConfig(
            name=str(doc["name"]),
            spec=spec,
            solver=_solver_from_json(doc.get("solver")),
            times=tuple(float(t) for t in doc["times"]),
            front_margin=float(doc.get("front_margin", 5.0)),
            right_margin=float(doc.get("right_margin", 0.1)),
            sup_tol=float(doc.get("sup_tol", 0.05)),
            front_tol=float(doc.get("front_tol", 5.0)),
            numeric=str(doc.get("numeric", "pde")),
        )
    except KeyError as exc:
        raise ValueError(f"experiment document missing field {exc}")


# ===== results =====


@dataclass(frozen=True)
class TimeComparison:
    """Metrics at one comparison time.

    sup_error and l2_error are absolute; divide by plateau for the relative
    figure.  window_empty means x* + m1 sqrt(D t) already overlaps the right
    margin, so no interior cells were comparable at this time.
    """

    t: float
    front_numeric: float
    front_analytic: float
    front_error: float
    layer_width: float
    plateau: float
    sup_error: float
    l2_error: float
    window: Tuple[float, float]
    window_empty: bool
    passed: bool


@dataclass(frozen=True)
class ProfileTrace:
    t: float
    xs: Tuple[float, ...]
    u_num: Tuple[float, ...]
    u_an: Tuple[float, ...]


@dataclass(frozen=True)
class ErrorReport:
    name: str
    rows: Tuple[TimeComparison, ...]
    passed: bool
    failure: Optional[str] = None
    profiles: Tuple[ProfileTrace, ...] = ()
    front_curve: Tuple[Tuple[float, float], ...] = ()
    wall_time: float = field(default=0.0, compare=False)


def report_to_json(report: ErrorReport) -> dict:
    return {
        "name": report.name,
        "passed": report.passed,
        "failure": report.failure,
        "rows": [
            {
                "t": r.t,
                "front_numeric": r.front_numeric,
                "front_analytic": r.front_analytic,
                "front_error": r.front_error,
                "layer_width": r.layer_width,
                "plateau": r.plateau,
                "sup_error": r.sup_error,
                "l2_error": r.l2_error,
                "window_lo": r.window[0],
                "window_hi": r.window[1],
                "window_empty": r.window_empty,
                "passed": r.passed,
            }
            for r in report.rows
        ],
    }


# ===== front location on a sampled profile =====


def locate_front(xs: np.ndarray, u: np.ndarray, width: float,
                 window_hi: float) -> float:
    """Half-plateau front position of a sampled wave profile.

    The plateau estimate starts from the median over the right half of the
    window and is refined by re-reading the profile five layer widths ahead
    of the current front guess, which keeps the estimate local once the
    wave occupies only part of the domain.
    """
    sel = (xs >= 0.5 * window_hi) & (xs <= window_hi)
    plateau = float(np.median(u[sel]))
    x_half = 0.0
    for _ in range(12):
        above = np.nonzero(u >= 0.5 * plateau)[0]
        x_new = xs[above[0]] if above.size else float("nan")
        if not math.isfinite(x_new):
            return x_new
        plateau = float(np.interp(min(x_new + 5.0 * width, window_hi), xs, u))
        if abs(x_new - x_half) < 1e-12:
            break
        x_half = x_new
    return x_half


# ===== comparison =====


def _analytic_setup(cfg: ExperimentConfig):
    spec = cfg.spec
    if isinstance(spec, MicrodeviceSpec):
        transport = build_transport_problem(spec, diffusion=spec.pi1)
        cs = CharacteristicSolution(transport)
        return cs, CompositeSolution(cs, spec.pi1), transport
    require_valid(spec)
    cs = CharacteristicSolution(spec)
    return cs, CompositeSolution(cs, spec.diffusion), spec


def _numeric_states(cfg: ExperimentConfig, comp: CompositeSolution):
    if cfg.numeric == "analytic":
        if isinstance(cfg.spec, MicrodeviceSpec):
            length, fallback_n = 1.0, 256
        else:
            length, fallback_n = cfg.spec.domain.length, cfg.spec.domain.cell_count
        grid = pde.Grid(length, cfg.solver.n or fallback_n)
        xs = grid.centers
        states = {t: composite_profile(comp, t, xs) for t in cfg.times}
        return xs, states
    if isinstance(cfg.spec, MicrodeviceSpec):
        sol = pde.solve_coupled(cfg.spec, cfg.solver, save_times=cfg.times)
    else:
        sol = pde.solve_cell_pde(cfg.spec, cfg.solver, save_times=cfg.times)
    return sol.grid.centers, {t: sol.state_at(t) for t in cfg.times}


def run_compare(cfg: ExperimentConfig) -> ErrorReport:
    """Compare analytic against numeric profiles at the configured times.

    Solver and analytic-evaluation failures come back as a failed report
    carrying the exception text; configuration problems raise instead.
    """
    start = time.perf_counter()
    try:
        cs, comp, transport = _analytic_setup(cfg)
        xs, states = _numeric_states(cfg, comp)
        D = cfg.diffusion
        L = transport.domain.length
        rows = []
        profiles = []
        for t in cfg.times:
            u_num = states[t]
            u_an = composite_profile(comp, t, xs)
            width = math.sqrt(D * t)
            x_an = front_position(cs, t)
            if cfg.numeric == "analytic":
                # the numeric source is the analytic solution itself
                x_num = x_an
            else:
                x_num = locate_front(xs, u_num, width, L - cfg.right_margin)
            front_err = abs(x_num - x_an)
            lo = x_an + cfg.front_margin * width
            hi = L - cfg.right_margin
            sel = (xs >= lo) & (xs <= hi)
            empty = (lo >= hi) or not np.any(sel)
            plateau = front_plateau(cs, t)
            if empty:
                sup_err = float("nan")
                l2_err = float("nan")
            else:
                diff = u_num[sel] - u_an[sel]
                sup_err = float(np.max(np.abs(diff)))
                l2_err = float(math.sqrt(np.trapezoid(diff * diff, xs[sel])))
            ok = math.isfinite(front_err) and (
                front_err <= cfg.front_tol * width + 1e-12)
            if not empty:
                ok = ok and sup_err <= cfg.sup_tol * plateau
            rows.append(TimeComparison(
                t=t, front_numeric=x_num, front_analytic=x_an,
                front_error=front_err, layer_width=width, plateau=plateau,
                sup_error=sup_err, l2_error=l2_err, window=(lo, hi),
                window_empty=empty, passed=ok))
            profiles.append(ProfileTrace(
                t=t, xs=tuple(float(v) for v in xs),
                u_num=tuple(float(v) for v in u_num),
                u_an=tuple(float(v) for v in u_an)))
        traj = front_trajectory(cs, t_end=cfg.spec.t_end, n=101)
        curve = tuple(zip(traj.ts, traj.xs))
        return ErrorReport(
            name=cfg.name, rows=tuple(rows), passed=all(r.passed for r in rows),
            profiles=tuple(profiles), front_curve=curve,
            wall_time=time.perf_counter() - start)
    except (ArithmeticError, UnsupportedRegime) as exc:
        return ErrorReport(
            name=cfg.name, rows=(), passed=False,
            failure=f"{type(exc).__name__}: {exc}",
            wall_time=time.perf_counter() - start)


# ===== sweeps =====


def _set_path(doc: dict, path: str, value) -> None:
    keys = path.split(".")
    node = doc
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ValueError(f"sweep path {path!r} not found in config")
        node = node[key]
    if not isinstance(node, dict):
        raise ValueError(f"sweep path {path!r} not found in config")
    node[keys[-1]] = value


def _run_doc(doc: dict) -> ErrorReport:
    try:
        return run_compare(config_from_json(doc))
    except ValueError as exc:
        return ErrorReport(name=str(doc.get("name", "?")), rows=(), passed=False,
                           failure=f"{type(exc).__name__}: {exc}")


def sweep_documents(base: ExperimentConfig,
                    grid: Mapping[str, Sequence]) -> Tuple[dict, ...]:
    """Expand the grid into per-point config documents, product order."""
    if not grid or any(len(tuple(v)) == 0 for v in grid.values()):
        raise ValueError("sweep grid must be nonempty")
    base_doc = config_to_json(base)
    keys = list(grid.keys())
    docs = []
    for combo in itertools.product(*(tuple(grid[k]) for k in keys)):
        doc = copy.deepcopy(base_doc)
        for key, value in zip(keys, combo):
            _set_path(doc, key, value)
        label = ";".join(f"{k.split('.')[-1]}={v}" for k, v in zip(keys, combo))
        doc["name"] = f"{base.name}[{label}]"
        docs.append(doc)
    return tuple(docs)


def run_sweep(base: ExperimentConfig, grid: Mapping[str, Sequence],
              parallel: Optional[int] = None) -> Tuple[ErrorReport, ...]:
    """Run one comparison per grid point; failures are recorded, not raised.

    Grid keys are dotted paths into the config document (for example
    "spec.device.lambda" or "solver.n"); values replace the JSON node.  The
    report order follows the itertools.product order of the grid, whether
    the points run serially or across processes.
    """
    docs = sweep_documents(base, grid)
    if parallel is not None and parallel > 1 and len(docs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            return tuple(pool.map(_run_doc, docs))
    return tuple(_run_doc(doc) for doc in docs)


# ===== output files =====


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


_PLOT_TEMPLATE = '''"""Render profile and front panels from the tables in this directory."""

import json
import os.path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
FMT = "{fmt}"


def load(stem, columns):
    path = os.path.join(HERE, stem + "." + FMT)
    if FMT == "json":
        with open(path) as fh:
            records = json.load(fh)
        return {{c: np.array([r[c] for r in records], dtype=object) for c in columns}}
    data = np.genfromtxt(path, delimiter=",", names=True, dtype=None,
                         encoding="utf-8")
    data = np.atleast_1d(data)
    return {{c: data[c] for c in columns}}


profiles = load("profiles", ["experiment", "t", "x", "u_num", "u_an"])
front = load("front", ["experiment", "series", "t", "xstar"])
names = sorted(set(profiles["experiment"]))

fig, axes = plt.subplots(1, 2, figsize=(11, 4.2))
for name in names:
    mask = profiles["experiment"] == name
    for t in sorted(set(np.asarray(profiles["t"][mask], dtype=float))):
        sel = mask & (np.asarray(profiles["t"], dtype=float) == t)
        xs = np.asarray(profiles["x"][sel], dtype=float)
        axes[0].plot(xs, np.asarray(profiles["u_num"][sel], dtype=float),
                     lw=1.2, label=f"{{name}} t={{t:g}} numeric")
        axes[0].plot(xs, np.asarray(profiles["u_an"][sel], dtype=float),
                     "--", lw=1.0, label=f"{{name}} t={{t:g}} analytic")
    fmask = front["experiment"] == name
    an = fmask & (front["series"] == "analytic")
    nu = fmask & (front["series"] == "numeric")
    axes[1].plot(np.asarray(front["t"][an], dtype=float),
                 np.asarray(front["xstar"][an], dtype=float), lw=1.2, label=name)
    axes[1].plot(np.asarray(front["t"][nu], dtype=float),
                 np.asarray(front["xstar"][nu], dtype=float), "o", ms=4)
axes[0].set_xlabel("x")
axes[0].set_ylabel("u")
axes[0].legend(fontsize=7)
axes[1].set_xlabel("t")
axes[1].set_ylabel("x*")
axes[1].legend(fontsize=7)
fig.tight_layout()
fig.savefig(os.path.join(HERE, "results.png"), dpi=150)
print(os.path.join(HERE, "results.png"))
'''

_SUMMARY_COLUMNS = (
    "experiment", "t", "front_numeric", "front_analytic", "front_error",
    "layer_width", "plateau", "sup_error", "l2_error", "window_lo",
    "window_hi", "window_empty", "passed", "note",
)


def _summary_records(reports: Sequence[ErrorReport]):
    for rep in reports:
        if rep.failure is not None:
            yield {"experiment": rep.name, "t": "", "front_numeric": "",
                   "front_analytic": "", "front_error": "", "layer_width": "",
                   "plateau": "", "sup_error": "", "l2_error": "",
                   "window_lo": "", "window_hi": "", "window_empty": "",
                   "passed": "false", "note": rep.failure}
            continue
        for r in rep.rows:
            yield {"experiment": rep.name, "t": _fmt(r.t),
                   "front_numeric": _fmt(r.front_numeric),
                   "front_analytic": _fmt(r.front_analytic),
                   "front_error": _fmt(r.front_error),
                   "layer_width": _fmt(r.layer_width),
                   "plateau": _fmt(r.plateau),
                   "sup_error": _fmt(r.sup_error),
                   "l2_error": _fmt(r.l2_error),
                   "window_lo": _fmt(r.window[0]),
                   "window_hi": _fmt(r.window[1]),
                   "window_empty": str(r.window_empty).lower(),
                   "passed": str(r.passed).lower(), "note": ""}


def _profile_records(reports: Sequence[ErrorReport]):
    for rep in reports:
        for tr in rep.profiles:
            for x, un, ua in zip(tr.xs, tr.u_num, tr.u_an):
                yield {"experiment": rep.name, "t": _fmt(tr.t), "x": _fmt(x),
                       "u_num": _fmt(un), "u_an": _fmt(ua)}


def _front_records(reports: Sequence[ErrorReport]):
    for rep in reports:
        for t, x in rep.front_curve:
            yield {"experiment": rep.name, "series": "analytic",
                   "t": _fmt(t), "xstar": _fmt(x)}
        for r in rep.rows:
            if math.isfinite(r.front_numeric):
                yield {"experiment": rep.name, "series": "numeric",
                       "t": _fmt(r.t), "xstar": _fmt(r.front_numeric)}


def _write_table(path: Path, columns: Sequence[str], records, fmt: str) -> None:
    if fmt == "json":
        out = [{c: rec[c] for c in columns} for rec in records]
        path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns),
                                lineterminator="\n")
        writer.writeheader()
        for rec in records:
            writer.writerow(rec)


def emit_outputs(reports: Union[ErrorReport, Sequence[ErrorReport]],
                 out_dir, configs: Sequence[ExperimentConfig] = (),
                 fmt: str = "csv") -> Tuple[Path, ...]:
    """Write the five-file result set and return the paths.

    Always: config.json (echo of the configs), profiles.<fmt>,
    front.<fmt>, summary.<fmt>, plot_results.py.  Identical inputs give
    byte-identical files; nothing time- or host-dependent is written.
    """
    if fmt not in ("csv", "json"):
        raise ValueError("format must be 'csv' or 'json'")
    if isinstance(reports, ErrorReport):
        reports = (reports,)
    reports = tuple(reports)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ext = fmt
    paths = []

    cfg_path = out / "config.json"
    cfg_doc = [config_to_json(c) for c in configs]
    cfg_path.write_text(json.dumps(cfg_doc, indent=2, sort_keys=True) + "\n")
    paths.append(cfg_path)

    prof_path = out / f"profiles.{ext}"
    _write_table(prof_path, ("experiment", "t", "x", "u_num", "u_an"),
                 _profile_records(reports), fmt)
    paths.append(prof_path)

    front_path = out / f"front.{ext}"
    _write_table(front_path, ("experiment", "series", "t", "xstar"),
                 _front_records(reports), fmt)
    paths.append(front_path)

    summary_path = out / f"summary.{ext}"
    _write_table(summary_path, _SUMMARY_COLUMNS, _summary_records(reports), fmt)
    paths.append(summary_path)

    plot_path = out / "plot_results.py"
    plot_path.write_text(_PLOT_TEMPLATE.format(fmt=fmt))
    paths.append(plot_path)
    return tuple(paths)
