"""Finite-volume reference solver for the cell transport equation.

Solves

    u_t + (alpha(t,x) u)_x = D u_xx + beta(t,x) u (1 - u)

on [0, L] with zero-flux walls, and the coupled cell/chemoattractant system

    u_t = Pi1 u_xx - Pi2 (v_x u)_x + m(v) u (1 - u)
    v_t = Pi3 v_xx - Pi4 w(v)

with Dirichlet drives on v.  Cell density u is stored as cell averages and
advanced explicitly (SSP-RK3, upwind fluxes with optional minmod
reconstruction); the chemoattractant v lives on the cell faces (nodes) and is
advanced by Crank-Nicolson, since Pi3 >> 1 makes its diffusion stiff relative
to the cell dynamics.  The transient-decay check used to justify the outer
chemoattractant profiles is implemented on the same node grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded

from .model import ConstantGrowth, LinearInV, ProblemSpec, require_valid

__all__ = [
    "Grid",
    "SolverConfig",
    "SolverDiagnostics",
    "GridSolution",
    "SolverFailure",
    "DecayReport",
    "solve_cell_pde",
    "solve_coupled",
    "transient_decay_check",
]


@dataclass(frozen=True)
class Grid:
    """Uniform cell grid on [0, length] with n cells of width h = length/n."""

    length: float
    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("grid needs at least 8 cells")
        if not self.length > 0.0:
            raise ValueError("grid length must be positive")

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def faces(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n + 1)

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.h


@dataclass(frozen=True)
class SolverConfig:
    """Discretization knobs.

    n overrides the cell count of the problem's domain when set.  The fixed
    step integrator obeys dt <= cfl * min(h/max|alpha|, h^2/(2D)); the
    adaptive option hands the semi-discrete system to an embedded
    Runge-Kutta (or BDF for the stiff coupled system) with the same bound
    as max_step.
    """

    n: Optional[int] = None
    cfl: float = 0.4
    integrator: str = "ssp-rk3"
    limiter: str = "minmod"
    rtol: float = 1e-8
    atol: float = 1e-10

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise ValueError("cfl must lie in (0, 1)")
        if self.integrator not in ("ssp-rk3", "adaptive"):
            raise ValueError("integrator must be 'ssp-rk3' or 'adaptive'")
        if self.limiter not in ("minmod", "none"):
            raise ValueError("limiter must be 'minmod' or 'none'")
        if self.n is not None and self.n < 8:
            raise ValueError("n must be >= 8")


@dataclass
class SolverDiagnostics:
    steps: int = 0
    rejected_steps: int = 0
    min_u: float = math.inf
    max_u: float = -math.inf

    def observe(self, u: np.ndarray) -> None:
        self.min_u = min(self.min_u, float(u.min()))
        self.max_u = max(self.max_u, float(u.max()))


@dataclass(frozen=True)
class GridSolution:
    """Saved states of one solve: u row per requested time, v when coupled."""

    grid: Grid
    times: np.ndarray
    u: np.ndarray
    v: Optional[np.ndarray]
    diagnostics: SolverDiagnostics

    def state_at(self, t: float, which: str = "u") -> np.ndarray:
        """Saved row closest to t (requested times are stored exactly)."""
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"time {t} was not among the saved times")
        return self.u[idx] if which == "u" else self.v[idx]

    def total_mass(self, idx: int) -> float:
        return float(np.sum(self.u[idx]) * self.grid.h)

    def v_at_centers(self, idx: int) -> np.ndarray:
        if self.v is None:
            raise ValueError("solution has no chemoattractant component")
        return 0.5 * (self.v[idx, :-1] + self.v[idx, 1:])

    def to_csv(self, path) -> None:
        """Long-format export, header t,x,u[,v]; v averaged to cell centers."""
        xs = self.grid.centers
        with open(path, "w", newline="") as fh:
            if self.v is None:
                fh.write("t,x,u\n")
                for k, t in enumerate(self.times):
                    for j in range(self.grid.n):
                        fh.write(f"{t:.17g},{xs[j]:.17g},{self.u[k, j]:.17g}\n")
            else:
                fh.write("t,x,u,v\n")
                for k, t in enumerate(self.times):
                    vc = self.v_at_centers(k)
                    for j in range(self.grid.n):
                        fh.write(
                            f"{t:.17g},{xs[j]:.17g},{self.u[k, j]:.17g},{vc[j]:.17g}\n"
                        )


class SolverFailure(ArithmeticError):
    """Raised on NaN states or step-size underflow; carries the last good data."""

    def __init__(self, message: str, partial: Optional[GridSolution] = None):
        super().__init__(message)
        self.partial = partial


# ===== cell-equation fluxes =====


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    pos = (a > 0.0) & (b > 0.0)
    neg = (a < 0.0) & (b < 0.0)
    out[pos] = np.minimum(a[pos], b[pos])
    out[neg] = np.maximum(a[neg], b[neg])
    return out


def _cell_rhs(
    u: np.ndarray,
    a_face: np.ndarray,
    growth: np.ndarray,
    diffusion: float,
    h: float,
    limited: bool,
) -> np.ndarray:
    """Flux-difference form of the semi-discrete cell equation.

    a_face holds alpha at the n+1 faces; the wall fluxes (advective and
    diffusive) are zeroed so the discrete total flux vanishes at both ends.
    """
    n = u.size
    if limited:
        slopes = np.zeros_like(u)
        # boundary cells stay first-order; wall fluxes are zero anyway
        slopes[1:-1] = _minmod(u[1:-1] - u[:-2], u[2:] - u[1:-1]) / h
        u_left = u[:-1] + 0.5 * h * slopes[:-1]   # reconstruction at face from the left
        u_right = u[1:] - 0.5 * h * slopes[1:]    # and from the right
    else:
        u_left = u[:-1]
        u_right = u[1:]

    a_in = a_face[1:-1]
    flux = np.zeros(n + 1)
    flux[1:-1] = np.where(a_in >= 0.0, a_in * u_left, a_in * u_right)
    if diffusion > 0.0:
        flux[1:-1] -= diffusion * (u[1:] - u[:-1]) / h

    return -(flux[1:] - flux[:-1]) / h + growth * u * (1.0 - u)


def _stable_dt(
    h: float, a_max: float, diffusion: float, b_max: float, cfl: float, horizon: float
) -> float:
    dt = horizon
    if a_max > 0.0:
        dt = min(dt, cfl * h / a_max)
    if diffusion > 0.0:
        dt = min(dt, cfl * h * h / (2.0 * diffusion))
    if b_max > 0.0:
        dt = min(dt, 0.5 / b_max)  # explicit reaction stays well resolved
    return dt


def _prepare_times(save_times, t_end: float) -> np.ndarray:
    if save_times is None:
        times = np.array([0.0, t_end])
    else:
        times = np.unique(np.asarray(save_times, dtype=float))
    if times.size == 0 or times[0] < 0.0 or times[-1] > t_end + 1e-12:
        raise ValueError("save times must lie within [0, t_end]")
    return times


# ===== uncoupled cell equation =====


def solve_cell_pde(
    spec: ProblemSpec,
    cfg: SolverConfig = SolverConfig(),
    save_times: Optional[Sequence[float]] = None,
) -> GridSolution:
    """Advance the validated problem and return cell averages at save_times."""

    require_valid(spec)
    n = cfg.n if cfg.n is not None else spec.domain.cell_count
    grid = Grid(spec.domain.length, n)
    h = grid.h
    faces, centers = grid.faces, grid.centers
    limited = cfg.limiter == "minmod"
    D = spec.diffusion

    def a_of(t: float) -> np.ndarray:
        return np.asarray(spec.alpha.value(t, faces), dtype=float)

    def b_of(t: float) -> np.ndarray:
        return np.asarray(spec.beta.value(t, centers), dtype=float)

    u = np.asarray(spec.u0(centers), dtype=float).copy()
    times = _prepare_times(save_times, spec.t_end)

    if cfg.integrator == "adaptive":
        return _solve_cell_adaptive(spec, cfg, grid, u, times, a_of, b_of, limited)

    diag = SolverDiagnostics()
    diag.observe(u)
    saved = []
    t = 0.0
    next_idx = 0
    if times[0] == 0.0:
        saved.append(u.copy())
        next_idx = 1

    def partial() -> GridSolution:
        k = len(saved)
        return GridSolution(grid, times[:k].copy(), np.array(saved), None, diag)

    floor = 1e-13 * max(1.0, spec.t_end)
    while next_idx < times.size:
        target = times[next_idx]
        # residuals below the floor count as arrival, else the last sliver
        # of a save interval would demand a step smaller than the floor
        while target - t > floor:
            a_face = a_of(t)
            growth = b_of(t)
            a_max = float(np.max(np.abs(a_face)))
            b_max = float(np.max(np.abs(growth)))
            dt = _stable_dt(h, a_max, D, b_max, cfg.cfl, target - t)
            if dt < floor:
                raise SolverFailure(f"step size underflow at t={t:.6g}", partial())
            u1 = u + dt * _cell_rhs(u, a_face, growth, D, h, limited)
            u2 = 0.75 * u + 0.25 * (
                u1 + dt * _cell_rhs(u1, a_of(t + dt), b_of(t + dt), D, h, limited)
            )
            u_new = (u + 2.0 * (
                u2 + dt * _cell_rhs(u2, a_of(t + 0.5 * dt), b_of(t + 0.5 * dt), D, h, limited)
            )) / 3.0
            if not np.all(np.isfinite(u_new)):
                raise SolverFailure(f"non-finite state at t={t + dt:.6g}", partial())
            u = u_new
            t += dt
            diag.steps += 1
            diag.observe(u)
        saved.append(u.copy())
        next_idx += 1

    return GridSolution(grid, times, np.array(saved), None, diag)


def _solve_cell_adaptive(spec, cfg, grid, u0, times, a_of, b_of, limited) -> GridSolution:
    h = grid.h
    D = spec.diffusion

    def rhs(t, u):
        return _cell_rhs(u, a_of(t), b_of(t), D, h, limited)

    # bound the step by the same CFL criterion, sampled over the run
    a_samp = max(
        float(np.max(np.abs(a_of(t)))) for t in np.linspace(0.0, spec.t_end, 17)
    )
    max_step = _stable_dt(h, a_samp, D, 0.0, cfg.cfl, spec.t_end)
    sol = solve_ivp(
        rhs,
        (0.0, float(times[-1])),
        u0,
        method="RK45",
        t_eval=times,
        rtol=cfg.rtol,
        atol=cfg.atol,
        max_step=max_step,
    )
    if not sol.success:
        raise SolverFailure(f"adaptive integration failed: {sol.message}")
    states = sol.y.T.copy()
    diag = SolverDiagnostics(steps=max(sol.t.size - 1, 0))
    for row in states:
        diag.observe(row)
    if not np.all(np.isfinite(states)):
        raise SolverFailure("non-finite state in adaptive solve")
    return GridSolution(grid, times, states, None, diag)


# ===== coupled cell/chemoattractant system =====


def _cn_matrix(n_nodes: int, r_half: float, decay_half: float,
               neumann_left: bool) -> np.ndarray:
    """Banded (1,1) matrix for the implicit half of the v update.

    Rows 0 and n-1 are boundary rows: Dirichlet identity, or a mirrored
    interior row when the left wall is a symmetry (Neumann) boundary.
    """
    ab = np.zeros((3, n_nodes))
    ab[0, 2:] = -r_half                      # superdiagonal
    ab[1, 1:-1] = 1.0 + 2.0 * r_half + decay_half
    ab[2, :-2] = -r_half                     # subdiagonal
    if neumann_left:
        ab[1, 0] = 1.0 + 2.0 * r_half + decay_half
        ab[0, 1] = -2.0 * r_half             # ghost node mirrors node 1
    else:
        ab[1, 0] = 1.0
        ab[0, 1] = 0.0
    ab[1, -1] = 1.0
    ab[2, -2] = 0.0
    return ab


def _cn_rhs(v: np.ndarray, r_half: float, decay_half: float, dt_source: float,
            neumann_left: bool, bc_left: Optional[float], bc_right: float) -> np.ndarray:
    rhs = np.empty_like(v)
    rhs[1:-1] = (
        v[1:-1]
        + r_half * (v[:-2] - 2.0 * v[1:-1] + v[2:])
        - decay_half * v[1:-1]
        - dt_source
    )
    if neumann_left:
        rhs[0] = v[0] + r_half * (2.0 * v[1] - 2.0 * v[0]) - decay_half * v[0] - dt_source
    else:
        rhs[0] = bc_left
    rhs[-1] = bc_right
    return rhs


def solve_coupled(
    md,
    cfg: SolverConfig = SolverConfig(),
    save_times: Optional[Sequence[float]] = None,
    v0: Optional[np.ndarray] = None,
) -> GridSolution:
    """Co-advance cell density and chemoattractant for a device scenario.

    md is a microdevice scenario (see `microdevice.MicrodeviceSpec`): it
    supplies the dimensionless groups, the uptake variant ('zero',
    'constant' or 'linear', scaled so the sink is Pi3*lam or Pi3*lam*v),
    the wall drive values and the growth law m(v).  v starts on the outer
    profile unless v0 is given; u uses zero-flux walls with flux
    Pi1 u_x - Pi2 u v_x.
    """

    if cfg.integrator != "ssp-rk3":
        raise ValueError("the coupled solver is fixed-step only")

    n = cfg.n if cfg.n is not None else 256
    grid = Grid(1.0, n)
    h = grid.h
    centers = grid.centers
    nodes = grid.faces  # v lives on the n+1 nodes, which are the u faces
    limited = cfg.limiter == "minmod"

    pi1, pi2, pi3, lam = md.pi1, md.pi2, md.pi3, md.lam
    uptake = md.uptake_kind  # 'zero' | 'constant' | 'linear'
    neumann_left = md.symmetric

    if isinstance(md.m, ConstantGrowth):
        m_of_v = lambda vc: md.m.beta0
    elif isinstance(md.m, LinearInV):
        m0 = md.m.m0
        m_of_v = lambda vc: m0 * vc
    else:
        raise ValueError("growth law must be ConstantGrowth or LinearInV")

    u = np.asarray(md.u0(centers), dtype=float).copy()
    v = np.asarray(md.chemo(0.0, nodes), dtype=float).copy() if v0 is None \
        else np.asarray(v0, dtype=float).copy()
    if v.shape != nodes.shape:
        raise ValueError("v0 must be sampled on the n+1 grid nodes")

    times = _prepare_times(save_times, md.t_end)
    diag = SolverDiagnostics()
    diag.observe(u)
    saved_u, saved_v = [], []
    t = 0.0
    next_idx = 0
    if times[0] == 0.0:
        saved_u.append(u.copy())
        saved_v.append(v.copy())
        next_idx = 1

    def partial() -> GridSolution:
        k = len(saved_u)
        return GridSolution(grid, times[:k].copy(), np.array(saved_u),
                            np.array(saved_v), diag)

    def face_velocity(v_nodes: np.ndarray) -> np.ndarray:
        a = np.zeros(n + 1)
        a[1:-1] = pi2 * (v_nodes[2:] - v_nodes[:-2]) / (2.0 * h)
        return a

    floor = 1e-13 * max(1.0, md.t_end)
    while next_idx < times.size:
        target = times[next_idx]
        # residuals below the floor count as arrival (see solve_cell_pde)
        while target - t > floor:
            a_face = face_velocity(v)
            vc = 0.5 * (v[:-1] + v[1:])
            growth = m_of_v(vc) * np.ones(n)
            a_max = float(np.max(np.abs(a_face)))
            b_max = float(np.max(np.abs(growth)))
            dt = _stable_dt(h, a_max, pi1, b_max, cfg.cfl, target - t)
            if dt < floor:
                raise SolverFailure(f"step size underflow at t={t:.6g}", partial())

            # --- v: Crank-Nicolson with the linear sink treated implicitly
            r_half = 0.5 * pi3 * dt / (h * h)
            decay_half = 0.5 * dt * pi3 * lam if uptake == "linear" else 0.0
            dt_source = dt * pi3 * lam if uptake == "constant" else 0.0
            wl, wr = md.wall_values(t + dt)
            ab = _cn_matrix(n + 1, r_half, decay_half, neumann_left)
            rhs = _cn_rhs(v, r_half, decay_half, dt_source, neumann_left, wl, wr)
            v_new = solve_banded((1, 1), ab, rhs)

            # --- u: SSP-RK3 with v linearly interpolated across the step
            def u_rhs(uu: np.ndarray, frac: float) -> np.ndarray:
                vv = (1.0 - frac) * v + frac * v_new
                vvc = 0.5 * (vv[:-1] + vv[1:])
                return _cell_rhs(uu, face_velocity(vv),
                                 m_of_v(vvc) * np.ones(n), pi1, h, limited)

            u1 = u + dt * u_rhs(u, 0.0)
            u2 = 0.75 * u + 0.25 * (u1 + dt * u_rhs(u1, 1.0))
            u_new = (u + 2.0 * (u2 + dt * u_rhs(u2, 0.5))) / 3.0

            if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))):
                raise SolverFailure(f"non-finite state at t={t + dt:.6g}", partial())
            u, v = u_new, v_new
            t += dt
            diag.steps += 1
            diag.observe(u)
        saved_u.append(u.copy())
        saved_v.append(v.copy())
        next_idx += 1

    return GridSolution(grid, times, np.array(saved_u), np.array(saved_v), diag)


# ===== transient decay of the chemoattractant =====


@dataclass(frozen=True)
class DecayReport:
    """Fitted sine-mode decay rates against (n^2 pi^2 + mu zeta lam) * Pi3."""

    modes: Tuple[int, ...]
    fitted_rates: Tuple[float, ...]
    predicted_rates: Tuple[float, ...]

    @property
    def relative_errors(self) -> Tuple[float, ...]:
        return tuple(
            abs(f - p) / p for f, p in zip(self.fitted_rates, self.predicted_rates)
        )


def transient_decay_check(
    mu: int,
    zeta: int,
    pi3: float,
    lam: float,
    v0: Callable[[np.ndarray], np.ndarray],
    psi1: float = 0.0,
    psi2: float = 0.0,
    modes: Sequence[int] = (1, 2),
    n: int = 256,
    dt: Optional[float] = None,
    t_end: Optional[float] = None,
) -> DecayReport:
    """Simulate v_t = Pi3 v_xx - mu Pi3 lam v^zeta and fit mode decay rates.

    The initial profile v0 must match the constant drives psi1, psi2 at the
    walls.  The residual against the steady state of the same discrete
    operator is projected onto sin(k pi x) and each log-amplitude is fitted
    by least squares; rates are reported in t-units for comparison with
    (k^2 pi^2 + mu zeta lam) * Pi3.
    """

    if mu not in (0, 1) or zeta not in (0, 1):
        raise ValueError("mu and zeta must be 0 or 1")
    grid = Grid(1.0, n)
    h = grid.h
    nodes = grid.faces
    v = np.asarray(v0(nodes), dtype=float).copy()
    if abs(v[0] - psi1) > 1e-9 or abs(v[-1] - psi2) > 1e-9:
        raise ValueError("initial profile is not boundary-consistent")

    slowest = pi3 * (math.pi**2 + (lam if mu and zeta else 0.0))
    if t_end is None:
        t_end = 5.0 / slowest
    if dt is None:
        fastest = pi3 * ((max(modes) ** 2 + 3) * math.pi**2 + lam)
        dt = 0.05 / fastest

    # steady state of the discrete operator (linear in all three cases)
    lin = mu * zeta * lam
    source = mu * (1 - zeta) * lam
    main = np.full(n + 1, -2.0 / (h * h) - lin)
    off = np.full(n, 1.0 / (h * h))
    ab = np.zeros((3, n + 1))
    ab[0, 2:] = off[1:]
    ab[1, :] = main
    ab[2, :-2] = off[:-1]
    ab[1, 0] = 1.0
    ab[0, 1] = 0.0
    ab[1, -1] = 1.0
    ab[2, -2] = 0.0
    rhs = np.full(n + 1, source)
    rhs[0], rhs[-1] = psi1, psi2
    v_steady = solve_banded((1, 1), ab, rhs)

    sines = {k: np.sin(k * math.pi * nodes[1:-1]) for k in modes}

    def amplitudes(vv: np.ndarray) -> dict:
        q = vv[1:-1] - v_steady[1:-1]
        return {k: 2.0 / n * float(np.dot(q, s)) for k, s in sines.items()}

    a0 = amplitudes(v)
    for k in modes:
        if abs(a0[k]) < 1e-12:
            raise ArithmeticError(
                f"mode {k} amplitude {a0[k]:.3e} below fit threshold"
            )

    r_half = 0.5 * pi3 * dt / (h * h)
    decay_half = 0.5 * dt * pi3 * lin
    dt_source = dt * pi3 * source
    ab_cn = _cn_matrix(n + 1, r_half, decay_half, neumann_left=False)

    ts = [0.0]
    history = [a0]
    t = 0.0
    while t < t_end - 1e-14:
        step = min(dt, t_end - t)
        if abs(step - dt) > 1e-14:  # trailing partial step gets its own matrix
            r2 = 0.5 * pi3 * step / (h * h)
            d2 = 0.5 * step * pi3 * lin
            ab_last = _cn_matrix(n + 1, r2, d2, neumann_left=False)
            rhs = _cn_rhs(v, r2, d2, step * pi3 * source, False, psi1, psi2)
            v = solve_banded((1, 1), ab_last, rhs)
        else:
            rhs = _cn_rhs(v, r_half, decay_half, dt_source, False, psi1, psi2)
            v = solve_banded((1, 1), ab_cn, rhs)
        t += step
        ts.append(t)
        history.append(amplitudes(v))

    ts_arr = np.asarray(ts)
    fitted, predicted = [], []
    for k in modes:
        amps = np.array([abs(rec[k]) for rec in history])
        keep = amps > max(1e-12, 1e-6 * abs(a0[k]))
        if np.count_nonzero(keep) < 3:
            raise ArithmeticError(f"mode {k} decayed below fit threshold too fast")
        slope = np.polyfit(ts_arr[keep], np.log(amps[keep]), 1)[0]
        fitted.append(-float(slope))
        predicted.append((k * k * math.pi**2 + lin) * pi3)

    return DecayReport(tuple(modes), tuple(fitted), tuple(predicted))
