"""Conservative finite-volume time integrator on a truncated line with
far-field data supplied by the exact rarefaction wave.

Collocated cell averages of (rho, m) advance with Rusanov interface fluxes
(optionally MUSCL/minmod reconstructed), strong-stability-preserving RK2
in time, and a degenerate viscous stress handled either explicitly or by a
lagged-coefficient backward-Euler tridiagonal solve (the default: the
kinematic coefficient rho**(alpha-1) + eps rho**(theta-1) is unbounded
near vacuum, which would collapse an explicit step).  Density negativity
is clipped to zero with the clipped mass accounted, never silently.
"""

from __future__ import annotations

import time as _time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from . import diagnostics as diag
from . import gas as gas_mod
from .errors import ConfigError, NumericsError
from .initdata import InitialData, RegularizedData

__all__ = [
    "Grid1D",
    "SchemeConfig",
    "SimState",
    "RunArtifact",
    "flux_hyperbolic",
    "viscous_flux",
    "stable_dt",
    "step",
    "run",
    "eps_compat",
    "wave_boundary",
    "check_domain",
]


@dataclass(frozen=True)
class Grid1D:
    x_left: float
    x_right: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ConfigError(f"need at least 16 cells, got {self.n}")
        if not self.x_right > self.x_left:
            raise ConfigError("x_right must exceed x_left")

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n

    @property
    def centers(self) -> np.ndarray:
        return self.x_left + (np.arange(self.n) + 0.5) * self.dx


@dataclass
class SchemeConfig:
    t_final: float
    cfl: float = 0.45
    viscous_mode: str = "semi-implicit"   # or "explicit"
    u_floor: float | None = None          # resolved to 1e-10 * rho_plus at run time
    limiter: str = "minmod"               # or "none"
    sample_dt: float = 0.5
    clip_warn: float = 1e-10              # per-step clipped mass, relative
    clip_abort: float = 1e-5

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise ConfigError(f"cfl must lie in (0, 1), got {self.cfl}")
        if self.viscous_mode not in ("semi-implicit", "explicit"):
            raise ConfigError(f"unknown viscous_mode {self.viscous_mode!r}")
        if self.limiter not in ("none", "minmod"):
            raise ConfigError(f"unknown limiter {self.limiter!r}")
        if self.t_final < 0.0:
            raise ConfigError("t_final must be >= 0")
        if self.sample_dt <= 0.0:
            raise ConfigError("sample_dt must be > 0")
        if self.u_floor is not None and self.u_floor <= 0.0:
            raise ConfigError("u_floor must be > 0")


@dataclass
class SimState:
    t: float
    rho: np.ndarray
    m: np.ndarray

    def copy(self) -> "SimState":
        return SimState(self.t, self.rho.copy(), self.m.copy())


def eps_compat(eps: float, t_final: float) -> bool:
    """Regularization/horizon compatibility: sqrt(eps) ln(1+T) <= eps**(1/4)."""
    if eps <= 0.0:
        raise ConfigError("eps_compat applies to eps > 0")
    return np.sqrt(eps) * np.log1p(t_final) <= eps ** 0.25


def wave_boundary(wp, grid: Grid1D, n_ghost=2):
    """Time-dependent Dirichlet ghost data from the exact wave."""
    dx = grid.dx
    xl = grid.x_left - (np.arange(n_ghost, 0, -1) - 0.5) * dx
    xr = grid.x_right + (np.arange(1, n_ghost + 1) - 0.5) * dx

    def bc(t):
        rho_l, u_l = wp.state(t, xl)
        rho_r, u_r = wp.state(t, xr)
        return (np.asarray(rho_l, dtype=float), np.asarray(rho_l * u_l, dtype=float),
                np.asarray(rho_r, dtype=float), np.asarray(rho_r * u_r, dtype=float))

    return bc


def check_domain(grid: Grid1D, wp, t_final: float, fan_tol=1e-3):
    """No wave/boundary interaction: the domain must contain the initial fan
    plus a causal margin max|lambda_2| * t_final on each side."""
    if wp.degenerate:
        return
    z = wp.fan_halfwidth_x0(fan_tol)
    margin = max(abs(wp.w_minus), abs(wp.w_plus)) * t_final
    lo_req = -z + wp.w_minus - margin
    hi_req = z + wp.w_plus + margin
    if grid.x_left > lo_req or grid.x_right < hi_req:
        raise ConfigError(
            f"domain [{grid.x_left}, {grid.x_right}] too small: need "
            f"[{lo_req:.1f}, {hi_req:.1f}] to keep boundary influence causal "
            f"up to t = {t_final}")


def _guarded_velocity(rho, m, u_floor):
    valid = rho > u_floor
    return np.where(valid, m / np.where(valid, rho, 1.0), 0.0)


def flux_hyperbolic(rho_l, m_l, rho_r, m_r, p: gas_mod.GasParams, u_floor):
    """Rusanov (local Lax-Friedrichs) interface flux for (rho, m).

    The wave-speed bound is max(|u| + sqrt(gamma) rho**((gamma-1)/2)) over
    the two states; vacuum-floored cells contribute |u| = 0 only, so the
    flux never divides by the density.
    """
    u_l = _guarded_velocity(rho_l, m_l, u_floor)
    u_r = _guarded_velocity(rho_r, m_r, u_floor)
    c_l = np.sqrt(p.gamma) * rho_l ** (0.5 * (p.gamma - 1.0))
    c_r = np.sqrt(p.gamma) * rho_r ** (0.5 * (p.gamma - 1.0))
    a = np.maximum(np.abs(u_l) + c_l, np.abs(u_r) + c_r)
    f_rho_l, f_rho_r = rho_l * u_l, rho_r * u_r
    f_m_l = f_rho_l * u_l + rho_l ** p.gamma
    f_m_r = f_rho_r * u_r + rho_r ** p.gamma
    f_rho = 0.5 * (f_rho_l + f_rho_r) - 0.5 * a * (rho_r - rho_l)
    f_m = 0.5 * (f_m_l + f_m_r) - 0.5 * a * (m_r - m_l)
    return f_rho, f_m


def _minmod(a, b):
    s = np.sign(a)
    return np.where(s * np.sign(b) > 0.0, s * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _faces(q_ext, limiter):
    """Left/right states at the n+1 interfaces from a (n+4)-cell extended
    array; minmod slopes keep nonnegative cell values nonnegative."""
    if limiter == "none":
        return q_ext[1:-2], q_ext[2:-1]
    d = np.diff(q_ext)
    sl = _minmod(d[:-1], d[1:])  # slope in cells ext[1:-1]
    q_l = q_ext[1:-2] + 0.5 * sl[:-1]
    q_r = q_ext[2:-1] - 0.5 * sl[1:]
    return q_l, q_r


def viscous_flux(rho, u, dx, p: gas_mod.GasParams, u_floor):
    """Interface stress mu_eps(rho_face) (u_{i+1} - u_i)/dx with arithmetic
    face densities; zero through deep vacuum (both neighbors floored),
    matching the degeneracy mu(0) = 0."""
    rho_face = 0.5 * (rho[:-1] + rho[1:])
    tau = gas_mod.viscosity_eps(rho_face, p) * np.diff(u) / dx
    dead = (rho[:-1] <= u_floor) & (rho[1:] <= u_floor)
    return np.where(dead, 0.0, tau)


def stable_dt(state: SimState, grid: Grid1D, cfg: SchemeConfig, p: gas_mod.GasParams,
              u_floor=None) -> float:
    """Acoustic CFL bound, the explicit-diffusion bound when applicable,
    both scaled by cfg.cfl; capped by the output cadence so an all-vacuum
    state still yields a finite step."""
    u_floor = cfg.u_floor if u_floor is None else u_floor
    if u_floor is None:
        u_floor = 1e-10 * max(float(state.rho.max()), 1.0)
    u = _guarded_velocity(state.rho, state.m, u_floor)
    a = np.abs(u) + np.sqrt(p.gamma) * state.rho ** (0.5 * (p.gamma - 1.0))
    amax = float(a.max())
    dt = np.inf if amax == 0.0 else grid.dx / amax
    if cfg.viscous_mode == "explicit":
        alive = state.rho > u_floor
        if alive.any():
            nu = gas_mod.viscosity_eps(state.rho[alive], p) / state.rho[alive]
            dt = min(dt, grid.dx ** 2 / (2.0 * float(nu.max())))
    dt = cfg.cfl * dt
    return float(min(dt, cfg.sample_dt))


@dataclass
class StepInfo:
    mass_flux_left: float = 0.0    # time-integrated boundary mass fluxes
    mass_flux_right: float = 0.0
    clipped_mass: float = 0.0
    fixed_momentum: float = 0.0


def _rhs(rho, m, t, grid, cfg, p, u_floor, bc, source):
    rho_gl, m_gl, rho_gr, m_gr = bc(t)
    rho_ext = np.concatenate([rho_gl, rho, rho_gr])
    m_ext = np.concatenate([m_gl, m, m_gr])
    rl, rr = _faces(rho_ext, cfg.limiter)
    ml, mr = _faces(m_ext, cfg.limiter)
    np.maximum(rl, 0.0, out=rl)
    np.maximum(rr, 0.0, out=rr)
    f_rho, f_m = flux_hyperbolic(rl, ml, rr, mr, p, u_floor)
    dx = grid.dx
    d_rho = -(f_rho[1:] - f_rho[:-1]) / dx
    d_m = -(f_m[1:] - f_m[:-1]) / dx
    if cfg.viscous_mode == "explicit":
        u_ext1 = _guarded_velocity(rho_ext[1:-1], m_ext[1:-1], u_floor)
        tau = viscous_flux(rho_ext[1:-1], u_ext1, dx, p, u_floor)
        d_m += (tau[1:] - tau[:-1]) / dx
    if source is not None:
        s_rho, s_m = source(t, grid.centers)
        d_rho = d_rho + s_rho
        d_m = d_m + s_m
    return d_rho, d_m, float(f_rho[0]), float(f_rho[-1])


def _implicit_viscous(rho, m, dt, t_new, grid, cfg, p, u_floor, bc):
    """Backward-Euler momentum update m -> rho u with the stress evaluated
    at the new velocity and coefficients lagged at the current density:

        rho_i u_i - (dt/dx^2) [mu_{i+1/2} (u_{i+1}-u_i) - mu_{i-1/2} (u_i-u_{i-1})] = m*_i
    """
    dx = grid.dx
    n = rho.size
    rho_gl, m_gl, rho_gr, m_gr = bc(t_new)
    rho_ext = np.concatenate([rho_gl[-1:], rho, rho_gr[:1]])
    mu = gas_mod.viscosity_eps(0.5 * (rho_ext[:-1] + rho_ext[1:]), p)
    dead = (rho_ext[:-1] <= u_floor) & (rho_ext[1:] <= u_floor)
    mu = np.where(dead, 0.0, mu)
    beta = dt / dx ** 2
    alive = rho > u_floor

    diag_c = rho + beta * (mu[:-1] + mu[1:])
    lower = -beta * mu[1:-1]   # coupling to u_{i-1}, rows 1..n-1
    upper = -beta * mu[1:-1]   # coupling to u_{i+1}, rows 0..n-2
    rhs = m.copy()
    u_ghost_l = _guarded_velocity(rho_gl[-1:], m_gl[-1:], u_floor)[0]
    u_ghost_r = _guarded_velocity(rho_gr[:1], m_gr[:1], u_floor)[0]
    rhs[0] += beta * mu[0] * u_ghost_l
    rhs[-1] += beta * mu[-1] * u_ghost_r

    # vacuum rows reduce to the identity u = 0 and decouple from neighbors
    diag_c = np.where(alive, diag_c, 1.0)
    rhs = np.where(alive, rhs, 0.0)
    lower = np.where(alive[1:] & alive[:-1], lower, 0.0)
    upper = np.where(alive[:-1] & alive[1:], upper, 0.0)

    ab = np.zeros((3, n))
    ab[0, 1:] = upper
    ab[1, :] = diag_c
    ab[2, :-1] = lower
    u_new = solve_banded((1, 1), ab, rhs, check_finite=False)
    m_new = np.where(alive, rho * u_new, 0.0)
    fixed = float(np.sum(np.abs(m[~alive]))) * dx
    return m_new, fixed


def step(state: SimState, dt: float, grid: Grid1D, cfg: SchemeConfig,
         p: gas_mod.GasParams, bc, source=None, u_floor=None) -> tuple[SimState, StepInfo]:
    """One SSP-RK2 step of the hyperbolic (and explicit-viscous) part,
    followed by the implicit viscous solve in semi-implicit mode; density
    negativity is clipped and accounted."""
    if u_floor is None:
        u_floor = cfg.u_floor if cfg.u_floor is not None else 1e-10 * float(state.rho.max())
    rho, m, t = state.rho, state.m, state.t
    d1_rho, d1_m, fl1, fr1 = _rhs(rho, m, t, grid, cfg, p, u_floor, bc, source)
    rho1 = rho + dt * d1_rho
    m1 = m + dt * d1_m
    np.maximum(rho1, 0.0, out=rho1)
    d2_rho, d2_m, fl2, fr2 = _rhs(rho1, m1, t + dt, grid, cfg, p, u_floor, bc, source)
    rho_new = rho + 0.5 * dt * (d1_rho + d2_rho)
    m_new = m + 0.5 * dt * (d1_m + d2_m)

    info = StepInfo(mass_flux_left=0.5 * dt * (fl1 + fl2),
                    mass_flux_right=0.5 * dt * (fr1 + fr2))

    def ensure_finite(rho_a, m_a):
        ok = np.isfinite(rho_a) & np.isfinite(m_a)
        if not ok.all():
            bad = np.where(~ok)[0]
            err = NumericsError(
                f"non-finite state at t = {t + dt:.6g}, first bad cell {bad[0]} "
                f"(x = {grid.centers[bad[0]]:.6g})")
            err.state = SimState(t + dt, rho_a, m_a)
            raise err

    ensure_finite(rho_new, m_new)
    neg = rho_new < 0.0
    if neg.any():
        info.clipped_mass = -float(np.sum(rho_new[neg])) * grid.dx
        rho_new[neg] = 0.0
        info.fixed_momentum += float(np.sum(np.abs(m_new[neg]))) * grid.dx
        m_new[neg] = 0.0

    if cfg.viscous_mode == "semi-implicit":
        m_new, fixed = _implicit_viscous(rho_new, m_new, dt, t + dt, grid, cfg, p,
                                         u_floor, bc)
        info.fixed_momentum += fixed
        ensure_finite(rho_new, m_new)
    return SimState(t + dt, rho_new, m_new), info


@dataclass
class RunArtifact:
    """In-memory result of one run: sampled states, functional records,
    bookkeeping; persisted/reloaded by the runio module."""

    gas: gas_mod.GasParams
    wave: object
    grid: Grid1D
    scheme: SchemeConfig
    diag_config: diag.DiagConfig
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)      # (rho, m) pairs
    records: list = field(default_factory=list)
    aux: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _as_state(init, grid: Grid1D) -> SimState:
    if isinstance(init, SimState):
        st = init.copy()
    elif isinstance(init, RegularizedData):
        st = SimState(0.0, init.rho0_eps.copy(), init.m0_eps.copy())
    elif isinstance(init, InitialData):
        st = SimState(0.0, init.rho0.copy(), init.m0.copy())
    else:
        rho, m = init
        st = SimState(0.0, np.array(rho, dtype=float), np.array(m, dtype=float))
    if st.rho.size != grid.n:
        raise ConfigError(f"initial data has {st.rho.size} cells, grid has {grid.n}")
    return st


def run(init, grid: Grid1D, cfg: SchemeConfig, p: gas_mod.GasParams, wp, *,
        bc=None, source=None, dcfg: diag.DiagConfig | None = None,
        allow_eps_violation=False, domain_check=True,
        progress=None) -> RunArtifact:
    """Advance to t_final, sampling every functional at the configured
    cadence.  Deterministic for a fixed configuration: no seeds, fixed
    iteration order."""
    t_start = _time.perf_counter()
    if p.eps > 0.0 and not eps_compat(p.eps, cfg.t_final):
        msg = (f"eps = {p.eps} violates the horizon compatibility "
               f"sqrt(eps) ln(1+T) <= eps**(1/4) at T = {cfg.t_final}")
        if not allow_eps_violation:
            raise ConfigError(msg + " (pass allow_eps_violation to override)")
        warnings.warn(msg, stacklevel=2)
    if domain_check:
        check_domain(grid, wp, cfg.t_final)
    if bc is None:
        bc = wave_boundary(wp, grid)
    state = _as_state(init, grid)
    u_floor = cfg.u_floor if cfg.u_floor is not None else 1e-10 * float(
        max(getattr(wp, "rho_plus", 0.0), state.rho.max(), 1e-300))
    if dcfg is None:
        dcfg = diag.DiagConfig(u_floor=u_floor)

    art = RunArtifact(gas=p, wave=wp, grid=grid, scheme=cfg, diag_config=dcfg)
    x = grid.centers
    mass_in = 0.0
    mass_out = 0.0
    clipped = 0.0
    fixed_m = 0.0
    warned_clip = False

    def sample(st):
        prev = art.records[-1] if art.records else None
        prev_aux = art.aux[-1] if art.aux else None
        rec, aux = diag.make_record(st.t, x, grid.dx, st.rho, st.m, wp, p, dcfg,
                                    prev=prev, prev_aux=prev_aux)
        art.times.append(st.t)
        art.states.append((st.rho.copy(), st.m.copy()))
        art.records.append(rec)
        art.aux.append(aux)

    sample(state)
    mass0 = art.records[0].mass
    k_sample = 1
    next_sample = min(k_sample * cfg.sample_dt, cfg.t_final)
    while state.t < cfg.t_final - 1e-12:
        dt = stable_dt(state, grid, cfg, p, u_floor=u_floor)
        dt = min(dt, next_sample - state.t, cfg.t_final - state.t)
        if dt <= 0.0:
            raise NumericsError(f"non-positive step dt = {dt} at t = {state.t}")
        state, info = step(state, dt, grid, cfg, p, bc, source=source, u_floor=u_floor)
        mass_in += info.mass_flux_left
        mass_out += info.mass_flux_right
        clipped += info.clipped_mass
        fixed_m += info.fixed_momentum
        if info.clipped_mass > cfg.clip_abort * mass0:
            raise NumericsError(
                f"clipped mass {info.clipped_mass:.3e} in one step exceeds the abort "
                f"threshold at t = {state.t:.6g}")
        if info.clipped_mass > cfg.clip_warn * mass0 and not warned_clip:
            warnings.warn(f"clipped mass {info.clipped_mass:.3e} above warning "
                          f"threshold at t = {state.t:.6g}", stacklevel=2)
            warned_clip = True
        if state.t >= next_sample - 1e-12:
            sample(state)
            k_sample += 1
            next_sample = min(k_sample * cfg.sample_dt, cfg.t_final)
            if progress is not None:
                progress(state.t)

    mass_final = art.records[-1].mass
    balance = mass_final - (mass0 + mass_in - mass_out + clipped)
    min_rho_series = [r.min_rho for r in art.records]
    rho1 = dcfg.rho1 if dcfg.rho1 is not None else 0.5 * getattr(wp, "rho_minus", 1.0)
    if rho1 >= getattr(wp, "rho_minus", np.inf):
        raise ConfigError("vacuum-vanishing threshold rho1 must stay below rho_minus")
    # energy/entropy budget slack: initial functionals plus the positive
    # source budget against (sup corrected energy + final dissipation)
    bd_series = [r.bd_energy for r in art.records]
    budget_margin = (bd_series[0] + art.records[0].energy + art.aux[-1]["src_cum"]
                     - (max(bd_series) + art.records[-1].diss_cum))
    art.summary = {
        "t_final": state.t,
        "mass_initial": mass0,
        "mass_final": mass_final,
        "mass_influx": mass_in,
        "mass_outflux": mass_out,
        "clipped_mass_total": clipped,
        "fixed_momentum_total": fixed_m,
        "mass_balance_defect": balance,
        "T0": diag.detect_t0(art.times, min_rho_series, rho1, dwell=dcfg.dwell),
        "T1": diag.detect_t1(art.times, min_rho_series, dcfg.vac_tol, dwell=dcfg.dwell),
        "rho1": rho1,
        "u_floor": u_floor,
        "budget_margin": budget_margin,
        "wall_time_s": _time.perf_counter() - t_start,
    }
    return art
