"""Monitored functionals (energy, entropy, dissipation, gaps), weak-form
residuals, vacuum and blow-up detectors, and particle-path probes.

Everything here is a pure post-processing computation on (state, wave)
pairs or on completed run artifacts: no solver state is mutated.  Vacuum
conventions follow the structure of the integrands: rho-weighted terms
contribute zero where the density is at vacuum, the relative-entropy
weight takes its finite limit value, and velocity is reconstructed from
momentum only above a density floor (the wave velocity elsewhere).
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from . import gas as gas_mod
from .errors import ConfigError

__all__ = [
    "DiagConfig",
    "FunctionalRecord",
    "RECORD_FIELDS",
    "StateView",
    "make_record",
    "velocity_fields",
    "energy",
    "bd_energy",
    "dissipation_rate",
    "third_moment",
    "lambda_field",
    "lambda_identity_residual",
    "gap_norms",
    "vacuum_monitor",
    "ux_sup",
    "entropy_balance_source",
    "detect_threshold_time",
    "detect_t0",
    "detect_t1",
    "weak_form_residual",
    "particle_path",
    "blowup_indicator",
    "SpaceTimeBump",
    "PlateauBump",
]


@dataclass(frozen=True)
class DiagConfig:
    u_floor: float
    lp_exponent: float = 4.0
    rho1: float | None = None      # vacuum-vanishing threshold, default rho_minus/2
    dwell: int = 5                 # samples a detector must hold before latching
    vac_tol: float = 1e-3          # density regarded as vacuum by the T1 detector


@dataclass
class FunctionalRecord:
    """One sampling instant of every monitored functional; the field order
    here is the column order of functionals.csv."""

    t: float
    mass: float
    energy: float
    bd_energy: float
    diss_cum: float
    sup_gap: float
    l2_gap: float
    lp_gap: float
    min_rho: float
    max_rho: float
    vac_measure: float
    m3: float
    bd_grad: float
    lambda_l2: float
    ux_sup: float
    blowup_cum: float
    l2_ugap: float


RECORD_FIELDS = [f.name for f in fields(FunctionalRecord)]


def velocity_fields(rho, m, u_bar, u_floor):
    """(u_diag, u_dyn, valid): momentum-derived velocity above the floor;
    the wave velocity (diagnostics) or zero (dynamics) below it."""
    valid = rho > u_floor
    safe = np.where(valid, rho, 1.0)
    u_dyn = np.where(valid, m / safe, 0.0)
    u_diag = np.where(valid, u_dyn, u_bar)
    return u_diag, u_dyn, valid


def _masked_gradient(vals, valid, dx):
    """Centered interior differences restricted to cells whose full stencil
    is valid; one-sided at the array boundary; zero elsewhere."""
    g = np.zeros_like(vals)
    if vals.size < 2:
        return g
    ok = valid[1:-1] & valid[:-2] & valid[2:]
    g[1:-1][ok] = (vals[2:][ok] - vals[:-2][ok]) / (2.0 * dx)
    if valid[0] and valid[1]:
        g[0] = (vals[1] - vals[0]) / dx
    if valid[-1] and valid[-2]:
        g[-1] = (vals[-1] - vals[-2]) / dx
    return g


def _gradient(vals, dx):
    return _masked_gradient(vals, np.ones(vals.shape, dtype=bool), dx)


def _quad(vals, dx):
    return float(np.sum(vals) * dx)


class StateView:
    """Precomputed per-sample bundle: state, wave fields, velocities."""

    def __init__(self, t, x, dx, rho, m, wp, p: gas_mod.GasParams, dcfg: DiagConfig):
        self.t, self.x, self.dx = float(t), x, float(dx)
        self.rho, self.m = rho, m
        self.wp, self.p, self.dcfg = wp, p, dcfg
        bundle = wp.state_and_derivatives(t, x)
        (self.rho_bar, self.u_bar, self.rho_bar_x, self.u_bar_x,
         self.rho_bar_xx, self.u_bar_xx, self.u_bar_t) = (
            np.broadcast_to(np.asarray(a, dtype=float), x.shape) for a in bundle)
        self.u_diag, self.u_dyn, self.valid = velocity_fields(rho, m, self.u_bar, dcfg.u_floor)
        self.ugap = np.where(self.valid, self.u_diag - self.u_bar, 0.0)


def energy(v: StateView) -> float:
    kin = 0.5 * v.rho * v.ugap ** 2
    return _quad(kin + gas_mod.rho_psi(v.rho, v.rho_bar, v.p), v.dx)


def bd_energy(v: StateView) -> tuple[float, int]:
    """Entropy-corrected energy: the kinetic part uses the effective
    velocity gap (u - u_bar) + (phi_eps(rho))_x.  Cells below the floor are
    excluded from the gradient (their count is returned): the potential is
    singular at vacuum."""
    phi = np.zeros_like(v.rho)
    phi[v.valid] = gas_mod.phi_eps(v.rho[v.valid], v.p)
    phi_x = _masked_gradient(phi, v.valid, v.dx)
    eff = np.where(v.valid, v.ugap + phi_x, 0.0)
    val = _quad(0.5 * v.rho * eff ** 2 + gas_mod.rho_psi(v.rho, v.rho_bar, v.p), v.dx)
    return val, int(np.sum(~v.valid))


def dissipation_rate(v: StateView) -> dict:
    """Signed instantaneous dissipation integrands, reported per term:

    t1: u_bar_x [p(rho) - p(rho_bar) - p'(rho_bar)(rho - rho_bar)]
    t2: rho (u - u_bar)^2 u_bar_x
    t3: mu_eps(rho) [(u - u_bar)_x]^2
    t4: [(rho^k - rho_bar^k)_x]^2,          k = (alpha + gamma - 1)/2
    t5: eps [(rho^k' - rho_bar^k')_x]^2,    k' = (theta + gamma - 1)/2
    """
    p = v.p
    g = p.gamma
    pr = v.rho ** g
    prb = v.rho_bar ** g
    t1 = _quad(v.u_bar_x * (pr - prb - g * v.rho_bar ** (g - 1.0) * (v.rho - v.rho_bar)), v.dx)
    t2 = _quad(v.rho * v.ugap ** 2 * v.u_bar_x, v.dx)
    ugap_x = _masked_gradient(v.ugap, v.valid, v.dx)
    t3 = _quad(gas_mod.viscosity_eps(v.rho, p) * ugap_x ** 2, v.dx)
    k = 0.5 * (p.alpha + g - 1.0)
    t4 = _quad(_gradient(v.rho ** k - v.rho_bar ** k, v.dx) ** 2, v.dx)
    kth = 0.5 * (p.theta + g - 1.0)
    t5_raw = _quad(_gradient(v.rho ** kth - v.rho_bar ** kth, v.dx) ** 2, v.dx)
    total = t1 + t2 + t3 + t4 + p.eps * t5_raw
    return {"t1": t1, "t2": t2, "t3": t3, "t4": t4, "t5": p.eps * t5_raw,
            "t5_raw": t5_raw, "total": total}


def third_moment(v: StateView) -> tuple[float, float]:
    m3 = _quad(v.rho * np.abs(v.ugap) ** 3, v.dx)
    ugap_x = _masked_gradient(v.ugap, v.valid, v.dx)
    weighted = _quad(gas_mod.viscosity_eps(v.rho, v.p) * ugap_x ** 2 * np.abs(v.ugap), v.dx)
    return m3, weighted


def lambda_field(v: StateView) -> tuple[np.ndarray, float]:
    """Per-cell diffusion-flux representative rho^alpha (u - u_bar)_x (zero
    at vacuum) and its L2 norm."""
    ugap_x = _masked_gradient(v.ugap, v.valid, v.dx)
    lam = np.where(v.valid, v.rho ** v.p.alpha * ugap_x, 0.0)
    return lam, float(np.sqrt(_quad(lam ** 2, v.dx)))


def lambda_identity_residual(v: StateView, phi) -> float:
    """Integration-by-parts identity for the diffusion representative
    against a test function phi(x):

        |int Lam phi + int rho^(a-1/2) sqrt(rho) (u-u_bar) phi_x
             + (2a/(2a-1)) int (rho^(a-1/2))_x sqrt(rho) (u-u_bar) phi| -> 0.
    """
    lam, _ = lambda_field(v)
    a = v.p.alpha
    pw = v.rho ** (a - 0.5)
    srho_gap = np.sqrt(v.rho) * v.ugap
    term1 = _quad(lam * phi(v.x), v.dx)
    term2 = _quad(pw * srho_gap * phi.dx(v.x), v.dx)
    term3 = (2.0 * a / (2.0 * a - 1.0)) * _quad(_gradient(pw, v.dx) * srho_gap * phi(v.x), v.dx)
    return abs(term1 + term2 + term3)


def gap_norms(v: StateView) -> tuple[float, float, float, float]:
    gap = v.rho - v.rho_bar
    sup_gap = float(np.max(np.abs(gap)))
    l2_gap = float(np.sqrt(_quad(gap ** 2, v.dx)))
    pexp = v.dcfg.lp_exponent
    lp_gap = float(_quad(np.abs(gap) ** pexp, v.dx) ** (1.0 / pexp))
    l2_ugap = float(np.sqrt(_quad(np.where(v.valid, v.ugap ** 2, 0.0), v.dx)))
    return sup_gap, l2_gap, lp_gap, l2_ugap


def vacuum_monitor(v: StateView) -> tuple[float, float]:
    min_rho = float(v.rho.min())
    vac_measure = float(np.sum(v.rho <= 0.5 * v.rho_bar) * v.dx)
    return min_rho, vac_measure


def ux_sup(v: StateView) -> float:
    """L-inf norm of u_x for the diagnostic velocity field (wave-filled at
    vacuum); the jump at a vacuum boundary is precisely the blow-up signal."""
    return float(np.max(np.abs(_gradient(v.u_diag, v.dx))))


def entropy_balance_source(v: StateView) -> float:
    """Signed source integral of the combined energy + entropy balance:
    the wave-curvature and wave-gradient terms that feed the left side.

    I1 = rho^a u_bar_xx (u - u_bar)
    I2 = eps [rho^th u_bar_xx (u - u_bar) + (1 - a/th)(rho^th)_x (u - u_bar) u_bar_x]
    I3 = (8 a g / (a+g-1)^2) (rho_bar^k)_xx (rho^k - rho_bar^k),   k = (a+g-1)/2
    I4 = eps (8 a g / (th+g-1)^2) analog with k' = (th+g-1)/2
    I5 = -(2 g / (a+g-1)) [(rho_bar^k)_x rho_bar^((g-a-1)/2)]_x (rho^a - rho_bar^a)
    I6 = -eps (2 a g / (th (th+g-1))) analog with th
    """
    p = v.p
    a, th, g = p.alpha, p.theta, p.gamma

    def bar_pow_derivs(s):
        # first/second x-derivatives of rho_bar^s via the chain rule
        f_x = s * v.rho_bar ** (s - 1.0) * v.rho_bar_x
        f_xx = s * ((s - 1.0) * v.rho_bar ** (s - 2.0) * v.rho_bar_x ** 2
                    + v.rho_bar ** (s - 1.0) * v.rho_bar_xx)
        return f_x, f_xx

    i1 = _quad(v.rho ** a * v.u_bar_xx * v.ugap, v.dx)
    src = i1
    if p.eps > 0.0:
        rth_x = _gradient(v.rho ** th, v.dx)
        i2 = p.eps * _quad(v.rho ** th * v.u_bar_xx * v.ugap
                           + (1.0 - a / th) * rth_x * v.ugap * v.u_bar_x, v.dx)
        src += i2
    k = 0.5 * (a + g - 1.0)
    bk_x, bk_xx = bar_pow_derivs(k)
    i3 = (8.0 * a * g / (a + g - 1.0) ** 2) * _quad(bk_xx * (v.rho ** k - v.rho_bar ** k), v.dx)
    src += i3
    if p.eps > 0.0:
        kth = 0.5 * (th + g - 1.0)
        bt_x, bt_xx = bar_pow_derivs(kth)
        i4 = p.eps * (8.0 * a * g / (th + g - 1.0) ** 2) * _quad(
            bt_xx * (v.rho ** kth - v.rho_bar ** kth), v.dx)
        src += i4
    # [ (rho_bar^k)_x rho_bar^((g-a-1)/2) ]_x expanded by the product rule
    s2 = 0.5 * (g - a - 1.0)
    inner_x = bk_xx * v.rho_bar ** s2 + bk_x * s2 * v.rho_bar ** (s2 - 1.0) * v.rho_bar_x
    i5 = -(2.0 * g / (a + g - 1.0)) * _quad(inner_x * (v.rho ** a - v.rho_bar ** a), v.dx)
    src += i5
    if p.eps > 0.0:
        kth = 0.5 * (th + g - 1.0)
        bt_x, bt_xx = bar_pow_derivs(kth)
        s2t = 0.5 * (g - th - 1.0)
        inner_xt = bt_xx * v.rho_bar ** s2t + bt_x * s2t * v.rho_bar ** (s2t - 1.0) * v.rho_bar_x
        i6 = -p.eps * (2.0 * a * g / (th * (th + g - 1.0))) * _quad(
            inner_xt * (v.rho ** th - v.rho_bar ** th), v.dx)
        src += i6
    return src


def make_record(t, x, dx, rho, m, wp, p, dcfg: DiagConfig,
                prev: FunctionalRecord | None = None,
                prev_aux: dict | None = None) -> tuple[FunctionalRecord, dict]:
    """Evaluate every monitored functional at one instant; cumulative
    columns extend the previous record by trapezoidal increments."""
    v = StateView(t, x, dx, rho, m, wp, p, dcfg)
    mass = _quad(rho, dx)
    en = energy(v)
    bd, bd_excluded = bd_energy(v)
    diss = dissipation_rate(v)
    m3, m3_weighted = third_moment(v)
    _, lam_l2 = lambda_field(v)
    sup_gap, l2_gap, lp_gap, l2_ugap = gap_norms(v)
    min_rho, vac_measure = vacuum_monitor(v)
    uxs = ux_sup(v)
    grad_pw = _gradient(rho ** (p.alpha - 0.5), dx)
    bd_grad = _quad(grad_pw ** 2, dx)
    src = entropy_balance_source(v)

    if prev is None:
        diss_cum = 0.0
        blowup_cum = 0.0
        src_cum = 0.0
    else:
        h = t - prev.t
        diss_cum = prev.diss_cum + 0.5 * h * (prev_aux["diss_rate"] + diss["total"])
        blowup_cum = prev.blowup_cum + 0.5 * h * (prev.ux_sup + uxs)
        src_cum = prev_aux["src_cum"] + 0.5 * h * (max(prev_aux["src"], 0.0) + max(src, 0.0))

    rec = FunctionalRecord(
        t=float(t), mass=mass, energy=en, bd_energy=bd, diss_cum=diss_cum,
        sup_gap=sup_gap, l2_gap=l2_gap, lp_gap=lp_gap, min_rho=min_rho,
        max_rho=float(rho.max()), vac_measure=vac_measure, m3=m3,
        bd_grad=bd_grad, lambda_l2=lam_l2, ux_sup=uxs, blowup_cum=blowup_cum,
        l2_ugap=l2_ugap)
    aux = {"diss_rate": diss["total"], "diss_terms": diss, "src": src,
           "src_cum": src_cum, "m3_weighted": m3_weighted,
           "bd_excluded": bd_excluded}
    return rec, aux


# -- detectors ---------------------------------------------------------------

def detect_threshold_time(times, series, threshold, dwell=5, above=True):
    """First time the series crosses the threshold and holds for `dwell`
    consecutive samples (hysteresis against round-off flicker); None if it
    never latches."""
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    good = series >= threshold if above else series <= threshold
    run = 0
    for i, ok in enumerate(good):
        run = run + 1 if ok else 0
        if run >= dwell:
            return float(times[i - dwell + 1])
    return None


def detect_t0(times, min_rho, rho1, dwell=5):
    """Vacuum-vanishing time: density floor first sustained above rho1."""
    return detect_threshold_time(times, min_rho, rho1, dwell=dwell, above=True)


def detect_t1(times, min_rho, vac_tol, dwell=5):
    """Last instant the state still touches vacuum (up to vac_tol) before
    the sustained recovery; None if it never touches vacuum."""
    times = np.asarray(times, dtype=float)
    min_rho = np.asarray(min_rho, dtype=float)
    vac = min_rho <= vac_tol
    if not vac.any():
        return None
    t_rec = detect_threshold_time(times, min_rho, vac_tol, dwell=dwell, above=True)
    if t_rec is None:
        return None
    last_vac = times[vac & (times < t_rec)]
    return float(last_vac[-1]) if last_vac.size else None


# -- test functions ----------------------------------------------------------

class _Bump1D:
    """Smooth compactly supported bump exp(1/(r^2 - 1)) on |r| < 1."""

    def __init__(self, center, width):
        self.center, self.width = float(center), float(width)

    def _r(self, s):
        return (np.asarray(s, dtype=float) - self.center) / self.width

    def __call__(self, s):
        r = self._r(s)
        inside = np.abs(r) < 1.0
        out = np.zeros_like(r)
        ri = r[inside]
        out[inside] = np.exp(1.0 / (ri * ri - 1.0))
        return out

    def d1(self, s):
        r = self._r(s)
        inside = np.abs(r) < 1.0
        out = np.zeros_like(r)
        ri = r[inside]
        out[inside] = np.exp(1.0 / (ri * ri - 1.0)) * (-2.0 * ri / (ri * ri - 1.0) ** 2)
        return out / self.width

    def d2(self, s):
        r = self._r(s)
        inside = np.abs(r) < 1.0
        out = np.zeros_like(r)
        ri = r[inside]
        q = ri * ri - 1.0
        b = np.exp(1.0 / q)
        # b'' = b [ (2r/q^2)^2 - (2q - 8r^2)/q^3 ]
        out[inside] = b * (4.0 * ri * ri / q ** 4 - (2.0 * q - 8.0 * ri * ri) / q ** 3)
        return out / self.width ** 2


class SpaceTimeBump:
    """phi(x, t) = bump_x(x) * bump_t(t) with analytic derivatives."""

    def __init__(self, x_center, x_width, t_center, t_width):
        self.bx = _Bump1D(x_center, x_width)
        self.bt = _Bump1D(t_center, t_width)
        self.support_x = (x_center - x_width, x_center + x_width)
        self.support_t = (t_center - t_width, t_center + t_width)

    def __call__(self, x, t):
        return self.bx(x) * self.bt(t)

    def dt(self, x, t):
        return self.bx(x) * self.bt.d1(t)

    def dx(self, x, t):
        return self.bx.d1(x) * self.bt(t)

    def dxx(self, x, t):
        return self.bx.d2(x) * self.bt(t)


class PlateauBump:
    """C^1 space profile equal to one on [a + r, b - r], smooth ramps of
    width r, zero outside [a, b]; for near-indicator test functions."""

    def __init__(self, a, b, ramp):
        if not a + 2 * ramp <= b:
            raise ConfigError("plateau interval too small for the ramp width")
        self.a, self.b, self.ramp = float(a), float(b), float(ramp)
        self.support_x = (a, b)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        up = np.clip((x - self.a) / self.ramp, 0.0, 1.0)
        dn = np.clip((self.b - x) / self.ramp, 0.0, 1.0)
        return _sstep(up) * _sstep(dn)

    def dx(self, x):
        x = np.asarray(x, dtype=float)
        up = np.clip((x - self.a) / self.ramp, 0.0, 1.0)
        dn = np.clip((self.b - x) / self.ramp, 0.0, 1.0)
        return (_dsstep(up) * _sstep(dn) - _sstep(up) * _dsstep(dn)) / self.ramp


def _sstep(r):
    return r * r * (3.0 - 2.0 * r)


def _dsstep(r):
    inside = (r > 0.0) & (r < 1.0)
    return np.where(inside, 6.0 * r * (1.0 - r), 0.0)


# -- post-hoc analyses on run artifacts ---------------------------------------

def _artifact_views(artifact, t1=None, t2=None):
    times = np.asarray(artifact.times, dtype=float)
    sel = np.ones(times.shape, dtype=bool)
    if t1 is not None:
        sel &= times >= t1 - 1e-12
    if t2 is not None:
        sel &= times <= t2 + 1e-12
    idx = np.where(sel)[0]
    if idx.size < 2:
        raise ConfigError("run artifact holds too few snapshots in the window")
    return idx, times


def weak_form_residual(artifact, zeta, psi, t1, t2):
    """Absolute residuals of the wave-relative weak identities over
    [t1, t2], with the diffusion pairing evaluated through its
    integration-by-parts form (no velocity derivatives of the state).

    zeta(x, t): C^1, compact support inside the domain (mass identity).
    psi(x, t):  smooth, compact support inside the domain and in [t1, t2)
                (momentum identity; psi(., t2) must vanish).
    Returns (mass_residual, momentum_residual).
    """
    idx, times = _artifact_views(artifact, t1, t2)
    x = artifact.grid.centers
    dx = artifact.grid.dx
    p = artifact.gas
    wp = artifact.wave
    dcfg = artifact.diag_config

    for tf in (zeta, psi):
        lo, hi = tf.support_x
        if lo <= x[0] or hi >= x[-1]:
            raise ConfigError("test-function support touches the domain boundary")
    if np.max(np.abs(psi(x, times[idx[-1]]))) > 0.0:
        raise ConfigError("psi must vanish at the window's final time")

    mass_bnd = []
    mass_bulk = []
    mom_bulk = []
    for i in idx:
        t = times[i]
        rho, m = artifact.states[i]
        v = StateView(t, x, dx, rho, m, wp, p, dcfg)
        gap_rho = rho - v.rho_bar
        gap_m = m - v.rho_bar * v.u_bar
        mass_bnd.append(_quad(gap_rho * zeta(x, t), dx))
        mass_bulk.append(_quad(gap_rho * zeta.dt(x, t) + gap_m * zeta.dx(x, t), dx))

        rho_u2 = np.where(v.valid, m * v.u_dyn, 0.0)
        hyp = (rho_u2 - v.rho_bar * v.u_bar ** 2) + (rho ** p.gamma - v.rho_bar ** p.gamma)
        srho_gap = np.sqrt(np.where(rho > 0.0, rho, 0.0)) * v.ugap
        pw_a = rho ** (p.alpha - 0.5)
        diff_pair = -_quad(pw_a * srho_gap * psi.dxx(x, t), dx) \
            - (2.0 * p.alpha / (2.0 * p.alpha - 1.0)) * _quad(
                _gradient(pw_a, dx) * srho_gap * psi.dx(x, t), dx)
        if p.eps > 0.0:
            pw_t = rho ** (p.theta - 0.5)
            pw_t = np.where(rho > 0.0, pw_t, 0.0)
            diff_pair += p.eps * (-_quad(pw_t * srho_gap * psi.dxx(x, t), dx)
                                  - (2.0 * p.theta / (2.0 * p.theta - 1.0)) * _quad(
                                      _masked_gradient(pw_t, rho > 0.0, dx) * srho_gap
                                      * psi.dx(x, t), dx))
        visc_wave = _quad(gas_mod.viscosity_eps(rho, p) * v.u_bar_x * psi.dx(x, t), dx)
        mom_bulk.append(_quad(gap_m * psi.dt(x, t) + hyp * psi.dx(x, t), dx)
                        - diff_pair - visc_wave)

    tsel = times[idx]
    mass_res = abs((mass_bnd[-1] - mass_bnd[0]) - np.trapezoid(mass_bulk, tsel))
    rho0, m0 = artifact.states[idx[0]]
    v0 = StateView(tsel[0], x, dx, rho0, m0, wp, p, dcfg)
    mom_init = _quad((m0 - v0.rho_bar * v0.u_bar) * psi(x, tsel[0]), dx)
    mom_res = abs(mom_init + np.trapezoid(mom_bulk, tsel))
    return mass_res, mom_res


def particle_path(artifact, x_seed, t_from, t_to, n_sub=4):
    """Integrate dX/ds = u(X, s) with classical RK4 over the snapshot-
    interpolated velocity (linear in x and in t), then check the transport
    identity rho(X(t), t) = rho(X(t_from), t_from) exp(-int u_x ds).

    Returns a dict with the trajectory, the transport defect relative to
    the local density, and a truncated-path flag.
    """
    idx, times = _artifact_views(artifact, t_from, t_to)
    x = artifact.grid.centers
    dx = artifact.grid.dx
    tsel = times[idx]
    u_fields = []
    ux_fields = []
    rho_fields = []
    for i in idx:
        rho, m = artifact.states[i]
        rho_bar, u_bar = artifact.wave.state(times[i], x)
        u_diag, _, _ = velocity_fields(rho, m, u_bar, artifact.diag_config.u_floor)
        u_fields.append(u_diag)
        ux_fields.append(_gradient(u_diag, dx))
        rho_fields.append(rho)
    u_fields = np.asarray(u_fields)
    ux_fields = np.asarray(ux_fields)

    def interp(fields, t, xq):
        j = np.clip(np.searchsorted(tsel, t) - 1, 0, len(tsel) - 2)
        w = (t - tsel[j]) / (tsel[j + 1] - tsel[j])
        w = min(max(w, 0.0), 1.0)
        f = (1.0 - w) * fields[j] + w * fields[j + 1]
        return float(np.interp(xq, x, f))

    traj_t = [tsel[0]]
    traj_x = [float(x_seed)]
    ux_vals = [interp(ux_fields, tsel[0], x_seed)]
    truncated = False
    pos = float(x_seed)
    for j in range(len(tsel) - 1):
        h = (tsel[j + 1] - tsel[j]) / n_sub
        for k in range(n_sub):
            s = tsel[j] + k * h
            k1 = interp(u_fields, s, pos)
            k2 = interp(u_fields, s + 0.5 * h, pos + 0.5 * h * k1)
            k3 = interp(u_fields, s + 0.5 * h, pos + 0.5 * h * k2)
            k4 = interp(u_fields, s + h, pos + h * k3)
            pos += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not x[0] <= pos <= x[-1]:
                truncated = True
                break
            traj_t.append(s + h)
            traj_x.append(pos)
            ux_vals.append(interp(ux_fields, s + h, pos))
        if truncated:
            break

    traj_t = np.asarray(traj_t)
    traj_x = np.asarray(traj_x)
    ux_vals = np.asarray(ux_vals)
    rho_start = float(np.interp(traj_x[0], x, rho_fields[0]))
    rho_end = interp(np.asarray(rho_fields), traj_t[-1], traj_x[-1])
    predicted = rho_start * np.exp(-np.trapezoid(ux_vals, traj_t))
    floor = artifact.diag_config.u_floor
    defect = abs(rho_end - predicted) / max(rho_end, floor)
    return {"t": traj_t, "x": traj_x, "rho_end": rho_end, "rho_predicted": predicted,
            "defect": float(defect), "truncated": truncated}


def blowup_indicator(artifact, t_start, window):
    """Windowed integral of ||u_x||_inf from the stored record series plus
    the full cumulative curve."""
    times = np.asarray([r.t for r in artifact.records])
    uxs = np.asarray([r.ux_sup for r in artifact.records])
    if t_start < times[0] - 1e-12 or t_start + window > times[-1] + 1e-12:
        raise ConfigError("blow-up window lies outside the run horizon")
    tq = np.linspace(t_start, t_start + window, 129)
    vq = np.interp(tq, times, uxs)
    cum = np.asarray([r.blowup_cum for r in artifact.records])
    return float(np.trapezoid(vq, tq)), times, cum
