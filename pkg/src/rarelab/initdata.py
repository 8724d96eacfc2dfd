"""Admissible initial data (possibly containing vacuum regions) and the
lift / mollify / momentum-repair pipeline that produces strictly positive
regularized data for the approximate system.

The admissibility class requires rho0 >= 0 with m0 = 0 on the vacuum set,
far-field agreement with the wave, and finiteness of the weighted gap
integrals; `validate` reports each condition.  `regularize` lifts the
density by the floor eps**(1/(2 alpha - 2 theta)), mollifies the deviation
from the wave, and rebuilds the momentum through a signed cube root so the
cubed relative velocity converges to its unregularized limit in L1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import gas as gas_mod
from .errors import ConfigError

__all__ = [
    "InitialData",
    "RegularizedData",
    "ValidationReport",
    "validate",
    "lift_density",
    "mollify",
    "regularize",
    "make_benchmark",
    "load_initial_csv",
    "BENCHMARKS",
]


@dataclass
class InitialData:
    """Density / momentum fields sampled on a common grid."""

    x: np.ndarray
    rho0: np.ndarray
    m0: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.rho0 = np.asarray(self.rho0, dtype=float)
        self.m0 = np.asarray(self.m0, dtype=float)
        if not (self.x.shape == self.rho0.shape == self.m0.shape):
            raise ConfigError("x, rho0, m0 must share one shape")
        if self.x.size < 2 or np.any(np.diff(self.x) <= 0.0):
            raise ConfigError("x must be strictly increasing with >= 2 points")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def vacuum_set(self) -> np.ndarray:
        return self.rho0 == 0.0


@dataclass
class RegularizedData:
    """Output of the regularization pipeline; density bounded below by
    floor/2 when the asymptotic constant holds (floor_ok reports it)."""

    x: np.ndarray
    rho0_eps: np.ndarray
    m0_eps: np.ndarray
    eps: float
    M: float
    floor: float
    floor_ok: bool
    min_rho: float


@dataclass
class ValidationReport:
    checks: list  # (name, value, passed) triples

    @property
    def passed(self) -> bool:
        return all(ok for _, _, ok in self.checks)

    def __str__(self):
        lines = [f"{'PASS' if ok else 'FAIL'}  {name} = {val!r}" for name, val, ok in self.checks]
        return "\n".join(lines)


def validate(data: InitialData, wp, p: gas_mod.GasParams,
             far_field_tol=1e-6, edge_cells=5) -> ValidationReport:
    """Check the admissibility conditions on a grid; failures are reported,
    not raised."""
    x, rho0, m0, dx = data.x, data.rho0, data.m0, data.dx
    rho_bar0, u_bar0 = wp.state(0.0, x)
    checks = []

    checks.append(("rho0_nonnegative", float(rho0.min()), bool(np.all(rho0 >= 0.0))))

    vac = data.vacuum_set
    m_on_vac = float(np.max(np.abs(m0[vac]))) if vac.any() else 0.0
    checks.append(("momentum_zero_on_vacuum", m_on_vac, m_on_vac == 0.0))

    edge_gap = max(float(np.max(np.abs(rho0[:edge_cells] - rho_bar0[:edge_cells]))),
                   float(np.max(np.abs(rho0[-edge_cells:] - rho_bar0[-edge_cells:]))))
    checks.append(("far_field_match", edge_gap, edge_gap <= far_field_tol))

    v = relative_velocity(rho0, m0, u_bar0)
    grad = np.gradient(np.where(rho0 > 0.0, rho0, 0.0) ** (p.alpha - 0.5), x)
    integrals = {
        "int_grad_rho_pow_sq": float(np.sum(grad ** 2) * dx),
        "int_rho_psi": float(np.sum(gas_mod.rho_psi(rho0, rho_bar0, p)) * dx),
        "int_rho_vgap_sq": float(np.sum(rho0 * v ** 2) * dx),
        "int_rho_vgap_cubed": float(np.sum(rho0 * np.abs(v) ** 3) * dx),
    }
    for name, val in integrals.items():
        checks.append((name + "_finite", val, bool(np.isfinite(val))))
    return ValidationReport(checks)


def relative_velocity(rho0, m0, u_bar0):
    """m0/rho0 - u_bar0, with the convention 0 on the vacuum set (where the
    admissibility class forces m0 = 0 anyway)."""
    safe = np.where(rho0 > 0.0, rho0, 1.0)
    return np.where(rho0 > 0.0, m0 / safe - u_bar0, 0.0)


def density_floor(eps: float, p: gas_mod.GasParams) -> float:
    """Lower-bound value eps**(1/(2 alpha - 2 theta)) used by the lift."""
    return eps ** (1.0 / (2.0 * p.alpha - 2.0 * p.theta))


def lift_density(x, rho0, eps, p: gas_mod.GasParams, rho_minus):
    """Add the positivity floor on a plateau |x| <= M with linear ramps on
    M <= |x| <= M+1 and no change beyond; M is the smallest grid-valid
    half-width outside which rho0 >= rho_minus/2 already holds.

    Returns (lifted density, M).
    """
    x = np.asarray(x, dtype=float)
    rho0 = np.asarray(rho0, dtype=float)
    lam = 0.5 * rho_minus
    low = rho0 < lam
    if not low.any():
        M = float(abs(x[np.argmin(np.abs(x))]))  # plateau collapses to the origin cell
    else:
        M = float(np.max(np.abs(x[low])))
    dx = float(x[1] - x[0])
    M += dx  # round outward one cell
    if M + 1.0 > min(abs(x[0]), abs(x[-1])):
        raise ConfigError(
            "cannot determine a lift half-width M: density below rho_minus/2 "
            "persists to the domain edge")
    flo = density_floor(eps, p)
    ramp = np.clip(M + 1.0 - np.abs(x), 0.0, 1.0)
    return rho0 + flo * ramp, M


_BUMP_NORM = None


def _bump_norm():
    global _BUMP_NORM
    if _BUMP_NORM is None:
        val, _ = integrate.quad(lambda s: np.exp(1.0 / (s * s - 1.0)), -1.0, 1.0)
        _BUMP_NORM = 1.0 / val
    return _BUMP_NORM


def mollify(x, f, eps):
    """Discrete convolution with the compactly supported unit-mass bump
    j(s) = c exp(1/(s^2-1)) on (-1, 1), scaled to radius eps.

    The sampled kernel is renormalized to unit sum so constants are
    preserved exactly; support widening is at most eps.  When eps is below
    the grid spacing the convolution degenerates to the identity (warned).
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    if eps <= 0.0:
        raise ConfigError(f"smoothing radius must be > 0, got {eps}")
    dx = float(x[1] - x[0])
    k = int(np.floor(eps / dx))
    if eps < dx or k == 0:
        warnings.warn("mollification radius below grid spacing; returning the field unchanged",
                      stacklevel=2)
        return f.copy()
    s = np.arange(-k, k + 1) * dx / eps
    s = s[np.abs(s) < 1.0]
    kern = _bump_norm() * np.exp(1.0 / (s * s - 1.0))
    kern /= kern.sum()
    pad = len(s) // 2
    f_pad = np.pad(f, pad, mode="edge")
    return np.convolve(f_pad, kern, mode="valid")


def regularize(data: InitialData, eps, wp, p: gas_mod.GasParams) -> RegularizedData:
    """Full pipeline: lift -> mollify the wave-relative density -> rebuild
    momentum from the mollified cubed relative velocity via a signed cube
    root (F**(1/3) := sign(F) |F|**(1/3))."""
    if eps <= 0.0:
        raise ConfigError(f"regularization strength must be > 0, got {eps}")
    x = data.x
    rho_bar0, u_bar0 = wp.state(0.0, x)
    rho1, M = lift_density(x, data.rho0, eps, p, wp.rho_minus)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # identity fallback is fine here
        rho0_eps = mollify(x, rho1 - rho_bar0, eps) + rho_bar0
        v = relative_velocity(data.rho0, data.m0, u_bar0)
        f0 = data.rho0 * v ** 3
        f0_eps = mollify(x, f0, eps)
    m0_eps = rho0_eps * (u_bar0 + np.cbrt(f0_eps / rho0_eps))
    flo = density_floor(eps, p)
    min_rho = float(rho0_eps.min())
    if min_rho <= 0.0:
        raise ConfigError("regularized density is not strictly positive; "
                          "refine the grid or enlarge eps")
    return RegularizedData(x=x, rho0_eps=rho0_eps, m0_eps=m0_eps, eps=eps,
                           M=M, floor=flo, floor_ok=min_rho >= 0.5 * flo,
                           min_rho=min_rho)


# -- shipped benchmark family ------------------------------------------------

def _smoothstep(r):
    r = np.clip(r, 0.0, 1.0)
    return r * r * (3.0 - 2.0 * r)


def _notch_mask(x, center, inner=1.0, ramp=1.0):
    """C^1 mask vanishing on [center-inner, center+inner], one beyond the
    ramp; density vanishes quadratically at the vacuum edge so sqrt(rho)
    stays Lipschitz."""
    return _smoothstep((np.abs(x - center) - inner) / ramp)


def make_benchmark(name, x, wp, p: gas_mod.GasParams, **kw) -> InitialData:
    """Named initial-data generators used by the test suite and the CLI."""
    x = np.asarray(x, dtype=float)
    rho_bar0, u_bar0 = wp.state(0.0, x)
    if name == "pure_wave":
        return InitialData(x, rho_bar0, rho_bar0 * u_bar0, {"benchmark": name})
    if name in ("stability", "vacuum_notch"):
        notch_center = kw.get("notch_center", 2.0)
        notch_ramp = kw.get("notch_ramp", 3.0)
        bump_amp = kw.get("bump_amp", 0.3)
        bump_center = kw.get("bump_center", -12.0)
        bump_width = kw.get("bump_width", 2.0)
        vel_amp = kw.get("vel_amp", 0.5)
        vel_center = kw.get("vel_center", 12.0)
        vel_width = kw.get("vel_width", 4.0)
        bump = bump_amp * np.exp(-((x - bump_center) / bump_width) ** 2)
        rho0 = (rho_bar0 + bump) * _notch_mask(x, notch_center, ramp=notch_ramp)
        v = vel_amp * np.exp(-((x - vel_center) / vel_width) ** 2)
        m0 = rho0 * (u_bar0 + v)
        return InitialData(x, rho0, m0, {"benchmark": name,
                                         "vacuum_interval": (notch_center - 1.0,
                                                             notch_center + 1.0)})
    if name == "smooth_bump":
        bump_amp = kw.get("bump_amp", 0.3)
        bump_center = kw.get("bump_center", 0.0)
        bump_width = kw.get("bump_width", 2.0)
        vel_amp = kw.get("vel_amp", 0.1)
        rho0 = rho_bar0 + bump_amp * np.exp(-((x - bump_center) / bump_width) ** 2)
        v = vel_amp * np.exp(-((x - bump_center) / bump_width) ** 2)
        m0 = rho0 * (u_bar0 + v)
        return InitialData(x, rho0, m0, {"benchmark": name})
    raise ConfigError(f"unknown benchmark {name!r}; available: {sorted(BENCHMARKS)}")


BENCHMARKS = ("pure_wave", "stability", "vacuum_notch", "smooth_bump")


def load_initial_csv(rho_path, m_path) -> InitialData:
    """Import initial data from two two-column CSVs (x, rho0) and (x, m0)
    sharing one x grid."""
    xr, rho0 = np.loadtxt(rho_path, delimiter=",", skiprows=1, unpack=True)
    xm, m0 = np.loadtxt(m_path, delimiter=",", skiprows=1, unpack=True)
    if xr.shape != xm.shape or np.max(np.abs(xr - xm)) > 1e-12:
        raise ConfigError("density and momentum CSVs must share one x grid")
    return InitialData(xr, rho0, m0, {"source": (str(rho_path), str(m_path))})
