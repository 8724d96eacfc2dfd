"""Thermodynamic closure and characteristic algebra for the isentropic
gamma-law gas with degenerate, density-dependent viscosity.

Pressure is p(rho) = rho**gamma and the (regularized) viscosity is
mu_eps(rho) = rho**alpha + eps * rho**theta, both with unit gas constants.
All functions are pure, accept scalars or numpy arrays, and vanish or
degenerate gracefully at vacuum (rho == 0) where the formulas allow it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GasParams",
    "pressure",
    "sound_speed",
    "viscosity_eps",
    "lambda_speed",
    "riemann_invariant",
    "psi",
    "rho_psi",
    "phi_eps",
    "phi_eps_drho",
]


@dataclass(frozen=True)
class GasParams:
    """Adiabatic exponent, viscosity exponents and regularization strength.

    gamma : adiabatic exponent, > 1
    alpha : viscosity exponent, > 1/2
    theta : auxiliary viscosity exponent, in (0, 1/2)
    eps   : regularization strength, >= 0
    """

    gamma: float
    alpha: float
    theta: float = 1.0 / 3.0
    eps: float = 0.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must be > 1, got {self.gamma}")
        if not self.alpha > 0.5:
            raise ValueError(f"alpha must be > 1/2, got {self.alpha}")
        if not 0.0 < self.theta < 0.5:
            raise ValueError(f"theta must lie in (0, 1/2), got {self.theta}")
        if not self.eps >= 0.0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")

    @property
    def estimate_regime(self) -> bool:
        """True iff alpha lies in (1/2, (gamma+1)/2], where the a priori
        energy bounds are available.  Outside the regime everything still
        runs; diagnostics annotate the flag."""
        return 0.5 < self.alpha <= 0.5 * (self.gamma + 1.0)


def _check_rho(rho, allow_zero=True):
    rho = np.asarray(rho, dtype=float)
    if not np.all(np.isfinite(rho)):
        raise ValueError("density must be finite")
    lo = 0.0 if allow_zero else np.nextafter(0.0, 1.0)
    if np.any(rho < lo):
        kind = "negative" if allow_zero else "non-positive"
        raise ValueError(f"{kind} density not in domain")
    return rho


def pressure(rho, p: GasParams):
    """Pressure p(rho) = rho**gamma (monotone, vanishing at vacuum)."""
    rho = _check_rho(rho)
    return rho ** p.gamma


def sound_speed(rho, p: GasParams):
    """sqrt(p'(rho)) = sqrt(gamma) * rho**((gamma-1)/2)."""
    rho = _check_rho(rho)
    return np.sqrt(p.gamma) * rho ** (0.5 * (p.gamma - 1.0))


def viscosity_eps(rho, p: GasParams):
    """Regularized viscosity mu_eps(rho) = rho**alpha + eps * rho**theta."""
    rho = _check_rho(rho)
    mu = rho ** p.alpha
    if p.eps > 0.0:
        mu = mu + p.eps * rho ** p.theta
    return mu


def lambda_speed(i: int, rho, u, p: GasParams):
    """Characteristic speed of field i: lambda_1 = u - c, lambda_2 = u + c.

    Defined off vacuum only (rho > 0); callers handle vacuum separately.
    """
    if i not in (1, 2):
        raise ValueError(f"field index must be 1 or 2, got {i}")
    rho = _check_rho(rho, allow_zero=False)
    c = sound_speed(rho, p)
    return u - c if i == 1 else u + c


def riemann_invariant(i: int, rho, u, p: GasParams):
    """Riemann invariant of field i, normalized so it equals u at vacuum.

    Sigma_1 = u + h(rho), Sigma_2 = u - h(rho), with
    h(rho) = (2 sqrt(gamma) / (gamma-1)) * rho**((gamma-1)/2) the integral
    of sqrt(p'(s))/s from 0 to rho.  Sigma_2 is the quantity held constant
    across a 2-rarefaction fan: its gradient annihilates the second right
    eigenvector r_2 = (1, sqrt(p'(rho))/rho).
    """
    if i not in (1, 2):
        raise ValueError(f"field index must be 1 or 2, got {i}")
    rho = _check_rho(rho)
    h = (2.0 * np.sqrt(p.gamma) / (p.gamma - 1.0)) * rho ** (0.5 * (p.gamma - 1.0))
    return u + h if i == 1 else u - h


def psi(rho, rhobar, p: GasParams):
    """Relative entropy density per unit mass,

        Psi(rho, rhobar) = int_rhobar^rho (p(s) - p(rhobar)) / s**2 ds
                         = [rho**g - rhobar**g - g rhobar**(g-1) (rho - rhobar)]
                           / ((g-1) rho).

    Convex in rho with Psi(rhobar, rhobar) = 0; diverges as rho -> 0
    (returns +inf there).  Most estimates use rho*Psi; see rho_psi.
    """
    rho = _check_rho(rho)
    rhobar = np.asarray(rhobar, dtype=float)
    if np.any(rhobar <= 0.0):
        raise ValueError("reference density must be > 0")
    num = rho_psi(rho, rhobar, p)
    with np.errstate(divide="ignore"):
        out = np.where(rho > 0.0, num / np.where(rho > 0.0, rho, 1.0), np.inf)
    return out if out.ndim else float(out)


def rho_psi(rho, rhobar, p: GasParams):
    """rho * Psi(rho, rhobar), finite on all of rho >= 0.

    Equals [rho**g - rhobar**g - g rhobar**(g-1) (rho - rhobar)] / (g-1);
    the vacuum limit rho_psi(0, rhobar) = rhobar**gamma comes out of the
    closed form directly.  Nonnegative, zero iff rho == rhobar.
    """
    rho = _check_rho(rho)
    rhobar = np.asarray(rhobar, dtype=float)
    if np.any(rhobar <= 0.0):
        raise ValueError("reference density must be > 0")
    g = p.gamma
    return (rho ** g - rhobar ** g - g * rhobar ** (g - 1.0) * (rho - rhobar)) / (g - 1.0)


def phi_eps(rho, p: GasParams):
    """Entropy potential whose spatial derivative is the effective-velocity
    correction: rho**(alpha-1)/(alpha-1) + eps * rho**(theta-1)/(theta-1),
    with the log branch replacing the first term exactly at alpha == 1.

    Singular at vacuum for alpha < 1 (and always through the eps term when
    eps > 0 since theta < 1); callers must guard rho > 0.
    """
    rho = _check_rho(rho, allow_zero=False)
    if p.alpha == 1.0:
        base = np.log(rho)
    else:
        base = rho ** (p.alpha - 1.0) / (p.alpha - 1.0)
    if p.eps > 0.0:
        base = base + p.eps * rho ** (p.theta - 1.0) / (p.theta - 1.0)
    return base


def phi_eps_drho(rho, p: GasParams):
    """d(phi_eps)/d(rho) = rho**(alpha-2) + eps * rho**(theta-2), so that
    (phi_eps(rho))_x = phi_eps_drho(rho) * rho_x by the chain rule."""
    rho = _check_rho(rho, allow_zero=False)
    out = rho ** (p.alpha - 2.0)
    if p.eps > 0.0:
        out = out + p.eps * rho ** (p.theta - 2.0)
    return out
