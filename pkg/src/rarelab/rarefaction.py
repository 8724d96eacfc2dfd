"""Smoothed 2-rarefaction wave built from the exact characteristic solution
of a Burgers problem with algebraically decaying initial slope.

The wave (rho_bar, u_bar)(t, x) is defined by transporting the second
characteristic speed with Burgers dynamics, w_t + w w_x = 0, evaluated at
time 1 + t (the unit shift avoids the centered-fan singularity), and by
holding the second Riemann invariant at its common end-state value.  Both
defining relations are inverted in closed form, so the wave and all its
derivatives are available pointwise to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from . import gas
from .errors import ConfigError, NumericsError

__all__ = ["WaveProfile", "kq_constant", "rate_report"]

_X0_RTOL = 1e-13
_X0_MAXITER = 200


def kq_constant(q: float) -> float:
    """Normalization constant: 1 / integral_0^inf (1+y^2)^(-q) dy.

    Computed by adaptive quadrature after the substitution y = tan(s),
    which maps the half line to [0, pi/2) uniformly well for all q >= 2.
    """
    if q < 2.0:
        raise ConfigError(f"tail exponent q must be >= 2, got {q}")
    val, err = integrate.quad(lambda s: np.cos(s) ** (2.0 * q - 2.0), 0.0, 0.5 * np.pi,
                              epsabs=0.0, epsrel=1e-13)
    if err > 1e-12 * val:
        raise NumericsError(f"quadrature for K_q did not converge (q={q})")
    return 1.0 / val


def _tail_cdf(z, q):
    """K_q * integral_0^z (1+y^2)^(-q) dy, the odd sigmoid ramp in (-1, 1).

    Evaluated through the regularized incomplete beta function, which equals
    the normalized integral exactly; vectorized and fast enough to sit inside
    the characteristic root solve.
    """
    z = np.asarray(z, dtype=float)
    x = z * z / (1.0 + z * z)
    return np.sign(z) * special.betainc(0.5, q - 0.5, x)


@dataclass(frozen=True)
class WaveProfile:
    """Immutable smoothed 2-rarefaction wave.

    End states (rho_minus, u_minus) -> (rho_plus, u_plus) share the second
    Riemann invariant sigma2 and order the Burgers end speeds as
    0 <= w_minus < w_plus.  q >= 2 sets the algebraic decay of the initial
    slope, eta > 0 its width, and kq the ramp normalization.
    """

    gas: gas.GasParams
    rho_minus: float
    rho_plus: float
    u_minus: float
    u_plus: float
    q: float = 2.0
    eta: float = 0.1
    w_minus: float = field(init=False, default=0.0)
    w_plus: float = field(init=False, default=0.0)
    kq: float = field(init=False, default=0.0)
    sigma2: float = field(init=False, default=0.0)
    delta: float = field(init=False, default=0.0)
    degenerate: bool = field(init=False, default=False)

    def __post_init__(self):
        p = self.gas
        if p.gamma == 3.0:
            raise ConfigError("gamma = 3 is unsupported: the wave inversion degenerates")
        if self.rho_minus <= 0.0 or self.rho_plus <= 0.0:
            raise ConfigError("end densities must be positive (no far-field vacuum)")
        if self.eta <= 0.0:
            raise ConfigError(f"smoothing parameter eta must be > 0, got {self.eta}")
        s_m = gas.riemann_invariant(2, self.rho_minus, self.u_minus, p)
        s_p = gas.riemann_invariant(2, self.rho_plus, self.u_plus, p)
        if abs(s_p - s_m) > 1e-12 * max(1.0, abs(s_m)):
            raise ConfigError(
                f"end states are not invariant-compatible: Sigma2- = {s_m!r}, Sigma2+ = {s_p!r}")
        w_m = gas.lambda_speed(2, self.rho_minus, self.u_minus, p)
        w_p = gas.lambda_speed(2, self.rho_plus, self.u_plus, p)
        degenerate = self.rho_minus == self.rho_plus and self.u_minus == self.u_plus
        if not degenerate:
            if not w_m < w_p:
                raise ConfigError(
                    f"not a 2-rarefaction: need w- < w+, got {w_m} >= {w_p}")
            if w_m < 0.0:
                raise ConfigError(f"need 0 <= w-, got w- = {w_m}")
        object.__setattr__(self, "w_minus", float(w_m))
        object.__setattr__(self, "w_plus", float(w_p))
        object.__setattr__(self, "kq", kq_constant(self.q))
        object.__setattr__(self, "sigma2", float(s_m))
        object.__setattr__(self, "delta",
                           abs(self.rho_plus - self.rho_minus) + abs(self.u_plus - self.u_minus))
        object.__setattr__(self, "degenerate", degenerate)

    @classmethod
    def from_left_state(cls, gas_params, rho_minus, u_minus, rho_plus,
                        q=2.0, eta=0.1) -> "WaveProfile":
        """Derive u_plus from invariant compatibility with the left state:
        Sigma2(rho_plus, u_plus) = Sigma2(rho_minus, u_minus)."""
        s = gas.riemann_invariant(2, rho_minus, u_minus, gas_params)
        u_plus = s - gas.riemann_invariant(2, rho_plus, 0.0, gas_params)
        return cls(gas_params, rho_minus, rho_plus, u_minus, float(u_plus), q=q, eta=eta)

    @classmethod
    def constant(cls, gas_params, rho, u=0.0) -> "WaveProfile":
        """Degenerate single-state profile; evaluators return the constant
        state with zero derivatives.  Used as a trivial far field in tests
        and manufactured-solution runs."""
        return cls(gas_params, rho, rho, u, u)

    # -- Burgers layer ----------------------------------------------------

    def w0(self, x):
        """Initial Burgers speed: midpoint plus half-jump times the ramp."""
        if self.degenerate:
            return np.broadcast_to(self.w_minus, np.shape(x)).copy() if np.ndim(x) else self.w_minus
        mid = 0.5 * (self.w_plus + self.w_minus)
        half = 0.5 * (self.w_plus - self.w_minus)
        return mid + half * _tail_cdf(self.eta * np.asarray(x, dtype=float), self.q)

    def w0_prime(self, x):
        if self.degenerate:
            return np.zeros(np.shape(x)) if np.ndim(x) else 0.0
        y = self.eta * np.asarray(x, dtype=float)
        half = 0.5 * (self.w_plus - self.w_minus)
        return half * self.kq * self.eta * (1.0 + y * y) ** (-self.q)

    def w0_second(self, x):
        if self.degenerate:
            return np.zeros(np.shape(x)) if np.ndim(x) else 0.0
        y = self.eta * np.asarray(x, dtype=float)
        half = 0.5 * (self.w_plus - self.w_minus)
        return half * self.kq * self.eta ** 2 * (-2.0 * self.q) * y * (1.0 + y * y) ** (-self.q - 1.0)

    def x0_solve(self, t, x):
        """Foot point of the characteristic through (t, x): the unique root
        of F(x0) = x0 + w0(x0) t - x.

        F' = 1 + w0'(x0) t >= 1, so a bisection-safeguarded Newton iteration
        on the exact bracket [x - w_plus t, x - w_minus t] cannot fail; a
        failure to converge signals a bug, not bad data.
        """
        if t < 0.0:
            raise ConfigError(f"time must be >= 0, got {t}")
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if self.degenerate:
            out = x - self.w_minus * t
            return float(out[0]) if scalar else out

        lo = x - self.w_plus * t
        hi = x - self.w_minus * t
        x0 = x - self.w0(x) * t  # good initial guess: reuse the local speed
        np.clip(x0, lo, hi, out=x0)
        tol = _X0_RTOL * np.maximum(1.0, np.abs(x))
        width_mark = hi - lo
        for it in range(_X0_MAXITER):
            f = x0 + self.w0(x0) * t - x
            lo = np.where(f < 0.0, x0, lo)
            hi = np.where(f > 0.0, x0, hi)
            nxt = x0 - f / (1.0 + self.w0_prime(x0) * t)
            # bisect when Newton leaves the bracket, and also whenever the
            # bracket failed to halve since the last check (Newton can cycle
            # across the ramp without ever exiting the bracket)
            bad = (nxt <= lo) | (nxt >= hi)
            if it % 2 == 1:
                bad |= (hi - lo) > 0.5 * width_mark
            else:
                width_mark = hi - lo
            nxt = np.where(bad, 0.5 * (lo + hi), nxt)
            moved = np.abs(nxt - x0)
            x0 = nxt
            if np.all(moved <= tol):
                break
        else:
            raise NumericsError("characteristic foot-point iteration did not converge")
        return float(x0[0]) if scalar else x0

    def burgers_eval(self, t, x):
        """Burgers solution w(t, x) = w0(x0(t, x))."""
        return self.w0(self.x0_solve(t, x))

    def _burgers_derivatives(self, t, x):
        """(w, w_x, w_t, w_xx) at Burgers time t, all in closed form via the
        implicit-function theorem: dx0/dx = 1 / (1 + w0'(x0) t)."""
        x0 = self.x0_solve(t, x)
        w = self.w0(x0)
        g = self.w0_prime(x0)
        s = 1.0 / (1.0 + g * t)
        w_x = g * s
        w_t = -w * w_x
        w_xx = self.w0_second(x0) * s ** 3
        return w, w_x, w_t, w_xx

    # -- wave layer --------------------------------------------------------

    def _state_from_w(self, w):
        p = self.gas
        if self.degenerate:
            rho = np.broadcast_to(self.rho_minus, np.shape(w)).copy()
            u = np.broadcast_to(self.u_minus, np.shape(w)).copy()
            return (rho, u) if np.ndim(w) else (float(self.rho_minus), float(self.u_minus))
        c = (p.gamma - 1.0) * (w - self.sigma2) / (p.gamma + 1.0)
        if np.any(np.asarray(c) <= 0.0):
            raise NumericsError("characteristic speed fell below the invariant value; "
                                "end states are inconsistent")
        rho = (c * c / p.gamma) ** (1.0 / (p.gamma - 1.0))
        u = w - c
        return rho, u

    def state(self, t, x):
        """(rho_bar, u_bar) at (t, x): invert lambda_2 = w(1+t, x) together
        with the constant invariant in closed form."""
        w = self.burgers_eval(1.0 + t, x)
        return self._state_from_w(w)

    def derivatives(self, t, x):
        """(rho_bar_x, u_bar_x, rho_bar_xx, u_bar_xx, u_bar_t), analytic."""
        return self.state_and_derivatives(t, x)[2:]

    def state_and_derivatives(self, t, x):
        """(rho, u, rho_x, u_x, rho_xx, u_xx, u_t) from a single foot-point
        solve; the per-sample diagnostics loop lives on this."""
        p = self.gas
        if self.degenerate:
            shape = np.shape(x)
            z = np.zeros(shape) if shape else 0.0
            rho = np.full(shape, self.rho_minus) if shape else self.rho_minus
            u = np.full(shape, self.u_minus) if shape else self.u_minus
            return rho, u, z, z, z, z, z
        w, w_x, w_t, w_xx = self._burgers_derivatives(1.0 + t, x)
        rho, u = self._state_from_w(w)
        two_over = 2.0 / (p.gamma + 1.0)
        u_x = two_over * w_x
        u_t = two_over * w_t
        u_xx = two_over * w_xx
        m = 2.0 / (p.gamma - 1.0)
        dw = w - self.sigma2
        rho_x = m * rho * w_x / dw
        rho_xx = m * rho / dw * (w_xx + (m - 1.0) * w_x ** 2 / dw)
        return rho, u, rho_x, u_x, rho_xx, u_xx, u_t

    def time_derivative_rho(self, t, x):
        """rho_bar_t, used by manufactured-source checks."""
        if self.degenerate:
            return np.zeros(np.shape(x)) if np.ndim(x) else 0.0
        w, w_x, w_t, _ = self._burgers_derivatives(1.0 + t, x)
        m = 2.0 / (self.gas.gamma - 1.0)
        rho, _ = self._state_from_w(w)
        return m * rho * w_t / (w - self.sigma2)

    def fan_halfwidth_x0(self, tol=1e-8):
        """|x0| beyond which the initial speed is within tol of its limits."""
        if self.degenerate:
            return 0.0
        half = 0.5 * (self.w_plus - self.w_minus)
        # remaining ramp mass ~ kq * (eta z)^(1-2q) / (eta (2q-1))
        z = (tol / (half * self.kq / (2.0 * self.q - 1.0))) ** (1.0 / (1.0 - 2.0 * self.q))
        return max(z, 1.0) / self.eta

    def fan_envelope(self, t_final, tol=1e-8):
        """x-interval containing the fan (up to tol in w) for all t in
        [0, t_final]."""
        z = self.fan_halfwidth_x0(tol)
        return (-z + self.w_minus, z + self.w_plus * (1.0 + t_final))


def _norm_grid(wp: WaveProfile, n_core=4001, z_max=1e6, n_tail=400):
    """x0 sampling for fan norms: linear core across the ramp plus geometric
    tails out to z_max / eta on each side."""
    zc = 20.0 / wp.eta
    core = np.linspace(-zc, zc, n_core)
    tail = np.geomspace(zc, z_max / wp.eta, n_tail)[1:]
    return np.concatenate([-tail[::-1], core, tail])


def _lp_norm(values, x, p):
    values = np.abs(values)
    if np.isinf(p):
        return float(values.max())
    return float(np.trapezoid(values ** p, x) ** (1.0 / p))


def rate_report(wp: WaveProfile, p: float, t_grid, tail_rtol=1e-8):
    """Decay-rate table for the wave's first and second derivatives.

    For each t the four L^p norms are computed by composite quadrature on a
    grid transported along characteristics (wide enough to contain the fan
    plus decay tails; the outermost contribution is checked against
    tail_rtol).  Returns a dict with the raw table, least-squares log-log
    slopes against (1+t), and the cumulative integral of ||u_bar_xx||_inf.
    """
    if not p >= 1.0:
        raise ConfigError(f"norm exponent must satisfy p >= 1, got {p}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or np.any(np.diff(t_grid) <= 0.0):
        raise ConfigError("t_grid must be strictly increasing")
    x0 = _norm_grid(wp)
    rows = []
    uxx_sup = []
    for t in t_grid:
        tau = 1.0 + t
        x = x0 + wp.w0(x0) * tau
        rho_x, u_x, rho_xx, u_xx, _ = wp.derivatives(t, x)
        # tail-mass sanity: the outer 5% of points must not matter
        k = int(0.05 * x.size)
        body = _lp_norm(u_x[k:-k], x[k:-k], p)
        total = _lp_norm(u_x, x, p)
        if total > 0.0 and abs(total - body) > tail_rtol * total:
            raise ConfigError("norm domain too narrow: tail mass above tolerance")
        rows.append((t,
                     _lp_norm(rho_x, x, p), total,
                     _lp_norm(rho_xx, x, p), _lp_norm(u_xx, x, p)))
        uxx_sup.append(float(np.abs(u_xx).max()))
    table = np.asarray(rows)
    logt = np.log1p(t_grid)
    slopes = {}
    for j, name in ((1, "rho_x"), (2, "u_x"), (3, "rho_xx"), (4, "u_xx")):
        col = table[:, j]
        if np.all(col > 0.0):
            slopes[name] = float(np.polyfit(logt, np.log(col), 1)[0])
        else:
            slopes[name] = float("nan")
    cum_uxx_inf = integrate.cumulative_trapezoid(uxx_sup, t_grid, initial=0.0)
    return {
        "p": p,
        "t": t_grid,
        "table": table,
        "slopes": slopes,
        "uxx_sup": np.asarray(uxx_sup),
        "cum_uxx_inf": cum_uxx_inf,
    }
