"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to stream the lines.  The
expensive simulations are shared session fixtures; every run stays at desk
scale (N <= 4000 cells, t_final <= 200, minutes at most).
"""

import numpy as np
import pytest
from scipy import integrate

from rarelab import diagnostics as diag
from rarelab.gas import GasParams, lambda_speed, psi, rho_psi, riemann_invariant
from rarelab.initdata import make_benchmark, regularize
from rarelab.rarefaction import WaveProfile, rate_report
from rarelab.solver import Grid1D, SchemeConfig, eps_compat, run

GAS = GasParams(gamma=2.0, alpha=1.0)


def report(num, ok, detail):
    print(f"CRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


@pytest.fixture(scope="session")
def bench_wave():
    return WaveProfile.from_left_state(GAS, 1.0, 0.0, 2.0, q=2.0, eta=0.1)


@pytest.fixture(scope="session")
def stability_run(bench_wave):
    grid = Grid1D(-720.0, 720.0, 2000)
    data = make_benchmark("stability", grid.centers, bench_wave, GAS)
    cfg = SchemeConfig(t_final=200.0, sample_dt=0.5)
    return run(data, grid, cfg, GAS, bench_wave)


@pytest.fixture(scope="session")
def stability_run_fine(bench_wave):
    grid = Grid1D(-720.0, 720.0, 4000)
    data = make_benchmark("stability", grid.centers, bench_wave, GAS)
    cfg = SchemeConfig(t_final=30.0, sample_dt=0.5)
    return run(data, grid, cfg, GAS, bench_wave)


@pytest.fixture(scope="session")
def smooth_wave():
    return WaveProfile.from_left_state(GAS, 1.0, 0.0, 2.0, q=2.0, eta=0.2)


def test_criterion_1_relative_entropy_oracle():
    """Closed form vs adaptive quadrature of the defining integral."""
    p = GAS
    rho_grid = np.linspace(0.05, 5.0, 100)
    rhobar_grid = np.linspace(0.1, 5.0, 100)
    worst = 0.0
    for rb in rhobar_grid:
        for r in rho_grid:
            oracle, _ = integrate.quad(
                lambda s: (s ** p.gamma - rb ** p.gamma) / s ** 2, rb, r,
                epsabs=1e-13, epsrel=1e-13)
            worst = max(worst, abs(psi(r, rb, p) - oracle))
    vac_exact = all(rho_psi(0.0, rb, p) == rb ** p.gamma for rb in (0.5, 1.0, 2.0, 4.4))
    ok = worst <= 1e-10 and vac_exact
    assert report(1, ok, f"max |closed form - quadrature| = {worst:.2e} on 100x100 grid; "
                         f"vacuum limit exact = {vac_exact}")


def test_criterion_2_wave_correctness(smooth_wave):
    wp = smooth_wave
    worst_sigma = 0.0
    worst_lambda = 0.0
    for t in (0.0, 1.0, 10.0, 100.0):
        x = np.linspace(-80.0, 80.0 + wp.w_plus * (1.0 + t), 500)
        rho, u = wp.state(t, x)
        worst_sigma = max(worst_sigma,
                          float(np.max(np.abs(riemann_invariant(2, rho, u, GAS) - wp.sigma2))))
        worst_lambda = max(worst_lambda,
                           float(np.max(np.abs(lambda_speed(2, rho, u, GAS)
                                               - wp.burgers_eval(1.0 + t, x)))))

    def euler_residual(h):
        t = 1.0
        xs = np.array([-3.0, 0.0, 2.0, 5.0])

        def fields(tt, xx):
            rho, u = wp.state(tt, xx)
            return np.asarray(rho), np.asarray(rho * u), np.asarray(
                rho * u * u + rho ** GAS.gamma)

        rp, mp, fp = fields(t, xs + h)
        rm, mm, fm = fields(t, xs - h)
        rtp, mtp, _ = fields(t + h, xs)
        rtm, mtm, _ = fields(t - h, xs)
        mass = (rtp - rtm) / (2 * h) + (mp - mm) / (2 * h)
        mom = (mtp - mtm) / (2 * h) + (fp - fm) / (2 * h)
        return float(np.max(np.abs(mass))), float(np.max(np.abs(mom)))

    m1, p1 = euler_residual(1e-2)
    m2, p2 = euler_residual(5e-3)
    ratios = (m1 / m2, p1 / p2)
    ok = worst_sigma <= 1e-10 and worst_lambda <= 1e-10 and \
        all(3.0 <= r <= 5.0 for r in ratios)
    assert report(2, ok, f"Sigma2 constancy {worst_sigma:.2e}; lambda2 round-trip "
                         f"{worst_lambda:.2e}; Euler residual ratios {ratios[0]:.2f}, "
                         f"{ratios[1]:.2f} (target 4 +- 1)")


@pytest.fixture(scope="session")
def rate_wave():
    # strong wide wave sits in the asymptotic decay regime over t in [10, 1e3]
    return WaveProfile.from_left_state(GAS, 1.0, 0.0, 4.0, q=2.0, eta=0.5)


def test_criterion_3_decay_slopes(rate_wave):
    t_grid = np.geomspace(10.0, 1000.0, 20)
    s_inf = rate_report(rate_wave, np.inf, t_grid)["slopes"]["u_x"]
    s_l2 = rate_report(rate_wave, 2.0, t_grid)["slopes"]["u_x"]
    ok = abs(s_inf + 1.0) <= 0.1 and abs(s_l2 + 0.5) <= 0.1
    assert report(3, ok, f"||u_x||_inf slope {s_inf:.3f} (target -1 +- 0.1); "
                         f"||u_x||_L2 slope {s_l2:.3f} (target -0.5 +- 0.1)")


@pytest.mark.xfail(strict=True, reason=(
    "The sup of the second derivative decays like t**(-1-1/(2q)) = t**(-5/4) "
    "at the optimal q = 2, so the cumulative integral grows between T = 1e2 "
    "and T = 1e3 by at least (101**-0.25 - 1001**-0.25)/(1 - 101**-0.25) "
    "~ 20% for every admissible wave; the 5% threshold is unattainable for "
    "this construction (see decisions ledger)."))
def test_criterion_3_cumulative_curvature_integral(rate_wave):
    t_grid = np.concatenate([[0.0], np.geomspace(0.01, 1000.0, 80)])
    rep = rate_report(rate_wave, np.inf, t_grid)
    cum = rep["cum_uxx_inf"]
    i100 = int(np.searchsorted(t_grid, 100.0))
    growth = (cum[-1] - cum[i100 - 1]) / cum[i100 - 1]
    report(3, growth <= 0.05,
           f"cumulative ||u_xx||_inf integral grows {growth:.1%} from T=1e2 to T=1e3 "
           f"(threshold 5%)")
    assert growth <= 0.05


class TestCriterion4SolverVerification:
    @staticmethod
    def _mms_error(n):
        grid = Grid1D(0.0, 2.0 * np.pi, n)

        def exact(t, x):
            rho = 2.0 + 0.5 * np.sin(x - t)
            return rho, rho.copy()

        def source(t, x):
            return np.zeros_like(x), (2.0 + 0.5 * np.sin(x - t)) * np.cos(x - t)

        def bc(t):
            xl = grid.x_left - (np.arange(2, 0, -1) - 0.5) * grid.dx
            xr = grid.x_right + (np.arange(1, 3) - 0.5) * grid.dx
            rl, ml = exact(t, xl)
            rr, mr = exact(t, xr)
            return rl, ml, rr, mr

        cfg = SchemeConfig(t_final=0.5, cfl=0.4, sample_dt=0.25)
        rho0, m0 = exact(0.0, grid.centers)
        wp = WaveProfile.constant(GAS, 2.0, 1.0)
        art = run((rho0, m0), grid, cfg, GAS, wp, bc=bc, source=source,
                  domain_check=False)
        rho_T, m_T = art.states[-1]
        re, me = exact(art.times[-1], grid.centers)
        return (np.sum(np.abs(rho_T - re)) + np.sum(np.abs(m_T - me))) * grid.dx

    def test_criterion_4(self, stability_run, smooth_wave):
        errs = np.array([self._mms_error(n) for n in (100, 200, 400)])
        orders = np.log2(errs[:-1] / errs[1:])

        # constant states are machine-precision fixed points
        grid = Grid1D(-10.0, 10.0, 64)
        wp_c = WaveProfile.constant(GAS, 1.0, 0.0)
        art_c = run((np.ones(64), np.zeros(64)), grid,
                    SchemeConfig(t_final=2.0, sample_dt=0.5), GAS, wp_c)
        drift = max(float(np.max(np.abs(art_c.states[-1][0] - 1.0))),
                    float(np.max(np.abs(art_c.states[-1][1]))))

        # mass balance on every shipped benchmark
        defects = {}
        defects["stability"] = abs(stability_run.summary["mass_balance_defect"]) \
            / stability_run.records[0].mass
        for name in ("pure_wave", "smooth_bump"):
            g = Grid1D(-110.0, 110.0, 300)
            d = make_benchmark(name, g.centers, smooth_wave, GAS)
            a = run(d, g, SchemeConfig(t_final=5.0, sample_dt=1.0), GAS, smooth_wave)
            defects[name] = abs(a.summary["mass_balance_defect"]) / a.records[0].mass
        ok = np.all(orders >= 1.0) and drift == 0.0 and \
            all(v <= 1e-12 for v in defects.values())
        assert report(4, ok, f"MMS L1 orders {np.round(orders, 2)} (measured, target 2, "
                             f"require >= 1); constant-state drift {drift:.1e}; relative "
                             f"mass-balance defects { {k: float(f'{v:.2e}') for k, v in defects.items()} }")


def test_criterion_5_stability_benchmark(stability_run, stability_run_fine):
    art = stability_run
    sup = [r.sup_gap for r in art.records]
    min_rho = [r.min_rho for r in art.records]
    rho1 = art.summary["rho1"]
    T0 = art.summary["T0"]
    ratio = sup[-1] / sup[0]
    stays = T0 is not None and all(
        v >= rho1 for v, t in zip(min_rho, art.times) if t >= T0)
    T0_fine = stability_run_fine.summary["T0"]
    shift = abs(T0_fine - T0) / T0 if T0 else np.inf
    ok = ratio <= 0.2 and stays and shift <= 0.2
    assert report(5, ok, f"sup gap ratio {ratio:.3f} (<= 0.2); T0 = {T0} with density "
                         f"above rho1 = {rho1} for the remainder = {stays}; T0 at dx/2 "
                         f"= {T0_fine} (shift {shift:.1%} <= 20%)")


def test_criterion_6_energy_entropy_budget(bench_wave):
    grid = Grid1D(-720.0, 720.0, 2000)
    data = make_benchmark("stability", grid.centers, bench_wave, GAS)
    lines = []
    ok = True
    for eps in (1e-4, 1e-5):
        p_eps = GasParams(gamma=2.0, alpha=1.0, theta=1.0 / 3.0, eps=eps)
        assert eps_compat(eps, 50.0)
        reg = regularize(data, eps, bench_wave, p_eps)
        art = run(reg, grid, SchemeConfig(t_final=50.0, sample_dt=0.5), p_eps,
                  bench_wave)
        bd = [r.bd_energy for r in art.records]
        lhs = max(bd) + art.records[-1].diss_cum
        rhs = bd[0] + art.records[0].energy + art.aux[-1]["src_cum"]
        finite = all(np.isfinite(getattr(r, f)) for r in art.records
                     for f in diag.RECORD_FIELDS)
        margin = rhs - lhs
        ok = ok and margin >= 0.0 and finite
        lines.append(f"eps={eps}: margin {margin:+.4f}, all finite = {finite}")
    assert report(6, ok, "; ".join(lines))


def test_criterion_7_third_moment_envelope(stability_run):
    m3 = np.array([r.m3 for r in stability_run.records])
    t = np.array(stability_run.times)
    env = m3 / (1.0 + np.log1p(t))
    bound = 3.0 * m3[0]
    ok = bool(env.max() <= bound)
    assert report(7, ok, f"max m3/(1+ln(1+t)) = {env.max():.3f} <= 3 x m3(0) = {bound:.3f}")


def test_criterion_8_weak_form_residuals(smooth_wave):
    res = []
    for n, sdt in ((100, 1.0), (200, 0.5), (400, 0.25)):
        grid = Grid1D(-110.0, 110.0, n)
        data = make_benchmark("smooth_bump", grid.centers, smooth_wave, GAS)
        art = run(data, grid, SchemeConfig(t_final=5.0, sample_dt=sdt), GAS,
                  smooth_wave)
        zeta = diag.SpaceTimeBump(0.0, 40.0, 2.5, 2.4)
        psi_tf = diag.SpaceTimeBump(0.0, 40.0, 0.0, 4.8)
        res.append(diag.weak_form_residual(art, zeta, psi_tf, 0.0, 5.0))
    r = np.array(res)
    order_mass = float(np.log2(r[0, 0] / r[2, 0]) / 2.0)
    order_mom = float(np.log2(r[0, 1] / r[2, 1]) / 2.0)

    wp_c = WaveProfile.constant(GAS, 1.0, 0.0)
    grid = Grid1D(-10.0, 10.0, 64)
    art_c = run((np.ones(64), np.zeros(64)), grid,
                SchemeConfig(t_final=2.0, sample_dt=0.25), GAS, wp_c)
    zeta_c = diag.SpaceTimeBump(0.0, 5.0, 1.0, 0.9)
    psi_c = diag.SpaceTimeBump(0.0, 5.0, 0.0, 1.8)
    const_res = diag.weak_form_residual(art_c, zeta_c, psi_c, 0.0, 2.0)
    ok = order_mass >= 1.0 and order_mom >= 1.0 and max(const_res) <= 1e-12
    assert report(8, ok, f"measured orders over two halvings: mass {order_mass:.2f}, "
                         f"momentum {order_mom:.2f} (require >= 1); constant-state "
                         f"residuals {const_res[0]:.1e}, {const_res[1]:.1e} <= 1e-12")


def test_criterion_9_particle_transport(smooth_wave):
    seeds = (-5.0, 5.0, 20.0)
    defects = []
    for n, sdt in ((300, 0.5), (600, 0.25)):
        grid = Grid1D(-110.0, 110.0, n)
        data = make_benchmark("smooth_bump", grid.centers, smooth_wave, GAS)
        art = run(data, grid,
                  SchemeConfig(t_final=8.0, sample_dt=sdt, limiter="none"), GAS,
                  smooth_wave)
        defects.append([diag.particle_path(art, s, 0.0, 8.0)["defect"] for s in seeds])
    base, fine = np.array(defects)
    ratios = fine / base
    ok = bool(np.all(base <= 0.05) and np.all((0.35 <= ratios) & (ratios <= 0.65)))
    assert report(9, ok, f"baseline defects {np.round(base, 4)} (<= 0.05); refinement "
                         f"ratios {np.round(ratios, 2)} (halving +- 30%: [0.35, 0.65])")


def test_criterion_10_blowup_trend(bench_wave):
    vals = []
    for n in (500, 1000, 2000):
        grid = Grid1D(-720.0, 720.0, n)
        data = make_benchmark("stability", grid.centers, bench_wave, GAS)
        art = run(data, grid, SchemeConfig(t_final=8.0, sample_dt=0.25), GAS,
                  bench_wave)
        integral, _, _ = diag.blowup_indicator(art, 0.0, 4.0)
        vals.append(integral)
    ok = vals[0] < vals[1] < vals[2]
    assert report(10, ok, f"windowed int ||u_x||_inf over the vacuum transition at "
                          f"dx in {{4h, 2h, h}}: {np.round(vals, 3)} monotone increasing = {ok}")
