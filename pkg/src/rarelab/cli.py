"""Command-line front end: wave tables, simulation runs, post-hoc
diagnostics, and parameter sweeps over TOML configurations.

Exit codes: 0 success, 1 configuration error, 2 numeric failure, 3 I/O
failure.  Flags override file values; `--override section.key=value` takes
highest precedence.  Identical configurations produce byte-identical CSV
outputs (no seeds, no timestamps inside data files).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import copy
import itertools
import json
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from . import diagnostics as diag
from . import initdata, runio
from .errors import ConfigError, NumericsError
from .gas import GasParams
from .rarefaction import WaveProfile, rate_report
from .solver import Grid1D, SchemeConfig, run
from .initdata import regularize as regularize_data

__all__ = ["main", "load_config", "build_experiment", "config_echo", "DEFAULTS"]

DEFAULTS = {
    "gas": {"gamma": 2.0, "alpha": 1.0, "theta": 1.0 / 3.0, "eps": 0.0},
    "wave": {"rho_minus": 1.0, "rho_plus": 2.0, "u_minus": 0.0, "q": 2.0, "eta": 0.1},
    "grid": {"x_left": -720.0, "x_right": 720.0, "n": 2000},
    "scheme": {"t_final": 200.0, "cfl": 0.45, "viscous_mode": "semi-implicit",
               "limiter": "minmod", "sample_dt": 0.5},
    "init": {"benchmark": "stability"},
    "diag": {"lp_exponent": 4.0, "dwell": 5, "vac_tol": 1e-3},
    "output": {"dir": "runs/out", "snapshot_every": 4, "times": [0.0]},
}


def _deep_update(base, extra):
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], val)
        else:
            base[key] = val
    return base


def _parse_override(text):
    if "=" not in text:
        raise ConfigError(f"override must look like section.key=value, got {text!r}")
    path, raw = text.split("=", 1)
    keys = path.strip().split(".")
    if len(keys) < 2:
        raise ConfigError(f"override key must be dotted (section.key), got {path!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = {}
    leaf = node
    for k in keys[:-1]:
        leaf[k] = {}
        leaf = leaf[k]
    leaf[keys[-1]] = value
    return node


def load_config(path=None, overrides=()):
    """Defaults <- TOML file <- --override flags, deep-merged."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path, "rb") as fh:
                file_cfg = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"bad TOML in {path}: {exc}") from exc
        _deep_update(cfg, file_cfg)
    for text in overrides:
        _deep_update(cfg, _parse_override(text))
    return cfg


def build_experiment(cfg):
    """Construct validated objects from a config dict."""
    p = GasParams(**cfg["gas"])
    wcfg = cfg["wave"]
    if wcfg.get("degenerate"):
        wp = WaveProfile.constant(p, wcfg["rho_minus"], wcfg.get("u_minus", 0.0))
    elif "u_plus" in wcfg:
        wp = WaveProfile(p, wcfg["rho_minus"], wcfg["rho_plus"], wcfg["u_minus"],
                         wcfg["u_plus"], q=wcfg["q"], eta=wcfg["eta"])
    else:
        wp = WaveProfile.from_left_state(p, wcfg["rho_minus"], wcfg["u_minus"],
                                         wcfg["rho_plus"], q=wcfg["q"], eta=wcfg["eta"])
    grid = Grid1D(**cfg["grid"])
    scheme = SchemeConfig(**cfg["scheme"])
    dcfg_kw = dict(cfg["diag"])
    if "u_floor" not in dcfg_kw:
        dcfg_kw["u_floor"] = scheme.u_floor if scheme.u_floor is not None \
            else 1e-10 * wp.rho_plus
    dcfg = diag.DiagConfig(**dcfg_kw)
    return p, wp, grid, scheme, dcfg


def build_initial(cfg, grid, wp, p):
    icfg = cfg["init"]
    if "rho_csv" in icfg:
        data = initdata.load_initial_csv(icfg["rho_csv"], icfg["m_csv"])
        if data.x.size != grid.n or abs(data.x[0] - grid.centers[0]) > 1e-9:
            raise ConfigError("CSV initial data grid does not match the config grid")
    else:
        kwargs = {k: v for k, v in icfg.items() if k not in ("benchmark", "regularize")}
        data = initdata.make_benchmark(icfg.get("benchmark", "stability"),
                                       grid.centers, wp, p, **kwargs)
    do_reg = icfg.get("regularize", p.eps > 0.0)
    if do_reg:
        if p.eps <= 0.0:
            raise ConfigError("regularize requested but gas.eps is zero")
        return regularize_data(data, p.eps, wp, p)
    return data


def config_echo(cfg, wp, dcfg=None):
    echo = copy.deepcopy(cfg)
    echo["wave"] = {"rho_minus": wp.rho_minus, "rho_plus": wp.rho_plus,
                    "u_minus": wp.u_minus, "u_plus": wp.u_plus,
                    "q": wp.q, "eta": wp.eta, "degenerate": wp.degenerate}
    echo["wave_derived"] = {"w_minus": wp.w_minus, "w_plus": wp.w_plus,
                            "kq": wp.kq, "sigma2": wp.sigma2, "delta": wp.delta}
    if dcfg is not None:
        echo["diag"] = dataclasses.asdict(dcfg)
    if echo.get("scheme", {}).get("u_floor") is None:
        echo.get("scheme", {}).pop("u_floor", None)
    echo["version"] = __version__
    echo["deterministic"] = True
    return echo


def _out_dir(cfg, args):
    return Path(args.out if args.out is not None else cfg["output"]["dir"])


def cmd_wave(cfg, args):
    p, wp, grid, scheme, dcfg = build_experiment(cfg)
    out = _out_dir(cfg, args)
    out.mkdir(parents=True, exist_ok=True)
    x = grid.centers
    for t in cfg["output"].get("times", [0.0]):
        rho, u, rho_x, u_x, _, _, _ = wp.state_and_derivatives(float(t), x)
        runio.write_csv(out / f"wave_t{t:012.6f}.csv",
                        ["x", "rho_bar", "u_bar", "rho_bar_x", "u_bar_x"],
                        zip(x, np.broadcast_to(rho, x.shape), np.broadcast_to(u, x.shape),
                            np.broadcast_to(rho_x, x.shape), np.broadcast_to(u_x, x.shape)))
    t_grid = np.geomspace(cfg["output"].get("rate_t_min", 10.0),
                          cfg["output"].get("rate_t_max", 1000.0),
                          int(cfg["output"].get("rate_points", 25)))
    rep_inf = rate_report(wp, np.inf, t_grid)
    rep_2 = rate_report(wp, 2.0, t_grid)
    rows = np.column_stack([rep_inf["table"], rep_inf["cum_uxx_inf"], rep_2["table"][:, 1:]])
    runio.write_csv(out / "rates.csv",
                    ["t", "rho_x_linf", "u_x_linf", "rho_xx_linf", "u_xx_linf",
                     "cum_uxx_linf", "rho_x_l2", "u_x_l2", "rho_xx_l2", "u_xx_l2"],
                    rows)
    summary = {"kq": wp.kq, "w_minus": wp.w_minus, "w_plus": wp.w_plus,
               "sigma2": wp.sigma2, "delta": wp.delta,
               "slopes_linf": rep_inf["slopes"], "slopes_l2": rep_2["slopes"]}
    with (out / "wave_summary.json").open("w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wave tables written to {out}")
    return 0


def cmd_run(cfg, args):
    p, wp, grid, scheme, dcfg = build_experiment(cfg)
    init = build_initial(cfg, grid, wp, p)
    out = _out_dir(cfg, args)
    out.mkdir(parents=True, exist_ok=True)
    echo = config_echo(cfg, wp, dcfg)
    try:
        art = run(init, grid, scheme, p, wp, dcfg=dcfg,
                  allow_eps_violation=args.allow_eps_violation)
    except NumericsError as exc:
        state = getattr(exc, "state", None)
        (out / "FAILED").write_text(str(exc) + "\n")
        with (out / "config.json").open("w", encoding="utf-8") as fh:
            json.dump(echo, fh, indent=2, sort_keys=True)
        if state is not None:
            runio.write_csv(out / "failed_state.csv", ["x", "rho", "m"],
                            zip(grid.centers, state.rho, state.m))
        raise
    runio.save_run(art, out, config_echo=echo,
                   snapshot_every=int(cfg["output"].get("snapshot_every", 1)))
    print(f"run complete: t_final={art.summary['t_final']}, "
          f"T0={art.summary['T0']}, sup_gap={art.records[-1].sup_gap:.4g} -> {out}")
    return 0


def cmd_diag(cfg, args):
    run_dir = Path(args.run_dir)
    art = runio.load_run(run_dir)
    out = _out_dir(cfg, args) if args.out is not None else run_dir
    out.mkdir(parents=True, exist_ok=True)
    times = np.asarray(art.times)
    t0, t1 = float(times[0]), float(times[-1])
    span = t1 - t0
    if span <= 0.0 or len(times) < 3:
        raise ConfigError(f"run directory {run_dir} lacks enough snapshots for diagnostics")

    x_lo, x_hi = art.grid.x_left, art.grid.x_right
    width = (x_hi - x_lo) * 0.2
    center = 0.5 * (x_lo + x_hi)
    zeta = diag.SpaceTimeBump(center, width, 0.5 * (t0 + t1), 0.45 * span)
    psi = diag.SpaceTimeBump(center, width, t0, 0.9 * span)
    mass_res, mom_res = diag.weak_form_residual(art, zeta, psi, t0, t1)
    runio.write_csv(out / "weakform.csv",
                    ["t1", "t2", "mass_residual", "momentum_residual"],
                    [[t0, t1, mass_res, mom_res]])

    seeds = [float(s) for s in args.seeds.split(",")] if args.seeds \
        else [center - width, center, center + width]
    rows = []
    defects = {}
    for k, seed in enumerate(seeds):
        path = diag.particle_path(art, seed, t0, t1)
        defects[str(seed)] = {"defect": path["defect"], "truncated": path["truncated"]}
        rows.extend([k, seed, tt, xx] for tt, xx in zip(path["t"], path["x"]))
    runio.write_csv(out / "paths.csv", ["seed_index", "seed", "t", "x"], rows)

    window = args.window if args.window is not None else max(span / 10.0, 2.0 * (times[1] - times[0]))
    t_start = args.t_start
    if t_start is None:
        t_start = art.summary.get("T1") or t0
    t_start = min(max(t_start, t0), t1 - window)
    integral, rec_t, cum = diag.blowup_indicator(art, t_start, window)
    runio.write_csv(out / "blowup.csv", ["t", "blowup_cum"], zip(rec_t, cum))
    summary = {"weakform": {"t1": t0, "t2": t1, "mass_residual": mass_res,
                            "momentum_residual": mom_res},
               "paths": defects,
               "blowup_window": {"t_start": t_start, "window": window,
                                 "integral": integral}}
    with (out / "diag_summary.json").open("w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"diagnostics written to {out}")
    return 0


_SWEEPABLE = {"eps": ("gas", "eps"), "alpha": ("gas", "alpha"), "n": ("grid", "n"),
              "eta": ("wave", "eta"), "t_final": ("scheme", "t_final")}


def _sweep_worker(task):
    name, cfg, out_dir, allow_eps = task
    ns = argparse.Namespace(out=str(out_dir), allow_eps_violation=allow_eps)
    try:
        cmd_run(cfg, ns)
        art = runio.load_run(out_dir)
        rec = art.records[-1]
        return {"name": name, "status": "ok", "T0": art.summary.get("T0"),
                "sup_gap_final": rec.sup_gap,
                "bd_energy_initial": art.records[0].bd_energy,
                "margin": diag_balance_margin(art)}
    except Exception as exc:  # failures recorded, sweep continues
        return {"name": name, "status": "failed", "error": str(exc)}


def diag_balance_margin(art) -> float:
    """Energy/entropy budget slack, preferring the value the run recorded
    (reloaded artifacts carry no aux series)."""
    margin = art.summary.get("budget_margin")
    if margin is not None:
        return margin
    bd = [r.bd_energy for r in art.records]
    lhs = max(bd) + art.records[-1].diss_cum
    src_cum = art.aux[-1]["src_cum"] if art.aux else 0.0
    rhs = bd[0] + art.records[0].energy + src_cum
    return rhs - lhs


def cmd_sweep(cfg, args):
    sweep = cfg.get("sweep", {})
    axes = {k: v for k, v in sweep.items() if k in _SWEEPABLE and isinstance(v, list)}
    if not axes:
        raise ConfigError("[sweep] must list at least one of "
                          + ", ".join(sorted(_SWEEPABLE)))
    out = _out_dir(cfg, args)
    out.mkdir(parents=True, exist_ok=True)
    names = sorted(axes)
    tasks = []
    for combo in itertools.product(*(axes[k] for k in names)):
        sub = copy.deepcopy(cfg)
        sub.pop("sweep", None)
        label = "_".join(f"{k}{v:g}" if isinstance(v, float) else f"{k}{v}"
                         for k, v in zip(names, combo))
        for k, v in zip(names, combo):
            sec, key = _SWEEPABLE[k]
            sub[sec][key] = v
        tasks.append((label, sub, out / label, args.allow_eps_violation))
    workers = int(sweep.get("workers", 0)) or None
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_sweep_worker, tasks))
    results.sort(key=lambda r: r["name"])
    rows = []
    for r in results:
        rows.append([r["name"], r["status"],
                     "" if r.get("T0") is None else r.get("T0", ""),
                     r.get("sup_gap_final", ""), r.get("bd_energy_initial", ""),
                     r.get("margin", "")])
    with (out / "sweep_summary.csv").open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("name,status,T0,sup_gap_final,bd_energy_initial,margin\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")
    failed = [r for r in results if r["status"] != "ok"]
    print(f"sweep of {len(results)} runs complete, {len(failed)} failed -> {out}")
    return 2 if failed else 0


def make_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="TOML config file")
    common.add_argument("--out", type=str, default=None, help="output directory")
    common.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE", help="dotted config override")
    common.add_argument("--allow-eps-violation", action="store_true",
                        help="run even if sqrt(eps) ln(1+T) > eps**(1/4)")
    parser = argparse.ArgumentParser(prog="rarelab", parents=[common],
                                     description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("wave", parents=[common], help="emit wave profile and rate tables")
    sub.add_parser("run", parents=[common], help="time-integrate and record functionals")
    p_diag = sub.add_parser("diag", parents=[common],
                            help="post-hoc diagnostics on a run directory")
    p_diag.add_argument("run_dir", type=str)
    p_diag.add_argument("--seeds", type=str, default=None,
                        help="comma-separated particle-path seeds")
    p_diag.add_argument("--window", type=float, default=None)
    p_diag.add_argument("--t-start", dest="t_start", type=float, default=None)
    sub.add_parser("sweep", parents=[common], help="Cartesian parameter sweep")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.override)
        handler = {"wave": cmd_wave, "run": cmd_run,
                   "diag": cmd_diag, "sweep": cmd_sweep}[args.command]
        return handler(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericsError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
