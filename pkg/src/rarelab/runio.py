"""Run-directory persistence: CSV snapshots, functional series, config echo
and summaries, plus reload for post-hoc analysis.

All quantitative output is CSV with a header row and a fixed column order
(documented in FORMATS.md); floats are written with shortest round-trip
formatting so identical configurations reproduce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .errors import ConfigError
from .gas import GasParams
from .rarefaction import WaveProfile
from .solver import Grid1D, RunArtifact, SchemeConfig

__all__ = ["write_csv", "save_run", "load_run", "STATE_COLUMNS", "AUX_COLUMNS"]

STATE_COLUMNS = ["x", "rho", "m", "u", "rho_bar", "u_bar"]
AUX_COLUMNS = ["t", "diss_rate", "diss_t1", "diss_t2", "diss_t3", "diss_t4",
               "diss_t5", "src", "src_cum", "m3_weighted", "bd_excluded"]


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _stamp(t: float) -> str:
    return f"{t:012.6f}"


def state_filename(t: float) -> str:
    return f"state_t{_stamp(t)}.csv"


def save_run(artifact: RunArtifact, out_dir, config_echo=None, snapshot_every=1):
    """Persist a run: functionals.csv, aux.csv, summary.json, config echo,
    and state snapshots every `snapshot_every`-th sample (first and last
    always included)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = [[getattr(r, name) for name in diag.RECORD_FIELDS] for r in artifact.records]
    write_csv(out / "functionals.csv", diag.RECORD_FIELDS, rows)

    aux_rows = []
    for t, a in zip(artifact.times, artifact.aux):
        d = a["diss_terms"]
        aux_rows.append([t, d["total"], d["t1"], d["t2"], d["t3"], d["t4"], d["t5"],
                         a["src"], a["src_cum"], a["m3_weighted"], a["bd_excluded"]])
    write_csv(out / "aux.csv", AUX_COLUMNS, aux_rows)

    x = artifact.grid.centers
    n_samples = len(artifact.times)
    for i, (t, (rho, m)) in enumerate(zip(artifact.times, artifact.states)):
        if i % snapshot_every and i != n_samples - 1:
            continue
        rho_bar, u_bar = artifact.wave.state(t, x)
        u, _, _ = diag.velocity_fields(rho, m, np.broadcast_to(u_bar, x.shape),
                                       artifact.diag_config.u_floor)
        write_csv(out / state_filename(t), STATE_COLUMNS,
                  zip(x, rho, m, u, np.broadcast_to(rho_bar, x.shape),
                      np.broadcast_to(u_bar, x.shape)))

    with (out / "summary.json").open("w", encoding="utf-8") as fh:
        json.dump(artifact.summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if config_echo is not None:
        with (out / "config.json").open("w", encoding="utf-8") as fh:
            json.dump(config_echo, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return out


def read_csv(path):
    """(header, float ndarray) for one of our CSV files."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def load_run(run_dir) -> RunArtifact:
    """Rebuild an artifact (states restricted to the saved snapshots) from a
    run directory written by save_run."""
    run_dir = Path(run_dir)
    cfg_path = run_dir / "config.json"
    if not cfg_path.exists():
        raise ConfigError(f"{run_dir} is not a run directory (missing config.json)")
    echo = json.loads(cfg_path.read_text())

    p = GasParams(**echo["gas"])
    wave_echo = dict(echo["wave"])
    if wave_echo.get("degenerate"):
        wp = WaveProfile.constant(p, wave_echo["rho_minus"], wave_echo["u_minus"])
    else:
        wp = WaveProfile(p, wave_echo["rho_minus"], wave_echo["rho_plus"],
                         wave_echo["u_minus"], wave_echo["u_plus"],
                         q=wave_echo["q"], eta=wave_echo["eta"])
    grid = Grid1D(**echo["grid"])
    scheme = SchemeConfig(**echo["scheme"])
    dcfg = diag.DiagConfig(**echo["diag"])

    art = RunArtifact(gas=p, wave=wp, grid=grid, scheme=scheme, diag_config=dcfg)

    header, table = read_csv(run_dir / "functionals.csv")
    if header != diag.RECORD_FIELDS:
        raise ConfigError(f"functionals.csv columns {header} do not match the "
                          f"documented order {diag.RECORD_FIELDS}")
    art.records = [diag.FunctionalRecord(*row) for row in table]

    snaps = sorted(run_dir.glob("state_t*.csv"))
    if not snaps:
        raise ConfigError(f"no state snapshots in {run_dir}")
    for path in snaps:
        header, data = read_csv(path)
        if header != STATE_COLUMNS:
            raise ConfigError(f"{path.name} columns {header} do not match {STATE_COLUMNS}")
        t = float(path.name[len("state_t"):-len(".csv")])
        art.times.append(t)
        art.states.append((data[:, 1].copy(), data[:, 2].copy()))

    summary = run_dir / "summary.json"
    if summary.exists():
        art.summary = json.loads(summary.read_text())
    return art
