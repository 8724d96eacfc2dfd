/** Figure builders. Each returns a complete SVG string for one kind:
 *
 *   overlay  rho and rho_bar (and u, u_bar) vs x, one panel pair per time,
 *            annotated with the recorded sup gap, verbatim from the CSV
 *   decay    log-scale functional curves vs t, detected T0 marked
 *   vacuum   density floor and vacuum measure vs t
 *   blowup   sup |u_x| and its cumulative time integral vs t
 *   sweep    final-gap curves of every run in a sweep directory
 */

import { column, columnIndex } from "./csv.js";
import { RunDir, sweepRuns } from "./rundir.js";
import { Panel, assemble, extent, linearScale, logScale } from "./svg.js";

const W = 760;
const PANEL_H = 190;
const MARGIN = { left: 64, right: 16, top: 28, gap: 46, bottom: 44 };

export interface FigureSpec {
  runDir: string;
  times?: number[];
  supGapTolerance?: number;
}

function panelAt(i: number, sx: ReturnType<typeof linearScale>, sy: ReturnType<typeof linearScale>): Panel {
  const y0 = MARGIN.top + i * (PANEL_H + MARGIN.gap);
  return new Panel(MARGIN.left, y0, W - MARGIN.left - MARGIN.right, PANEL_H, sx, sy);
}

function figureHeight(nPanels: number): number {
  return MARGIN.top + nPanels * (PANEL_H + MARGIN.gap) + MARGIN.bottom - MARGIN.gap + 18;
}

export function plotOverlay(spec: FigureSpec): string {
  const run = new RunDir(spec.runDir);
  const times = spec.times ?? [run.snapshotTimes()[run.snapshotTimes().length - 1]];
  const supGapRaw = run.functionalRawByTime("sup_gap");
  const parts: string[] = [];
  times.forEach((t, i) => {
    const snap = run.snapshot(t);
    const file = snap.file;
    const x = column(snap.table, file, "x");
    const rho = column(snap.table, file, "rho");
    const rhoBar = column(snap.table, file, "rho_bar");
    const u = column(snap.table, file, "u");
    const uBar = column(snap.table, file, "u_bar");

    const sx = linearScale(extent(x), [MARGIN.left, W - MARGIN.right]);
    const [rLo, rHi] = extent(rho.concat(rhoBar));
    const pad = 0.05 * (rHi - rLo || 1);
    const pr = panelAt(2 * i, sx, linearScale([rLo - pad, rHi + pad],
      [MARGIN.top + 2 * i * (PANEL_H + MARGIN.gap) + PANEL_H, MARGIN.top + 2 * i * (PANEL_H + MARGIN.gap)]));
    pr.axes("x", "density", `t = ${snap.t}`);
    pr.path(x, rhoBar, "#888", 1.0, "5 3");
    pr.path(x, rho, "#b2182b");
    pr.legend([{ label: "rho", color: "#b2182b" }, { label: "rho_bar", color: "#888", dash: "5 3" }]);
    const raw = supGapRaw.get(snap.t);
    if (raw !== undefined) {
      pr.text(`sup gap = ${raw}`, MARGIN.left + 8, pr.y0 + 14, "#b2182b");
      if (spec.supGapTolerance !== undefined && Number(raw) > spec.supGapTolerance) {
        pr.text(`above tolerance ${spec.supGapTolerance}`, MARGIN.left + 8, pr.y0 + 28, "#7a0000");
      }
    }

    const [uLo, uHi] = extent(u.concat(uBar));
    const upad = 0.05 * (uHi - uLo || 1);
    const y0u = MARGIN.top + (2 * i + 1) * (PANEL_H + MARGIN.gap);
    const pu = panelAt(2 * i + 1, sx, linearScale([uLo - upad, uHi + upad], [y0u + PANEL_H, y0u]));
    pu.axes("x", "velocity");
    pu.path(x, uBar, "#888", 1.0, "5 3");
    pu.path(x, u, "#2166ac");
    pu.legend([{ label: "u", color: "#2166ac" }, { label: "u_bar", color: "#888", dash: "5 3" }]);
    parts.push(...pr.parts, ...pu.parts);
  });
  return assemble(W, figureHeight(2 * times.length), parts);
}

export function plotDecay(spec: FigureSpec): string {
  const run = new RunDir(spec.runDir);
  const table = run.functionals();
  const t = column(table, "functionals.csv", "t");
  const curves: { name: string; color: string }[] = [
    { name: "sup_gap", color: "#b2182b" },
    { name: "energy", color: "#2166ac" },
    { name: "bd_energy", color: "#1b7837" },
    { name: "m3", color: "#8b3a00" },
  ];
  const series = curves.map((c) => column(table, "functionals.csv", c.name));
  const all = series.flat();
  const sx = linearScale(extent(t), [MARGIN.left, W - MARGIN.right]);
  const sy = logScale(extent(all, true), [MARGIN.top + PANEL_H, MARGIN.top]);
  const p = new Panel(MARGIN.left, MARGIN.top, W - MARGIN.left - MARGIN.right, PANEL_H, sx, sy);
  p.axes("t", "functional (log)", "functional decay");
  curves.forEach((c, i) => p.path(t, series[i], c.color));
  p.legend(curves.map((c) => ({ label: c.name, color: c.color })));
  const summary = run.summary();
  const t0 = summary?.["T0"];
  if (typeof t0 === "number") p.vline(t0, "#555", `T0 = ${t0}`);
  return assemble(W, figureHeight(1), p.parts);
}

export function plotVacuum(spec: FigureSpec): string {
  const run = new RunDir(spec.runDir);
  const table = run.functionals();
  const t = column(table, "functionals.csv", "t");
  const minRho = column(table, "functionals.csv", "min_rho");
  const vac = column(table, "functionals.csv", "vac_measure");
  const sx = linearScale(extent(t), [MARGIN.left, W - MARGIN.right]);

  const p1 = new Panel(MARGIN.left, MARGIN.top, W - MARGIN.left - MARGIN.right, PANEL_H,
    sx, linearScale(extent(minRho.concat([0])), [MARGIN.top + PANEL_H, MARGIN.top]));
  p1.axes("t", "min density", "vacuum recovery");
  p1.path(t, minRho, "#2166ac");
  const summary = run.summary();
  const rho1 = summary?.["rho1"];
  if (typeof rho1 === "number") {
    p1.path([t[0], t[t.length - 1]], [rho1, rho1], "#b2182b", 1.0, "4 3");
    p1.text(`rho1 = ${rho1}`, MARGIN.left + 8, p1.y0 + 14, "#b2182b");
  }
  const t0 = summary?.["T0"];
  if (typeof t0 === "number") p1.vline(t0, "#555", `T0 = ${t0}`);

  const y0 = MARGIN.top + PANEL_H + MARGIN.gap;
  const p2 = new Panel(MARGIN.left, y0, W - MARGIN.left - MARGIN.right, PANEL_H,
    sx, linearScale(extent(vac.concat([0])), [y0 + PANEL_H, y0]));
  p2.axes("t", "vacuum measure");
  p2.path(t, vac, "#1b7837");
  return assemble(W, figureHeight(2), [...p1.parts, ...p2.parts]);
}

export function plotBlowup(spec: FigureSpec): string {
  const run = new RunDir(spec.runDir);
  const table = run.functionals();
  const t = column(table, "functionals.csv", "t");
  const uxs = column(table, "functionals.csv", "ux_sup");
  const cum = column(table, "functionals.csv", "blowup_cum");
  const sx = linearScale(extent(t), [MARGIN.left, W - MARGIN.right]);

  const p1 = new Panel(MARGIN.left, MARGIN.top, W - MARGIN.left - MARGIN.right, PANEL_H,
    sx, linearScale(extent(uxs.concat([0])), [MARGIN.top + PANEL_H, MARGIN.top]));
  p1.axes("t", "sup |u_x|", "velocity-gradient blow-up indicator");
  p1.path(t, uxs, "#b2182b");
  const summary = run.summary();
  const t1 = summary?.["T1"];
  if (typeof t1 === "number") p1.vline(t1, "#555", `T1 = ${t1}`);

  const y0 = MARGIN.top + PANEL_H + MARGIN.gap;
  const p2 = new Panel(MARGIN.left, y0, W - MARGIN.left - MARGIN.right, PANEL_H,
    sx, linearScale(extent(cum.concat([0])), [y0 + PANEL_H, y0]));
  p2.axes("t", "cumulative integral");
  p2.path(t, cum, "#2166ac");
  return assemble(W, figureHeight(2), [...p1.parts, ...p2.parts]);
}

const SWEEP_COLORS = ["#b2182b", "#2166ac", "#1b7837", "#8b3a00", "#6a51a3", "#636363"];

export function plotSweep(spec: FigureSpec): string {
  const runs = sweepRuns(spec.runDir);
  if (runs.length === 0) throw new Error(`${spec.runDir}: no run directories found`);
  const curves = runs.map(({ name, run }) => {
    const table = run.functionals();
    return {
      name,
      t: column(table, "functionals.csv", "t"),
      gap: column(table, "functionals.csv", "sup_gap"),
    };
  });
  const sx = linearScale(extent(curves.flatMap((c) => c.t)), [MARGIN.left, W - MARGIN.right]);
  const sy = logScale(extent(curves.flatMap((c) => c.gap), true), [MARGIN.top + PANEL_H, MARGIN.top]);
  const p = new Panel(MARGIN.left, MARGIN.top, W - MARGIN.left - MARGIN.right, PANEL_H, sx, sy);
  p.axes("t", "sup gap (log)", "sweep: wave gap per run");
  curves.forEach((c, i) => p.path(c.t, c.gap, SWEEP_COLORS[i % SWEEP_COLORS.length]));
  p.legend(curves.map((c, i) => ({ label: c.name, color: SWEEP_COLORS[i % SWEEP_COLORS.length] })));
  return assemble(W, figureHeight(1), p.parts);
}

export const FIGURES: Record<string, (spec: FigureSpec) => string> = {
  overlay: plotOverlay,
  decay: plotDecay,
  vacuum: plotVacuum,
  blowup: plotBlowup,
  sweep: plotSweep,
};
