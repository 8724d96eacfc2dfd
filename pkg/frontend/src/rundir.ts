/** Read-only access to a rarelab run directory (see FORMATS.md at the
 * repository root). Nothing here recomputes physics: every plotted number
 * originates in a documented CSV column or JSON field. */

import { existsSync, readdirSync, readFileSync } from "fs";
import { join } from "path";
import { Table, column, columnIndex, readCsv } from "./csv.js";

export const FUNCTIONAL_COLUMNS = [
  "t", "mass", "energy", "bd_energy", "diss_cum", "sup_gap", "l2_gap",
  "lp_gap", "min_rho", "max_rho", "vac_measure", "m3", "bd_grad",
  "lambda_l2", "ux_sup", "blowup_cum", "l2_ugap",
] as const;

export const STATE_COLUMNS = ["x", "rho", "m", "u", "rho_bar", "u_bar"] as const;

export interface Snapshot {
  t: number;
  file: string;
  table: Table;
}

export class RunDir {
  constructor(public readonly path: string) {
    if (!existsSync(join(path, "functionals.csv"))) {
      throw new Error(`${path} is not a run directory (missing functionals.csv)`);
    }
  }

  functionals(): Table {
    const file = join(this.path, "functionals.csv");
    const table = readCsv(file);
    for (const name of FUNCTIONAL_COLUMNS) columnIndex(table, file, name);
    return table;
  }

  functionalColumn(name: string): number[] {
    return column(this.functionals(), "functionals.csv", name);
  }

  /** Raw cell text of one functionals column, keyed by sample time. */
  functionalRawByTime(name: string): Map<number, string> {
    const table = this.functionals();
    const it = columnIndex(table, "functionals.csv", "t");
    const ic = columnIndex(table, "functionals.csv", name);
    const out = new Map<number, string>();
    table.rows.forEach((row, k) => out.set(row[it], table.raw[k][ic]));
    return out;
  }

  snapshotTimes(): number[] {
    return this.snapshotFiles().map((f) => stampToTime(f));
  }

  snapshotFiles(): string[] {
    return readdirSync(this.path)
      .filter((f) => f.startsWith("state_t") && f.endsWith(".csv"))
      .sort();
  }

  snapshot(t: number): Snapshot {
    const files = this.snapshotFiles();
    if (files.length === 0) throw new Error(`${this.path}: no state snapshots`);
    let best = files[0];
    for (const f of files) {
      if (Math.abs(stampToTime(f) - t) < Math.abs(stampToTime(best) - t)) best = f;
    }
    const file = join(this.path, best);
    const table = readCsv(file);
    for (const name of STATE_COLUMNS) columnIndex(table, file, name);
    return { t: stampToTime(best), file: best, table };
  }

  summary(): Record<string, unknown> | null {
    const path = join(this.path, "summary.json");
    if (!existsSync(path)) return null;
    return JSON.parse(readFileSync(path, "utf-8"));
  }
}

export function stampToTime(filename: string): number {
  return Number(filename.slice("state_t".length, -".csv".length));
}

/** Subdirectories of a sweep output that are themselves run directories. */
export function sweepRuns(path: string): { name: string; run: RunDir }[] {
  return readdirSync(path, { withFileTypes: true })
    .filter((e) => e.isDirectory())
    .map((e) => e.name)
    .sort()
    .filter((name) => existsSync(join(path, name, "functionals.csv")))
    .map((name) => ({ name, run: new RunDir(join(path, name)) }));
}
