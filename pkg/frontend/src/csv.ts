/** Minimal CSV access for the documented run-directory formats.
 *
 * Every file has one header row and numeric cells. The raw cell strings are
 * preserved alongside parsed values so annotations can reproduce a column
 * entry exactly as written by the solver.
 */

import { readFileSync } from "fs";

export interface Table {
  header: string[];
  /** parsed numeric rows */
  rows: number[][];
  /** untouched cell text, same shape as rows */
  raw: string[][];
}

export class MissingColumnError extends Error {
  constructor(public file: string, public column: string) {
    super(`${file}: missing required column '${column}'`);
  }
}

export function parseCsv(text: string): Table {
  const lines = text.split("\n").filter((ln) => ln.length > 0);
  if (lines.length === 0) throw new Error("empty CSV");
  const header = lines[0].split(",");
  const raw = lines.slice(1).map((ln) => ln.split(","));
  const rows = raw.map((cells) => cells.map(Number));
  return { header, rows, raw };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"));
}

/** Index of a column, erroring with the column name if absent. */
export function columnIndex(table: Table, file: string, name: string): number {
  const idx = table.header.indexOf(name);
  if (idx < 0) throw new MissingColumnError(file, name);
  return idx;
}

export function column(table: Table, file: string, name: string): number[] {
  const idx = columnIndex(table, file, name);
  return table.rows.map((r) => r[idx]);
}
