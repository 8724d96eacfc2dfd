#!/usr/bin/env node
/** plotkit <kind> --run <dir> [--times t1,t2,...] --out <img.svg>
 *
 * Renders one figure from a rarelab run directory (or sweep directory for
 * kind = sweep). Regenerating figures never mutates run directories, and
 * identical inputs produce byte-identical SVG output.
 */

import { writeFileSync } from "fs";
import { FIGURES, FigureSpec } from "./figures.js";

export interface CliArgs {
  kind: string;
  run: string;
  out: string;
  times?: number[];
  supGapTolerance?: number;
}

export function parseArgs(argv: string[]): CliArgs {
  const [kind, ...rest] = argv;
  if (!kind || kind.startsWith("--")) {
    throw new Error(`usage: plotkit <${Object.keys(FIGURES).join("|")}> --run <dir> [--times ...] --out <img>`);
  }
  if (!(kind in FIGURES)) {
    throw new Error(`unknown figure kind '${kind}' (expected one of ${Object.keys(FIGURES).join(", ")})`);
  }
  const opts = new Map<string, string>();
  for (let i = 0; i < rest.length; i += 1) {
    const arg = rest[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument '${arg}'`);
    const eq = arg.indexOf("=");
    if (eq >= 0) {
      opts.set(arg.slice(2, eq), arg.slice(eq + 1));
    } else {
      const val = rest[i + 1];
      if (val === undefined) throw new Error(`missing value for ${arg}`);
      opts.set(arg.slice(2), val);
      i += 1;
    }
  }
  const run = opts.get("run");
  const out = opts.get("out");
  if (!run) throw new Error("--run <dir> is required");
  if (!out) throw new Error("--out <img> is required");
  const args: CliArgs = { kind, run, out };
  const times = opts.get("times");
  if (times !== undefined) {
    args.times = times.split(",").map(Number);
    if (args.times.some((t) => !Number.isFinite(t))) {
      throw new Error(`--times must be a comma-separated number list, got '${times}'`);
    }
  }
  const tol = opts.get("sup-gap-tolerance");
  if (tol !== undefined) args.supGapTolerance = Number(tol);
  return args;
}

export function render(args: CliArgs): string {
  const spec: FigureSpec = {
    runDir: args.run,
    times: args.times,
    supGapTolerance: args.supGapTolerance,
  };
  return FIGURES[args.kind](spec);
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    writeFileSync(args.out, render(args));
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
