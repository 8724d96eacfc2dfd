import { mkdirSync, mkdtempSync, readFileSync, statSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { MissingColumnError, parseCsv } from "../src/csv.js";
import { FUNCTIONAL_COLUMNS, RunDir, stampToTime } from "../src/rundir.js";
import { plotBlowup, plotDecay, plotOverlay, plotSweep, plotVacuum } from "../src/figures.js";
import { main, parseArgs, render } from "../src/cli.js";

const FIXTURE = join(import.meta.dirname, "fixtures", "run_small");

describe("csv", () => {
  it("parses header and keeps raw cells", () => {
    const t = parseCsv("a,b\n1.5,2e-3\n-0.25,0.1\n");
    expect(t.header).toEqual(["a", "b"]);
    expect(t.rows[0]).toEqual([1.5, 2e-3]);
    expect(t.raw[1][0]).toBe("-0.25");
  });

  it("stamp round trip", () => {
    expect(stampToTime("state_t00012.500000.csv")).toBe(12.5);
  });
});

describe("run directory", () => {
  it("validates the documented functional columns", () => {
    const run = new RunDir(FIXTURE);
    expect(run.functionals().header).toEqual([...FUNCTIONAL_COLUMNS]);
  });

  it("rejects a directory without functionals.csv", () => {
    expect(() => new RunDir(tmpdir())).toThrow(/not a run directory/);
  });

  it("names the missing column", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
    writeFileSync(join(dir, "functionals.csv"), "t,mass\n0.0,1.0\n");
    expect(() => new RunDir(dir).functionals()).toThrow(MissingColumnError);
    expect(() => new RunDir(dir).functionals()).toThrow(/energy/);
  });
});

describe("figures from a real run directory", () => {
  it("renders every kind without error and non-empty", () => {
    for (const svg of [
      plotOverlay({ runDir: FIXTURE, times: [0.0, 2.0, 5.0] }),
      plotDecay({ runDir: FIXTURE }),
      plotVacuum({ runDir: FIXTURE }),
      plotBlowup({ runDir: FIXTURE }),
    ]) {
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg.length).toBeGreaterThan(2000);
      expect(svg).toContain("</svg>");
    }
  });

  it("overlay annotation reproduces the recorded sup gap verbatim", () => {
    const run = new RunDir(FIXTURE);
    const table = run.functionals();
    const it_ = table.header.indexOf("t");
    const ig = table.header.indexOf("sup_gap");
    const row = table.rows.findIndex((r) => r[it_] === 5.0);
    const rawGap = table.raw[row][ig];
    const svg = plotOverlay({ runDir: FIXTURE, times: [5.0] });
    expect(svg).toContain(`sup gap = ${rawGap}`);
  });

  it("decay marks the detected recovery time", () => {
    const summary = JSON.parse(readFileSync(join(FIXTURE, "summary.json"), "utf-8"));
    const svg = plotDecay({ runDir: FIXTURE });
    expect(svg).toContain(`T0 = ${summary.T0}`);
  });

  it("is deterministic", () => {
    const a = plotDecay({ runDir: FIXTURE });
    const b = plotDecay({ runDir: FIXTURE });
    expect(a).toBe(b);
  });

  it("handles a single-sample series without crashing", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
    const header = [...FUNCTIONAL_COLUMNS].join(",");
    const row = FUNCTIONAL_COLUMNS.map((_, i) => (i === 0 ? "0.0" : "1.0")).join(",");
    writeFileSync(join(dir, "functionals.csv"), `${header}\n${row}\n`);
    const svg = plotDecay({ runDir: dir });
    expect(svg).toContain("<circle");
  });
});

describe("sweep figure", () => {
  it("one curve per run with legend", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotkit-sweep-"));
    const header = [...FUNCTIONAL_COLUMNS].join(",");
    for (const name of ["eps0.001", "eps0.0001"]) {
      const sub = join(dir, name);
      mkdirSync(sub);
      const rows = [0, 1, 2].map((k) =>
        FUNCTIONAL_COLUMNS.map((c, i) => (i === 0 ? `${k}.0` : `${(k + 1) * 0.1}`)).join(","));
      writeFileSync(join(sub, "functionals.csv"), `${header}\n${rows.join("\n")}\n`);
    }
    const svg = plotSweep({ runDir: dir });
    expect(svg).toContain("eps0.001");
    expect(svg).toContain("eps0.0001");
    const polylines = svg.match(/<polyline/g) ?? [];
    expect(polylines.length).toBeGreaterThanOrEqual(2);
  });
});

describe("cli", () => {
  it("parses flags in both forms", () => {
    const args = parseArgs(["overlay", "--run", "r", "--out=o.svg", "--times", "0,2.5"]);
    expect(args).toEqual({ kind: "overlay", run: "r", out: "o.svg", times: [0, 2.5] });
  });

  it("rejects unknown kinds and missing flags", () => {
    expect(() => parseArgs(["spiral", "--run", "r", "--out", "o"])).toThrow(/unknown figure kind/);
    expect(() => parseArgs(["decay", "--out", "o"])).toThrow(/--run/);
    expect(() => parseArgs(["decay", "--run", "r"])).toThrow(/--out/);
  });

  it("writes the file and returns 0; returns 1 on bad input", () => {
    const out = join(mkdtempSync(join(tmpdir(), "plotkit-")), "fig.svg");
    expect(main(["vacuum", "--run", FIXTURE, "--out", out])).toBe(0);
    expect(statSync(out).size).toBeGreaterThan(1000);
    expect(main(["vacuum", "--run", "/nonexistent", "--out", out])).toBe(1);
  });

  it("render matches the figure builders byte for byte", () => {
    const direct = plotBlowup({ runDir: FIXTURE });
    const viaCli = render({ kind: "blowup", run: FIXTURE, out: "unused.svg" });
    expect(viaCli).toBe(direct);
  });
});
