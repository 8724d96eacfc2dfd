/** Deterministic SVG assembly: fixed canvas, no timestamps, no randomness.
 * Rendering identical inputs yields byte-identical files. */

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
  ticks(n: number): number[];
  log: boolean;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    d0 -= 0.5;
    d1 += 0.5;
  }
  const f = ((v: number) =>
    range[0] + ((v - d0) / (d1 - d0)) * (range[1] - range[0])) as Scale;
  f.domain = [d0, d1];
  f.range = range;
  f.log = false;
  f.ticks = (n: number) => niceTicks(d0, d1, n);
  return f;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (!(d0 > 0)) d0 = Math.min(1e-300, d1 > 0 ? d1 : 1);
  if (d1 <= d0) d1 = d0 * 10;
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const f = ((v: number) =>
    range[0] + ((Math.log10(Math.max(v, d0)) - l0) / (l1 - l0)) * (range[1] - range[0])) as Scale;
  f.domain = [d0, d1];
  f.range = range;
  f.log = true;
  f.ticks = () => {
    const out: number[] = [];
    for (let e = Math.ceil(l0); e <= Math.floor(l1); e += 1) out.push(10 ** e);
    return out.length >= 2 ? out : [d0, d1];
  };
  return f;
}

function niceTicks(lo: number, hi: number, n: number): number[] {
  const span = hi - lo;
  const step0 = span / Math.max(n - 1, 1);
  const mag = 10 ** Math.floor(Math.log10(step0));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= n) ?? mag * 10;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) out.push(v);
  return out;
}

const fmt = (v: number) => {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Math.round(v * 1e6) / 1e6);
};

export class Panel {
  readonly parts: string[] = [];

  constructor(
    public x0: number,
    public y0: number,
    public width: number,
    public height: number,
    public sx: Scale,
    public sy: Scale,
  ) {}

  path(xs: number[], ys: number[], color: string, width = 1.2, dash = ""): void {
    const pts: string[] = [];
    for (let i = 0; i < xs.length; i += 1) {
      const y = ys[i];
      if (!Number.isFinite(y) || (this.sy.log && y <= 0)) continue;
      pts.push(`${this.sx(xs[i]).toFixed(2)},${this.sy(y).toFixed(2)}`);
    }
    if (pts.length === 0) return;
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    if (pts.length === 1) {
      const [cx, cy] = pts[0].split(",");
      this.parts.push(`<circle cx="${cx}" cy="${cy}" r="2.5" fill="${color}"/>`);
      return;
    }
    this.parts.push(
      `<polyline points="${pts.join(" ")}" fill="none" stroke="${color}" stroke-width="${width}"${d}/>`,
    );
  }

  vline(x: number, color: string, label = ""): void {
    const px = this.sx(x).toFixed(2);
    this.parts.push(
      `<line x1="${px}" y1="${this.y0}" x2="${px}" y2="${this.y0 + this.height}" stroke="${color}" stroke-width="1" stroke-dasharray="4 3"/>`,
    );
    if (label) {
      this.parts.push(
        `<text x="${(Number(px) + 4).toFixed(2)}" y="${this.y0 + 14}" font-size="11" fill="${color}">${escapeXml(label)}</text>`,
      );
    }
  }

  text(label: string, x: number, y: number, color = "#333", size = 11): void {
    this.parts.push(
      `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" font-size="${size}" fill="${color}">${escapeXml(label)}</text>`,
    );
  }

  axes(xLabel: string, yLabel: string, title = ""): void {
    const { x0, y0, width, height } = this;
    const bottom = y0 + height;
    this.parts.push(
      `<rect x="${x0}" y="${y0}" width="${width}" height="${height}" fill="none" stroke="#999" stroke-width="1"/>`,
    );
    for (const v of this.sx.ticks(7)) {
      const px = this.sx(v);
      this.parts.push(
        `<line x1="${px.toFixed(2)}" y1="${bottom}" x2="${px.toFixed(2)}" y2="${bottom + 4}" stroke="#666"/>`,
        `<text x="${px.toFixed(2)}" y="${bottom + 16}" font-size="10" text-anchor="middle" fill="#444">${fmt(v)}</text>`,
      );
    }
    for (const v of this.sy.ticks(5)) {
      const py = this.sy(v);
      this.parts.push(
        `<line x1="${x0 - 4}" y1="${py.toFixed(2)}" x2="${x0}" y2="${py.toFixed(2)}" stroke="#666"/>`,
        `<text x="${x0 - 7}" y="${(py + 3).toFixed(2)}" font-size="10" text-anchor="end" fill="#444">${fmt(v)}</text>`,
      );
    }
    this.parts.push(
      `<text x="${x0 + width / 2}" y="${bottom + 30}" font-size="11" text-anchor="middle" fill="#222">${escapeXml(xLabel)}</text>`,
      `<text x="${x0 - 44}" y="${y0 + height / 2}" font-size="11" text-anchor="middle" fill="#222" transform="rotate(-90 ${x0 - 44} ${y0 + height / 2})">${escapeXml(yLabel)}</text>`,
    );
    if (title) {
      this.parts.push(
        `<text x="${x0 + width / 2}" y="${y0 - 6}" font-size="12" text-anchor="middle" fill="#111">${escapeXml(title)}</text>`,
      );
    }
  }

  legend(entries: { label: string; color: string; dash?: string }[]): void {
    let y = this.y0 + 14;
    for (const e of entries) {
      const x = this.x0 + this.width - 150;
      const d = e.dash ? ` stroke-dasharray="${e.dash}"` : "";
      this.parts.push(
        `<line x1="${x}" y1="${y - 4}" x2="${x + 22}" y2="${y - 4}" stroke="${e.color}" stroke-width="1.5"${d}/>`,
        `<text x="${x + 27}" y="${y}" font-size="10" fill="#333">${escapeXml(e.label)}</text>`,
      );
      y += 14;
    }
  }
}

export function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function assemble(width: number, height: number, parts: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    ...parts,
    "</svg>",
    "",
  ].join("\n");
}

export function extent(values: number[], positiveOnly = false): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (positiveOnly && v <= 0) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === Infinity) return positiveOnly ? [1e-3, 1] : [0, 1];
  return [lo, hi];
}
