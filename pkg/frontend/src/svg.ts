// Minimal deterministic SVG scene builder: linear/log scales, axes with tick
// labels, polylines, bands, markers, and heatmap cells. No DOM, no canvas;
// figures are plain strings so output is identical across platforms.

export interface Scale {
  (value: number): number;
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const fn = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  fn.domain = domain;
  return fn;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const base = linearScale([Math.log10(domain[0]), Math.log10(domain[1])], range);
  const fn = ((value: number) => base(Math.log10(value))) as Scale;
  fn.domain = domain;
  return fn;
}

export function niceTicks(lo: number, hi: number, count = 5): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const tick = mult * step;
  const start = Math.ceil(lo / tick) * tick;
  const ticks: number[] = [];
  for (let v = start; v <= hi + tick * 1e-9; v += tick) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

export function fmtTick(value: number): string {
  if (value !== 0 && (Math.abs(value) >= 1e4 || Math.abs(value) < 1e-3)) {
    return value.toExponential(1);
  }
  return Number(value.toPrecision(6)).toString();
}

const esc = (s: string) => s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export class Figure {
  readonly width: number;
  readonly height: number;
  readonly margin = { top: 36, right: 24, bottom: 46, left: 64 };
  private parts: string[] = [];

  constructor(width = 640, height = 440) {
    this.width = width;
    this.height = height;
  }

  get plotLeft(): number {
    return this.margin.left;
  }
  get plotRight(): number {
    return this.width - this.margin.right;
  }
  get plotTop(): number {
    return this.margin.top;
  }
  get plotBottom(): number {
    return this.height - this.margin.bottom;
  }

  add(fragment: string): void {
    this.parts.push(fragment);
  }

  title(text: string): void {
    this.add(
      `<text x="${this.width / 2}" y="20" text-anchor="middle" font-size="15" font-weight="bold">${esc(text)}</text>`,
    );
  }

  axes(xScale: Scale, yScale: Scale, xLabel: string, yLabel: string,
       xTicks: number[], yTicks: number[], fmt: (v: number) => string = fmtTick): void {
    const { plotLeft: l, plotRight: r, plotTop: t, plotBottom: b } = this;
    this.add(`<rect x="${l}" y="${t}" width="${r - l}" height="${b - t}" fill="none" stroke="#333"/>`);
    for (const v of xTicks) {
      const x = xScale(v);
      if (x < l - 1e-6 || x > r + 1e-6) continue;
      this.add(`<line x1="${x.toFixed(2)}" y1="${b}" x2="${x.toFixed(2)}" y2="${b + 5}" stroke="#333"/>`);
      this.add(`<line x1="${x.toFixed(2)}" y1="${t}" x2="${x.toFixed(2)}" y2="${b}" stroke="#ddd" stroke-width="0.5"/>`);
      this.add(`<text x="${x.toFixed(2)}" y="${b + 18}" text-anchor="middle" font-size="11">${esc(fmt(v))}</text>`);
    }
    for (const v of yTicks) {
      const y = yScale(v);
      if (y < t - 1e-6 || y > b + 1e-6) continue;
      this.add(`<line x1="${l - 5}" y1="${y.toFixed(2)}" x2="${l}" y2="${y.toFixed(2)}" stroke="#333"/>`);
      this.add(`<line x1="${l}" y1="${y.toFixed(2)}" x2="${r}" y2="${y.toFixed(2)}" stroke="#ddd" stroke-width="0.5"/>`);
      this.add(`<text x="${l - 8}" y="${(y + 4).toFixed(2)}" text-anchor="end" font-size="11">${esc(fmt(v))}</text>`);
    }
    this.add(`<text x="${(l + r) / 2}" y="${this.height - 10}" text-anchor="middle" font-size="13">${esc(xLabel)}</text>`);
    this.add(`<text x="16" y="${(t + b) / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 16 ${(t + b) / 2})">${esc(yLabel)}</text>`);
  }

  polyline(xs: number[], ys: number[], stroke: string, width = 1.8, dash = ""): void {
    const pts = xs.map((x, i) => `${x.toFixed(2)},${ys[i].toFixed(2)}`).join(" ");
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.add(`<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`);
  }

  band(xs: number[], upper: number[], lower: number[], fill: string, opacity = 0.25): void {
    const fwd = xs.map((x, i) => `${x.toFixed(2)},${upper[i].toFixed(2)}`);
    const back = xs.map((x, i) => `${x.toFixed(2)},${lower[i].toFixed(2)}`).reverse();
    this.add(`<polygon points="${fwd.concat(back).join(" ")}" fill="${fill}" opacity="${opacity}"/>`);
  }

  circle(x: number, y: number, radius: number, fill: string, opacity = 1): void {
    this.add(`<circle cx="${x.toFixed(2)}" cy="${y.toFixed(2)}" r="${radius}" fill="${fill}" opacity="${opacity}"/>`);
  }

  errorBar(x: number, yLow: number, yHigh: number, stroke: string): void {
    this.add(`<line x1="${x.toFixed(2)}" y1="${yLow.toFixed(2)}" x2="${x.toFixed(2)}" y2="${yHigh.toFixed(2)}" stroke="${stroke}" stroke-width="1.4"/>`);
    for (const y of [yLow, yHigh]) {
      this.add(`<line x1="${(x - 4).toFixed(2)}" y1="${y.toFixed(2)}" x2="${(x + 4).toFixed(2)}" y2="${y.toFixed(2)}" stroke="${stroke}" stroke-width="1.4"/>`);
    }
  }

  cell(x: number, y: number, w: number, h: number, fill: string, label?: string): void {
    this.add(`<rect x="${x.toFixed(2)}" y="${y.toFixed(2)}" width="${w.toFixed(2)}" height="${h.toFixed(2)}" fill="${fill}" stroke="#fff"/>`);
    if (label !== undefined) {
      this.add(`<text x="${(x + w / 2).toFixed(2)}" y="${(y + h / 2 + 4).toFixed(2)}" text-anchor="middle" font-size="11">${esc(label)}</text>`);
    }
  }

  note(x: number, y: number, text: string, attrs = ""): void {
    this.add(`<text x="${x}" y="${y}" font-size="12"${attrs}>${esc(text)}</text>`);
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" ` +
      `viewBox="0 0 ${this.width} ${this.height}" font-family="sans-serif">\n<rect width="100%" height="100%" fill="white"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

/** Diverging blue/white/red fill for ratio-to-expected heatmaps. */
export function divergingColor(ratio: number, spread = 0.2): string {
  const t = Math.max(-1, Math.min(1, (ratio - 1) / spread));
  const blend = (a: number, b: number) => Math.round(a + (b - a) * Math.abs(t));
  if (t < 0) {
    return `rgb(${blend(255, 49)},${blend(255, 113)},${blend(255, 181)})`;
  }
  return `rgb(${blend(255, 214)},${blend(255, 66)},${blend(255, 57)})`;
}
