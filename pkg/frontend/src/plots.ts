// Figure builders, one per artifact kind. Each reads its frozen CSV from the
// input directory and returns an SVG string; nothing recomputes simulation
// quantities beyond the plotting statistics (least-squares slope, histogram
// cells) the artifacts are designed for.

import { join } from "path";
import { numericColumn, readTable, SchemaError, stringColumn } from "./csv.js";
import { fitLogLogSlope } from "./slope.js";
import { divergingColor, Figure, linearScale, logScale, niceTicks } from "./svg.js";

export const KINDS = [
  "survival",
  "ksweep",
  "stationarity",
  "dtsweep",
  "snapshot",
  "trajectories",
] as const;

export type Kind = (typeof KINDS)[number];

export function renderKind(kind: Kind, inputDir: string): string {
  switch (kind) {
    case "survival":
      return renderSurvival(join(inputDir, "survival.csv"));
    case "ksweep":
      return renderKsweep(join(inputDir, "ksweep.csv"));
    case "stationarity":
      return renderStationarity(join(inputDir, "occupancy.csv"));
    case "dtsweep":
      return renderDtsweep(join(inputDir, "dtsweep.csv"));
    case "snapshot":
      return renderSnapshot(join(inputDir, "snapshots.csv"));
    case "trajectories":
      return renderTrajectories(join(inputDir, "trajectory.csv"));
    default:
      throw new SchemaError(`unknown plot kind ${kind}`);
  }
}

export function renderSurvival(path: string): string {
  const table = readTable(path, ["t", "survival", "se", "n_replicates"]);
  const t = numericColumn(table, "t");
  const s = numericColumn(table, "survival");
  const se = numericColumn(table, "se");
  const fig = new Figure();
  fig.title("Survival probability");
  const sLo = Math.min(...s.map((v, i) => v - 3 * se[i]));
  const sHi = Math.max(...s.map((v, i) => v + 3 * se[i]));
  const pad = Math.max(0.02, (sHi - sLo) * 0.15);
  const x = linearScale([0, Math.max(...t)], [fig.plotLeft, fig.plotRight]);
  const y = linearScale([Math.max(0, sLo - pad), Math.min(1, sHi + pad)], [fig.plotBottom, fig.plotTop]);
  fig.axes(x, y, "t (h)", "P(no lethal lesion)", niceTicks(0, Math.max(...t)), niceTicks(y.domain[0], y.domain[1]));
  if (t.length === 1) {
    fig.errorBar(x(t[0]), y(s[0] - 3 * se[0]), y(s[0] + 3 * se[0]), "#1f77b4");
    fig.circle(x(t[0]), y(s[0]), 4, "#1f77b4");
  } else {
    fig.band(t.map(x), s.map((v, i) => y(v + 3 * se[i])), s.map((v, i) => y(v - 3 * se[i])), "#1f77b4");
    fig.polyline(t.map(x), s.map(y), "#1f77b4");
    for (let i = 0; i < t.length; i++) {
      fig.circle(x(t[i]), y(s[i]), 3, "#1f77b4");
    }
  }
  fig.note(fig.plotLeft + 8, fig.plotTop + 16, `band: +-3 SE over ${table.rows[0][3]} replicates`);
  return fig.render();
}

export function renderKsweep(path: string): string {
  const table = readTable(path, ["k", "n_replicates", "e_rms", "err_of_mean", "se_mean"]);
  const k = numericColumn(table, "k");
  const e = numericColumn(table, "e_rms");
  const slope = fitLogLogSlope(k, e);
  const fig = new Figure();
  fig.title("Mean-field convergence");
  const x = logScale([Math.min(...k) / 1.5, Math.max(...k) * 1.5], [fig.plotLeft, fig.plotRight]);
  const y = logScale([Math.min(...e) / 2, Math.max(...e) * 2], [fig.plotBottom, fig.plotTop]);
  const decades = (lo: number, hi: number) => {
    const ticks: number[] = [];
    for (let p = Math.ceil(Math.log10(lo)); p <= Math.floor(Math.log10(hi)); p++) {
      ticks.push(Math.pow(10, p));
    }
    return ticks;
  };
  fig.axes(x, y, "population scale K", "e_K (worst-checkpoint RMS)",
           decades(x.domain[0], x.domain[1]), decades(y.domain[0], y.domain[1]),
           (v) => v.toExponential(0));
  // fitted line through the centroid in log space
  const cx = k.reduce((a, b) => a + Math.log10(b), 0) / k.length;
  const cy = e.reduce((a, b) => a + Math.log10(b), 0) / e.length;
  const ends = [x.domain[0] * 1.2, x.domain[1] / 1.2];
  const line = ends.map((v) => Math.pow(10, cy + slope * (Math.log10(v) - cx)));
  fig.polyline(ends.map(x), line.map(y), "#d62728", 1.4, "6,4");
  for (let i = 0; i < k.length; i++) {
    fig.circle(x(k[i]), y(e[i]), 4.5, "#1f77b4");
  }
  fig.note(fig.plotLeft + 8, fig.plotTop + 16, `fitted slope = ${slope.toFixed(4)}`,
           ` data-slope="${slope.toExponential(17)}"`);
  return fig.render();
}

export function renderStationarity(path: string): string {
  const table = readTable(path, ["ix", "iy", "count", "expected"]);
  const ix = numericColumn(table, "ix");
  const iy = numericColumn(table, "iy");
  const count = numericColumn(table, "count");
  const expected = numericColumn(table, "expected");
  const n = Math.max(...ix) + 1;
  const m = Math.max(...iy) + 1;
  const fig = new Figure(520, 520);
  fig.title("Occupancy vs uniform expectation");
  const w = (fig.plotRight - fig.plotLeft) / n;
  const h = (fig.plotBottom - fig.plotTop) / m;
  for (let r = 0; r < table.rows.length; r++) {
    const ratio = count[r] / expected[r];
    fig.cell(fig.plotLeft + ix[r] * w, fig.plotBottom - (iy[r] + 1) * h, w, h,
             divergingColor(ratio, 0.05), ratio.toFixed(3));
  }
  fig.note(fig.plotLeft, fig.plotBottom + 24,
           `cells: count / expected, expected = ${expected[0]}`);
  return fig.render();
}

export function renderDtsweep(path: string): string {
  const table = readTable(path, ["dt_diff", "n_replicates", "mean_extinction", "se"]);
  const dt = numericColumn(table, "dt_diff");
  const mean = numericColumn(table, "mean_extinction");
  const se = numericColumn(table, "se");
  const fig = new Figure();
  fig.title("Splitting-step refinement");
  const lo = Math.min(...mean.map((v, i) => v - 3 * se[i]));
  const hi = Math.max(...mean.map((v, i) => v + 3 * se[i]));
  const pad = (hi - lo) * 0.3 || 0.01;
  const x = logScale([Math.min(...dt) / 1.5, Math.max(...dt) * 1.5], [fig.plotLeft, fig.plotRight]);
  const y = linearScale([lo - pad, hi + pad], [fig.plotBottom, fig.plotTop]);
  fig.axes(x, y, "dt_diff (h)", "mean extinction time (h)", dt, niceTicks(lo - pad, hi + pad),
           (v) => v.toExponential(0));
  for (let i = 0; i < dt.length; i++) {
    fig.errorBar(x(dt[i]), y(mean[i] - se[i]), y(mean[i] + se[i]), "#1f77b4");
    fig.circle(x(dt[i]), y(mean[i]), 4, "#1f77b4");
  }
  fig.note(fig.plotLeft + 8, fig.plotTop + 16, "bars: +-1 SE");
  return fig.render();
}

export function renderSnapshot(path: string): string {
  const table = readTable(path, ["replicate", "t", "kind", "x", "y"], ["z"]);
  const t = numericColumn(table, "t");
  const xs = numericColumn(table, "x");
  const ys = numericColumn(table, "y");
  const kind = stringColumn(table, "kind");
  const tLast = Math.max(...t);
  const fig = new Figure(520, 520);
  fig.title(`Lesion positions at t = ${tLast}`);
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = Math.min(...ys);
  const yHi = Math.max(...ys);
  const padX = (xHi - xLo) * 0.08 || 1;
  const padY = (yHi - yLo) * 0.08 || 1;
  const x = linearScale([xLo - padX, xHi + padX], [fig.plotLeft, fig.plotRight]);
  const y = linearScale([yLo - padY, yHi + padY], [fig.plotBottom, fig.plotTop]);
  fig.axes(x, y, "x (um)", "y (um)", niceTicks(x.domain[0], x.domain[1]), niceTicks(y.domain[0], y.domain[1]));
  let drawn = 0;
  for (let i = 0; i < t.length; i++) {
    if (t[i] !== tLast) continue;
    const color = kind[i] === "Y" ? "#d62728" : "#1f77b4";
    fig.circle(x(xs[i]), y(ys[i]), kind[i] === "Y" ? 4 : 3, color, 0.85);
    drawn++;
  }
  fig.note(fig.plotLeft + 8, fig.plotTop + 16, `${drawn} lesions (X blue, Y red)`);
  return fig.render();
}

export function renderTrajectories(path: string, maxPaths = 60): string {
  const table = readTable(path, ["replicate", "t", "n_x", "n_y"]);
  const rep = numericColumn(table, "replicate");
  const t = numericColumn(table, "t");
  const nx = numericColumn(table, "n_x");
  const byRep = new Map<number, { t: number[]; n: number[] }>();
  for (let i = 0; i < rep.length; i++) {
    let entry = byRep.get(rep[i]);
    if (!entry) {
      entry = { t: [], n: [] };
      byRep.set(rep[i], entry);
    }
    entry.t.push(t[i]);
    entry.n.push(nx[i]);
  }
  const fig = new Figure();
  fig.title("Sub-lethal count trajectories");
  const x = linearScale([0, Math.max(...t)], [fig.plotLeft, fig.plotRight]);
  const y = linearScale([0, Math.max(...nx) * 1.05 || 1], [fig.plotBottom, fig.plotTop]);
  fig.axes(x, y, "t (h)", "N_X", niceTicks(0, Math.max(...t)), niceTicks(0, y.domain[1]));
  let shown = 0;
  for (const entry of byRep.values()) {
    if (shown >= maxPaths) break;
    fig.polyline(entry.t.map(x), entry.n.map(y), "#1f77b4", 0.7);
    shown++;
  }
  // ensemble mean over every replicate, per time point
  const sums = new Map<number, { total: number; count: number }>();
  for (let i = 0; i < t.length; i++) {
    const acc = sums.get(t[i]) ?? { total: 0, count: 0 };
    acc.total += nx[i];
    acc.count++;
    sums.set(t[i], acc);
  }
  const times = [...sums.keys()].sort((a, b) => a - b);
  fig.polyline(times.map(x), times.map((tv) => y(sums.get(tv)!.total / sums.get(tv)!.count)),
               "#d62728", 2.4);
  fig.note(fig.plotLeft + 8, fig.plotTop + 16,
           `${Math.min(byRep.size, maxPaths)} of ${byRep.size} paths, mean in red`);
  return fig.render();
}
