// Acceptance criterion for the plot suite: every validation figure renders
// from the simulator's criterion artifacts without error, and the annotated
// K-convergence slope equals the value in the run summary to 1e-6.

import { existsSync, readFileSync } from "fs";
import { join, resolve } from "path";
import { describe, expect, it } from "vitest";
import { numericColumn, readTable } from "../src/csv.js";
import { fitLogLogSlope } from "../src/slope.js";
import { renderKsweep, renderStationarity, renderSurvival } from "../src/plots.js";

const FIXTURES = resolve(__dirname, "..", "fixtures");
const ARTIFACTS = process.env.ARTIFACTS_DIR
  ?? resolve(__dirname, "..", "..", "artifacts", "acceptance");

function pick(sub: string, file: string): string {
  const live = join(ARTIFACTS, sub, file);
  return existsSync(live) ? live : join(FIXTURES, file);
}

describe("criterion 11: plot suite over criterion artifacts", () => {
  it("renders the survival curve, slope plot, and stationarity heatmap", () => {
    for (const svg of [
      renderSurvival(pick("c01_equivalence", "survival.csv")),
      renderKsweep(pick("c04_ksweep", "ksweep.csv")),
      renderStationarity(pick("c07_stationarity", "occupancy.csv")),
    ]) {
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg).toContain("</svg>");
    }
  });

  it("annotated slope equals the criterion-4 summary value to 1e-6", () => {
    const summaryPath = pick("c04_ksweep", "ksweep_summary.json");
    const summary = JSON.parse(readFileSync(summaryPath, "utf8"));
    const table = readTable(pick("c04_ksweep", "ksweep.csv"),
                            ["k", "n_replicates", "e_rms", "err_of_mean", "se_mean"]);
    const recomputed = fitLogLogSlope(numericColumn(table, "k"), numericColumn(table, "e_rms"));
    expect(Math.abs(recomputed - summary.slope)).toBeLessThan(1e-6);

    const svg = renderKsweep(pick("c04_ksweep", "ksweep.csv"));
    const match = svg.match(/data-slope="([-0-9.e+]+)"/);
    expect(match).not.toBeNull();
    const annotated = Number(match![1]);
    expect(Math.abs(annotated - summary.slope)).toBeLessThan(1e-6);
  });
});
