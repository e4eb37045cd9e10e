import { existsSync, mkdtempSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join, resolve } from "path";
import { describe, expect, it } from "vitest";
import { SchemaError } from "../src/csv.js";
import {
  renderDtsweep,
  renderKsweep,
  renderSnapshot,
  renderStationarity,
  renderSurvival,
  renderTrajectories,
} from "../src/plots.js";

// prefer the live acceptance artifacts, fall back to the committed fixtures
const FIXTURES = resolve(__dirname, "..", "fixtures");
const ARTIFACTS = process.env.ARTIFACTS_DIR
  ?? resolve(__dirname, "..", "..", "artifacts", "acceptance");

function pick(sub: string, file: string): string {
  const live = join(ARTIFACTS, sub, file);
  return existsSync(live) ? live : join(FIXTURES, file);
}

describe("figure rendering", () => {
  it("survival curve with error band", () => {
    const svg = renderSurvival(pick("c01_equivalence", "survival.csv"));
    expect(svg).toContain("<svg");
    expect(svg).toContain("polygon"); // the band
    expect(svg).toContain("Survival probability");
  });

  it("single-row survival renders an error bar", () => {
    const dir = mkdtempSync(join(tmpdir(), "lesionplot-"));
    writeFileSync(join(dir, "survival.csv"),
                  "t,survival,se,n_replicates\n1,0.25,0.0433,100\n");
    const svg = renderSurvival(join(dir, "survival.csv"));
    expect(svg).toContain("<line");
    expect(svg).not.toContain("polygon");
  });

  it("ksweep log-log plot annotates the fitted slope", () => {
    const svg = renderKsweep(pick("c04_ksweep", "ksweep.csv"));
    expect(svg).toContain("fitted slope =");
    expect(svg).toMatch(/data-slope="[-0-9.e+]+"/);
  });

  it("stationarity heatmap has one cell per partition bin", () => {
    const svg = renderStationarity(pick("c07_stationarity", "occupancy.csv"));
    const cells = svg.match(/<rect /g) ?? [];
    // 16 occupancy cells + frame + background
    expect(cells.length).toBeGreaterThanOrEqual(17);
  });

  it("dtsweep renders error bars per dt", () => {
    const svg = renderDtsweep(pick("c08_dtsweep", "dtsweep.csv"));
    expect(svg).toContain("Splitting-step refinement");
  });

  it("snapshot scatter renders lesion markers", () => {
    const svg = renderSnapshot(pick("c06_paths", "snapshots.csv"));
    expect(svg).toContain("<circle");
  });

  it("trajectory fan draws paths and the ensemble mean", () => {
    const svg = renderTrajectories(join(FIXTURES, "trajectory.csv"));
    const lines = svg.match(/<polyline /g) ?? [];
    expect(lines.length).toBeGreaterThan(10);
    expect(svg).toContain("mean in red");
  });

  it("fails loudly on a schema mismatch", () => {
    const dir = mkdtempSync(join(tmpdir(), "lesionplot-"));
    writeFileSync(join(dir, "survival.csv"), "time,surv\n0,1\n");
    expect(() => renderSurvival(join(dir, "survival.csv"))).toThrow(SchemaError);
  });

  it("deterministic output for identical input", () => {
    const a = renderKsweep(pick("c04_ksweep", "ksweep.csv"));
    const b = renderKsweep(pick("c04_ksweep", "ksweep.csv"));
    expect(a).toBe(b);
  });
});
