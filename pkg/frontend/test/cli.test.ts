import { execFileSync, execSync } from "child_process";
import { existsSync, mkdtempSync, readFileSync } from "fs";
import { tmpdir } from "os";
import { join, resolve } from "path";
import { beforeAll, describe, expect, it } from "vitest";

const ROOT = resolve(__dirname, "..");
const CLI = join(ROOT, "dist", "cli.js");
const FIXTURES = join(ROOT, "fixtures");

function runCli(args: string[]): { code: number; stderr: string } {
  try {
    execFileSync("node", [CLI, ...args], { stdio: ["ignore", "pipe", "pipe"] });
    return { code: 0, stderr: "" };
  } catch (err: any) {
    return { code: err.status ?? 1, stderr: String(err.stderr ?? "") };
  }
}

describe("lesionplot CLI", () => {
  beforeAll(() => {
    if (!existsSync(CLI)) {
      execSync("npx tsc", { cwd: ROOT });
    }
  });

  it("writes an SVG for a valid kind", () => {
    const out = join(mkdtempSync(join(tmpdir(), "lesionplot-")), "fig.svg");
    const res = runCli(["plot", "--kind", "ksweep", "--in", FIXTURES, "--out", out]);
    expect(res.code).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("<svg");
  });

  it("exits 2 on an empty or missing input directory", () => {
    const empty = mkdtempSync(join(tmpdir(), "lesionplot-"));
    const out = join(empty, "fig.svg");
    expect(runCli(["plot", "--kind", "survival", "--in", join(empty, "nope"), "--out", out]).code).toBe(2);
    expect(runCli(["plot", "--kind", "survival", "--in", empty, "--out", out]).code).toBe(2);
  });

  it("exits 2 on an unknown kind or schema mismatch", () => {
    const dir = mkdtempSync(join(tmpdir(), "lesionplot-"));
    const res = runCli(["plot", "--kind", "volcano", "--in", FIXTURES, "--out", join(dir, "f.svg")]);
    expect(res.code).toBe(2);
    // directory exists but holds the wrong file for the requested kind
    const res2 = runCli(["plot", "--kind", "survival", "--in", join(FIXTURES, "..", "src"), "--out", join(dir, "g.svg")]);
    expect(res2.code).toBe(2);
  });
});
