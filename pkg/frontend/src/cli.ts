#!/usr/bin/env node
// lesionplot: render a validation figure from lesionsim run artifacts.
//   plot --kind KIND --in DIR --out FILE
// Exit codes: 0 written, 2 schema mismatch / missing or empty input.

import { existsSync, readdirSync, writeFileSync } from "fs";
import { SchemaError } from "./csv.js";
import { Kind, KINDS, renderKind } from "./plots.js";

function usage(): string {
  return `usage: lesionplot plot --kind <${KINDS.join("|")}> --in DIR --out FILE`;
}

export function main(argv: string[]): number {
  if (argv[0] !== "plot") {
    process.stderr.write(usage() + "\n");
    return 2;
  }
  const args = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || argv[i + 1] === undefined) {
      process.stderr.write(usage() + "\n");
      return 2;
    }
    args.set(argv[i].slice(2), argv[i + 1]);
  }
  const kind = args.get("kind");
  const inputDir = args.get("in");
  const outFile = args.get("out");
  if (!kind || !inputDir || !outFile) {
    process.stderr.write(usage() + "\n");
    return 2;
  }
  if (!KINDS.includes(kind as Kind)) {
    process.stderr.write(`unknown kind ${kind}; valid: ${KINDS.join(", ")}\n`);
    return 2;
  }
  if (!existsSync(inputDir) || readdirSync(inputDir).length === 0) {
    process.stderr.write(`input directory ${inputDir} is missing or empty\n`);
    return 2;
  }
  try {
    const svg = renderKind(kind as Kind, inputDir);
    writeFileSync(outFile, svg);
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema error: ${err.message}\n`);
      return 2;
    }
    throw err;
  }
  process.stdout.write(`wrote ${outFile}\n`);
  return 0;
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(
  process.argv[1].split("/").pop() ?? "",
);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
