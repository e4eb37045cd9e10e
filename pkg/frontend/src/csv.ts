// CSV reading against the frozen lesionsim artifact schemas. The simulator
// writes plain comma-separated files with no quoting (position lists use '|'
// and spaces), so a line split is a faithful parser. Any header deviation is
// a schema error and callers exit with code 2.

import { readFileSync } from "fs";

export class SchemaError extends Error {}

export interface Table {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV file");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new SchemaError(
        `row width ${row.length} does not match header width ${header.length}`,
      );
    }
  }
  return { header, rows };
}

/** Exact header check; `optionalTail` allows a trailing z column for 3-d data. */
export function requireColumns(
  table: Table,
  expected: string[],
  file: string,
  optionalTail: string[] = [],
): void {
  const got = table.header.join(",");
  const base = expected.join(",");
  const extended = expected.concat(optionalTail).join(",");
  if (got !== base && (optionalTail.length === 0 || got !== extended)) {
    throw new SchemaError(`schema mismatch in ${file}: expected [${base}] got [${got}]`);
  }
}

export function readTable(
  path: string,
  expected: string[],
  optionalTail: string[] = [],
): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new SchemaError(`missing input file ${path}`);
  }
  const table = parseCsv(text);
  requireColumns(table, expected, path, optionalTail);
  return table;
}

export function numericColumn(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`missing column ${name}`);
  }
  return table.rows.map((row) => {
    const value = Number(row[idx]);
    if (!Number.isFinite(value)) {
      throw new SchemaError(`non-numeric value '${row[idx]}' in column ${name}`);
    }
    return value;
  });
}

export function stringColumn(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`missing column ${name}`);
  }
  return table.rows.map((row) => row[idx]);
}
