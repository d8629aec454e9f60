import fs from "fs";

import { Table } from "./types";

/** Read a simulator CSV: '#' lines are config comments, first real line is
 * the header, every cell is numeric. */
export function readCsv(path: string): Table {
  const lines = fs
    .readFileSync(path, "utf-8")
    .split("\n")
    .filter((l) => l.trim().length > 0 && !l.startsWith("#"));
  if (lines.length === 0) {
    throw new Error(`${path}: no rows`);
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",").map((c) => {
      const v = c === "" || c === "None" ? NaN : Number(c);
      return v;
    });
    if (cells.length !== columns.length) {
      throw new Error(`${path}: row ${i + 1} has ${cells.length} cells, `
        + `expected ${columns.length}`);
    }
    return cells;
  });
  return { columns, rows };
}

export function column(table: Table, name: string, path = "?"): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(`${path}: missing column '${name}' `
      + `(have: ${table.columns.join(", ")})`);
  }
  return table.rows.map((r) => r[idx]);
}

export function readJson(path: string): any {
  return JSON.parse(fs.readFileSync(path, "utf-8"));
}

/** w vectors from a trajectory table (columns w_0 .. w_{d-1}). */
export function wVectors(table: Table, path = "?"): number[][] {
  const idxs: number[] = [];
  for (let i = 0; ; i++) {
    const at = table.columns.indexOf(`w_${i}`);
    if (at < 0) break;
    idxs.push(at);
  }
  if (idxs.length === 0) {
    throw new Error(`${path}: no w_* columns`);
  }
  return table.rows.map((r) => idxs.map((i) => r[i]));
}
