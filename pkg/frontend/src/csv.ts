import { readFileSync } from "fs";

export interface Table {
  path: string;
  columns: string[];
  /** One row per data line; empty cells become null. */
  rows: (number | null)[][];
}

export class CsvError extends Error {
  constructor(public readonly path: string, message: string) {
    super(`${path}: ${message}`);
  }
}

/** Parse the runner's CSV schema: header line, comma separated, no quoting. */
export function readCsv(path: string): Table {
  let raw: string;
  try {
    raw = readFileSync(path, "utf8");
  } catch {
    throw new CsvError(path, "cannot read file");
  }
  const lines = raw.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) throw new CsvError(path, "empty file");
  const columns = lines[0].split(",");
  const rows: (number | null)[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new CsvError(path, `row ${i + 1} has ${cells.length} cells, expected ${columns.length}`);
    }
    rows.push(
      cells.map((c) => {
        if (c === "") return null;
        const v = Number(c);
        if (!Number.isFinite(v)) throw new CsvError(path, `non-numeric cell '${c}' in row ${i + 1}`);
        return v;
      })
    );
  }
  if (rows.length === 0) throw new CsvError(path, "no data rows");
  return { path, columns, rows };
}

export function column(table: Table, name: string): (number | null)[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) throw new CsvError(table.path, `missing column '${name}'`);
  return table.rows.map((r) => r[idx]);
}
