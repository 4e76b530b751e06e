import { readFileSync } from "fs";
import Papa from "papaparse";

export class CsvError extends Error {}

export interface Table {
  columns: string[];
  rows: Record<string, number | string>[];
}

/** Parse a CSV file and check its header against the declared columns. */
export function readTable(path: string, requiredColumns: string[]): Table {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new CsvError(`${path}: ${parsed.errors[0].message}`);
  }
  const columns = parsed.meta.fields ?? [];
  const missing = requiredColumns.filter((c) => !columns.includes(c));
  const extra = columns.filter((c) => !requiredColumns.includes(c));
  if (missing.length > 0 || extra.length > 0) {
    throw new CsvError(
      `${path}: column mismatch (missing: [${missing.join(", ")}], extra: [${extra.join(", ")}])`
    );
  }
  if (parsed.data.length === 0) {
    throw new CsvError(`${path}: empty table body`);
  }
  const rows = parsed.data.map((raw) => {
    const row: Record<string, number | string> = {};
    for (const col of columns) {
      const value = raw[col];
      const num = Number(value);
      row[col] = value !== "" && Number.isFinite(num) ? num : value;
    }
    return row;
  });
  return { columns, rows };
}

export function numericColumn(table: Table, name: string): number[] {
  return table.rows.map((r) => {
    const v = r[name];
    if (typeof v !== "number") {
      throw new CsvError(`column ${name} holds non-numeric value ${String(v)}`);
    }
    return v;
  });
}
