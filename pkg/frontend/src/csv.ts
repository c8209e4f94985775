/**
 * Parser for the experiment runner's CSV output.
 *
 * The format is fixed-header, comma-separated, unquoted. Covariance-only
 * algorithms report nmse_h as "nan", which parses to NaN and is skipped by
 * the aggregation layer.
 */

import { readFileSync } from "fs";

export const EXPECTED_HEADER = [
  "scenario_id",
  "algorithm",
  "T",
  "snr_db",
  "mrf_nrf",
  "trial",
  "nmse_h",
  "nmse_c",
  "eta",
  "wall_ms",
  "support_size",
] as const;

export type ColumnName = (typeof EXPECTED_HEADER)[number];

export interface ResultRow {
  scenario_id: string;
  algorithm: string;
  T: number;
  snr_db: number;
  mrf_nrf: number;
  trial: number;
  nmse_h: number;
  nmse_c: number;
  eta: number;
  wall_ms: number;
  support_size: number;
}

const NUMERIC: ReadonlySet<string> = new Set([
  "T",
  "snr_db",
  "mrf_nrf",
  "trial",
  "nmse_h",
  "nmse_c",
  "eta",
  "wall_ms",
  "support_size",
]);

export class CsvFormatError extends Error {}

export function parseCsvText(text: string, source = "<string>"): ResultRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new CsvFormatError(`${source}: empty file`);
  }
  const header = lines[0].split(",");
  for (const field of EXPECTED_HEADER) {
    if (!header.includes(field)) {
      throw new CsvFormatError(`${source}: missing field '${field}' in header`);
    }
  }
  const index = new Map(header.map((name, i) => [name, i]));
  const rows: ResultRow[] = [];
  for (let n = 1; n < lines.length; n++) {
    const parts = lines[n].split(",");
    if (parts.length !== header.length) {
      throw new CsvFormatError(`${source}: line ${n + 1} has ${parts.length} fields, expected ${header.length}`);
    }
    const take = (name: string): string => parts[index.get(name)!];
    const row: Record<string, string | number> = {};
    for (const name of header) {
      row[name] = NUMERIC.has(name) ? Number(take(name)) : take(name);
    }
    rows.push(row as unknown as ResultRow);
  }
  return rows;
}

export function readCsv(path: string): ResultRow[] {
  return parseCsvText(readFileSync(path, "utf-8"), path);
}

export function readCsvFiles(paths: string[]): ResultRow[] {
  return paths.flatMap((path) => readCsv(path));
}
