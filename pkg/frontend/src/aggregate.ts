/**
 * Trial aggregation: per-group mean and standard deviation along the x axis.
 *
 * Raw per-trial rows are the interchange format; all statistics happen here
 * in the plotting layer so the CSV stays re-aggregatable.
 */

import { ColumnName, ResultRow } from "./csv.js";

export interface SeriesPoint {
  x: number;
  mean: number;
  std: number;
  n: number;
}

export interface Series {
  key: string;
  points: SeriesPoint[];
}

export function groupKey(row: ResultRow, groupBy: ColumnName[]): string {
  return groupBy.map((field) => `${field}=${row[field]}`).join(" ");
}

export function aggregate(
  rows: ResultRow[],
  x: ColumnName,
  y: ColumnName,
  groupBy: ColumnName[],
): Series[] {
  const buckets = new Map<string, Map<number, number[]>>();
  for (const row of rows) {
    const value = row[y] as number;
    if (Number.isNaN(value)) continue; // e.g. nmse_h of covariance-only algorithms
    const key = groupKey(row, groupBy);
    const xValue = row[x] as number;
    if (!buckets.has(key)) buckets.set(key, new Map());
    const byX = buckets.get(key)!;
    if (!byX.has(xValue)) byX.set(xValue, []);
    byX.get(xValue)!.push(value);
  }
  const series: Series[] = [];
  for (const key of [...buckets.keys()].sort()) {
    const byX = buckets.get(key)!;
    const points: SeriesPoint[] = [...byX.keys()]
      .sort((a, b) => a - b)
      .map((xValue) => {
        const values = byX.get(xValue)!;
        const mean = values.reduce((acc, v) => acc + v, 0) / values.length;
        const variance = values.reduce((acc, v) => acc + (v - mean) ** 2, 0) / values.length;
        return { x: xValue, mean, std: Math.sqrt(variance), n: values.length };
      });
    series.push({ key, points });
  }
  return series;
}
