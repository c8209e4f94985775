/**
 * Figure rendering: CSV in, SVG (or sharp-encoded PNG) out.
 */

import { writeFileSync } from "fs";

import { aggregate, Series } from "./aggregate.js";
import { readCsvFiles } from "./csv.js";
import { FigureSpec } from "./figures.js";
import { renderSvg } from "./svg.js";

export interface RenderResult {
  series: Series[];
  svg: string;
  out: string;
}

export async function render(spec: FigureSpec): Promise<RenderResult> {
  const rows = readCsvFiles(spec.csvPaths);
  if (rows.length === 0) {
    throw new Error("CSV contains no data rows; nothing to plot");
  }
  const series = aggregate(rows, spec.x, spec.y, spec.groupBy);
  if (series.length === 0 || series.every((s) => s.points.length === 0)) {
    throw new Error(`no finite values of '${spec.y}' to plot`);
  }
  const svg = renderSvg(series, {
    title: spec.title,
    xLabel: axisLabel(spec.x),
    yLabel: axisLabel(spec.y),
    logY: spec.logY,
  });
  if (spec.out.toLowerCase().endsWith(".png")) {
    const sharp = (await import("sharp")).default;
    await sharp(Buffer.from(svg)).png().toFile(spec.out);
  } else {
    writeFileSync(spec.out, svg);
  }
  return { series, svg, out: spec.out };
}

function axisLabel(column: string): string {
  switch (column) {
    case "T":
      return "number of snapshots";
    case "snr_db":
      return "SNR (dB)";
    case "nmse_h":
      return "channel NMSE";
    case "nmse_c":
      return "covariance NMSE";
    case "eta":
      return "relative efficiency";
    default:
      return column;
  }
}
