/**
 * Deterministic SVG line-chart renderer: one line per series with a shaded
 * +/-1 std band, linear or log axes, legend, and the aggregated data embedded
 * as JSON in a <metadata> element so consumers can verify plotted values.
 */

import { Series } from "./aggregate.js";

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logY: boolean;
  width?: number;
  height?: number;
}

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

const MARGIN = { top: 42, right: 24, bottom: 48, left: 64 };

function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = 10 ** Math.floor(Math.log10(span / count));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + 1e-12; v += chosen) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.floor(Math.log10(lo)); e <= Math.ceil(Math.log10(hi)); e++) {
    const v = 10 ** e;
    if (v >= lo / 1.0001 && v <= hi * 1.0001) ticks.push(v);
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

function fmt(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 0.01 && abs < 10000) return String(Number(value.toPrecision(4)));
  return value.toExponential(1);
}

export function renderSvg(series: Series[], options: ChartOptions): string {
  const width = options.width ?? 760;
  const height = options.height ?? 480;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const bandLo = (p: { mean: number; std: number }) => p.mean - p.std;
  const bandHi = (p: { mean: number; std: number }) => p.mean + p.std;
  let ys = series.flatMap((s) => s.points.flatMap((p) => [bandLo(p), bandHi(p), p.mean]));
  if (options.logY) ys = ys.filter((v) => v > 0);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  let yMin = Math.min(...ys);
  let yMax = Math.max(...ys);
  if (yMax === yMin) {
    yMax = yMin + (yMin === 0 ? 1 : Math.abs(yMin) * 0.1);
  }

  const sx = (x: number) =>
    MARGIN.left + (xMax === xMin ? plotW / 2 : ((x - xMin) / (xMax - xMin)) * plotW);
  const sy = (y: number) => {
    if (options.logY) {
      const t = (Math.log10(y) - Math.log10(yMin)) / (Math.log10(yMax) - Math.log10(yMin));
      return MARGIN.top + plotH - t * plotH;
    }
    return MARGIN.top + plotH - ((y - yMin) / (yMax - yMin)) * plotH;
  };

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  );
  parts.push(`<metadata id="series-data">${escapeXml(JSON.stringify(series))}</metadata>`);
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">${escapeXml(options.title)}</text>`,
  );

  const xTicks = niceTicks(xMin, xMax);
  const yTicks = options.logY ? logTicks(yMin, yMax) : niceTicks(yMin, yMax);
  for (const t of xTicks) {
    const px = sx(t);
    parts.push(`<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${MARGIN.top + plotH}" stroke="#eee"/>`);
    parts.push(
      `<text x="${px}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmt(t)}</text>`,
    );
  }
  for (const t of yTicks) {
    const py = sy(t);
    parts.push(`<line x1="${MARGIN.left}" y1="${py}" x2="${MARGIN.left + plotW}" y2="${py}" stroke="#eee"/>`);
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${py + 4}" text-anchor="end" font-family="sans-serif" font-size="11">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#444"/>`,
  );
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 10}" text-anchor="middle" font-family="sans-serif" font-size="13">${escapeXml(options.xLabel)}</text>`,
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${escapeXml(options.yLabel)}</text>`,
  );

  series.forEach((s, i) => {
    const colour = PALETTE[i % PALETTE.length];
    const pts = options.logY ? s.points.filter((p) => p.mean > 0) : s.points;
    if (pts.length === 0) return;
    const clampLo = (p: { mean: number; std: number }) =>
      options.logY ? Math.max(bandLo(p), yMin) : bandLo(p);
    const band = [
      ...pts.map((p) => `${sx(p.x)},${sy(Math.min(Math.max(bandHi(p), yMin), yMax))}`),
      ...[...pts].reverse().map((p) => `${sx(p.x)},${sy(Math.min(Math.max(clampLo(p), yMin), yMax))}`),
    ].join(" ");
    parts.push(`<polygon points="${band}" fill="${colour}" fill-opacity="0.12" stroke="none"/>`);
    const line = pts.map((p) => `${sx(p.x)},${sy(p.mean)}`).join(" ");
    parts.push(
      `<polyline class="series-line" data-key="${escapeXml(s.key)}" points="${line}" fill="none" stroke="${colour}" stroke-width="1.8"/>`,
    );
    for (const p of pts) {
      parts.push(`<circle cx="${sx(p.x)}" cy="${sy(p.mean)}" r="2.6" fill="${colour}"/>`);
    }
  });

  // legend
  series.forEach((s, i) => {
    const colour = PALETTE[i % PALETTE.length];
    const ly = MARGIN.top + 16 + i * 16;
    const lx = MARGIN.left + 12;
    parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${colour}" stroke-width="2"/>`);
    parts.push(
      `<text x="${lx + 28}" y="${ly}" font-family="sans-serif" font-size="11">${escapeXml(s.key)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function extractSeriesMetadata(svg: string): Series[] {
  const match = svg.match(/<metadata id="series-data">([\s\S]*?)<\/metadata>/);
  if (!match) throw new Error("no series metadata found in SVG");
  const unescaped = match[1]
    .replace(/&quot;/g, '"')
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&amp;/g, "&");
  return JSON.parse(unescaped) as Series[];
}
