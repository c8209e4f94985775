/**
 * Figure presets: which CSV columns go on which axis for figures 2 through 8,
 * matching the experiment presets bundled with the runner.
 */

import { ColumnName } from "./csv.js";

export interface FigureSpec {
  csvPaths: string[];
  x: ColumnName;
  y: ColumnName;
  groupBy: ColumnName[];
  out: string;
  logY: boolean;
  title: string;
}

interface FigureLayout {
  x: ColumnName;
  y: ColumnName;
  groupBy: ColumnName[];
  logY: boolean;
  title: string;
}

const LAYOUTS: Record<number, FigureLayout> = {
  2: {
    x: "T",
    y: "nmse_h",
    groupBy: ["algorithm", "mrf_nrf"],
    logY: true,
    title: "Channel NMSE vs snapshots (per measurement budget)",
  },
  3: {
    x: "T",
    y: "eta",
    groupBy: ["algorithm"],
    logY: false,
    title: "Relative efficiency vs snapshots",
  },
  4: {
    x: "T",
    y: "nmse_c",
    groupBy: ["algorithm"],
    logY: true,
    title: "Covariance NMSE vs snapshots",
  },
  5: {
    x: "T",
    y: "eta",
    groupBy: ["algorithm", "scenario_id"],
    logY: false,
    title: "Relative efficiency vs snapshots (sampling schemes)",
  },
  6: {
    x: "snr_db",
    y: "eta",
    groupBy: ["algorithm", "T"],
    logY: false,
    title: "Relative efficiency vs SNR",
  },
  7: {
    x: "T",
    y: "eta",
    groupBy: ["algorithm", "mrf_nrf"],
    logY: false,
    title: "Relative efficiency vs snapshots (per measurement budget)",
  },
  8: {
    x: "T",
    y: "eta",
    groupBy: ["algorithm", "scenario_id"],
    logY: false,
    title: "Relative efficiency vs snapshots (antenna counts)",
  },
};

export const FIGURES = Object.keys(LAYOUTS).map(Number);

export function figureSpec(figure: number, csvPaths: string[], out: string): FigureSpec {
  const layout = LAYOUTS[figure];
  if (!layout) {
    throw new Error(`no figure layout for ${figure}; available: ${FIGURES.join(", ")}`);
  }
  return { csvPaths, out, ...layout };
}
