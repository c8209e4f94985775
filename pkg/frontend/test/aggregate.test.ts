import { describe, expect, it } from "vitest";

import { aggregate } from "../src/aggregate.js";
import { ResultRow } from "../src/csv.js";

function row(overrides: Partial<ResultRow>): ResultRow {
  return {
    scenario_id: "s",
    algorithm: "PPCOMP",
    T: 10,
    snr_db: 10,
    mrf_nrf: 30,
    trial: 0,
    nmse_h: NaN,
    nmse_c: 0.5,
    eta: 0.9,
    wall_ms: 0,
    support_size: 8,
    ...overrides,
  };
}

describe("aggregate", () => {
  it("computes per-x mean and std over trials", () => {
    const rows = [
      row({ trial: 0, eta: 0.8 }),
      row({ trial: 1, eta: 1.0 }),
      row({ trial: 0, T: 20, eta: 0.6 }),
    ];
    const series = aggregate(rows, "T", "eta", ["algorithm"]);
    expect(series).toHaveLength(1);
    const [s] = series;
    expect(s.key).toBe("algorithm=PPCOMP");
    expect(s.points).toEqual([
      { x: 10, mean: 0.9, std: expect.closeTo(0.1, 12), n: 2 },
      { x: 20, mean: 0.6, std: 0, n: 1 },
    ]);
  });

  it("single trial yields zero-width band", () => {
    const series = aggregate([row({})], "T", "eta", ["algorithm"]);
    expect(series[0].points[0].std).toBe(0);
    expect(series[0].points[0].n).toBe(1);
  });

  it("skips NaN values of the y field", () => {
    const rows = [row({ algorithm: "DCOMP" }), row({ algorithm: "PPSOMP", nmse_h: 0.4 })];
    const series = aggregate(rows, "T", "nmse_h", ["algorithm"]);
    expect(series).toHaveLength(1);
    expect(series[0].key).toBe("algorithm=PPSOMP");
  });

  it("splits groups on every groupBy field", () => {
    const rows = [
      row({ mrf_nrf: 20, eta: 0.5 }),
      row({ mrf_nrf: 30, eta: 0.7 }),
      row({ algorithm: "DCOMP", mrf_nrf: 20, eta: 0.3 }),
    ];
    const series = aggregate(rows, "T", "eta", ["algorithm", "mrf_nrf"]);
    expect(series.map((s) => s.key)).toEqual([
      "algorithm=DCOMP mrf_nrf=20",
      "algorithm=PPCOMP mrf_nrf=20",
      "algorithm=PPCOMP mrf_nrf=30",
    ]);
  });
});
