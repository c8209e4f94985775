import { describe, expect, it } from "vitest";

import { CsvFormatError, parseCsvText, readCsv } from "../src/csv.js";

const HEADER = "scenario_id,algorithm,T,snr_db,mrf_nrf,trial,nmse_h,nmse_c,eta,wall_ms,support_size";

describe("parseCsvText", () => {
  it("parses rows with numeric coercion", () => {
    const text = `${HEADER}\nfig3,DSOMP,5,10,30,0,0.288104715,13.2301109,0.382071268,0,15\n`;
    const rows = parseCsvText(text);
    expect(rows).toHaveLength(1);
    expect(rows[0].algorithm).toBe("DSOMP");
    expect(rows[0].T).toBe(5);
    expect(rows[0].eta).toBeCloseTo(0.382071268, 12);
  });

  it("parses nan fields to NaN", () => {
    const text = `${HEADER}\nfig3,DCOMP,5,10,30,0,nan,1.5,0.4,0,16\n`;
    const rows = parseCsvText(text);
    expect(Number.isNaN(rows[0].nmse_h)).toBe(true);
    expect(rows[0].nmse_c).toBe(1.5);
  });

  it("names the missing field", () => {
    const text = "scenario_id,algorithm,T\nfig3,DSOMP,5\n";
    expect(() => parseCsvText(text)).toThrowError(/missing field 'snr_db'/);
  });

  it("rejects empty files", () => {
    expect(() => parseCsvText("")).toThrowError(CsvFormatError);
  });

  it("rejects ragged rows", () => {
    const text = `${HEADER}\nfig3,DSOMP,5\n`;
    expect(() => parseCsvText(text)).toThrowError(/line 2/);
  });

  it("reads the bundled fixture", () => {
    const rows = readCsv(new URL("../fixtures/fig3_sample.csv", import.meta.url).pathname);
    expect(rows.length).toBe(36);
    expect(new Set(rows.map((r) => r.algorithm)).size).toBe(4);
  });
});
