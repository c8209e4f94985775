import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

import { describe, expect, it } from "vitest";

import { aggregate } from "../src/aggregate.js";
import { readCsv } from "../src/csv.js";
import { figureSpec } from "../src/figures.js";
import { main } from "../src/cli.js";
import { render } from "../src/render.js";
import { extractSeriesMetadata } from "../src/svg.js";

const FIXTURE = new URL("../fixtures/fig3_sample.csv", import.meta.url).pathname;

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "figures-"));
}

describe("render", () => {
  it("S1: figure-3 CSV renders four series whose plotted means match recomputation", async () => {
    const out = join(tmp(), "fig3.svg");
    const result = await render(figureSpec(3, [FIXTURE], out));
    expect(existsSync(out)).toBe(true);

    const svg = readFileSync(out, "utf-8");
    const lines = svg.match(/class="series-line"/g) ?? [];
    expect(lines).toHaveLength(4);

    // plotted means must equal an independent re-aggregation of the CSV
    const plotted = extractSeriesMetadata(svg);
    const expected = aggregate(readCsv(FIXTURE), "T", "eta", ["algorithm"]);
    expect(plotted).toHaveLength(expected.length);
    for (let i = 0; i < expected.length; i++) {
      expect(plotted[i].key).toBe(expected[i].key);
      for (let j = 0; j < expected[i].points.length; j++) {
        expect(Math.abs(plotted[i].points[j].mean - expected[i].points[j].mean)).toBeLessThanOrEqual(1e-9);
        expect(Math.abs(plotted[i].points[j].std - expected[i].points[j].std)).toBeLessThanOrEqual(1e-9);
      }
    }
    expect(result.series).toEqual(plotted);
  });

  it("renders PNG output through sharp", async () => {
    const out = join(tmp(), "fig3.png");
    await render(figureSpec(3, [FIXTURE], out));
    const bytes = readFileSync(out);
    expect(bytes.subarray(0, 8)).toEqual(Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]));
  });

  it("empty CSV errors without writing a file", async () => {
    const dir = tmp();
    const csv = join(dir, "empty.csv");
    writeFileSync(
      csv,
      "scenario_id,algorithm,T,snr_db,mrf_nrf,trial,nmse_h,nmse_c,eta,wall_ms,support_size\n",
    );
    const out = join(dir, "never.svg");
    await expect(render(figureSpec(3, [csv], out))).rejects.toThrow(/no data rows/);
    expect(existsSync(out)).toBe(false);
  });

  it("log-scale figures render with NaN columns skipped", async () => {
    const out = join(tmp(), "fig4.svg");
    const result = await render(figureSpec(4, [FIXTURE], out));
    expect(result.series.length).toBe(4); // all four report nmse_c
    const fig2out = join(tmp(), "fig2.svg");
    const fig2 = await render(figureSpec(2, [FIXTURE], fig2out));
    expect(fig2.series.length).toBe(2); // only channel algorithms have nmse_h
  });
});

describe("cli", () => {
  it("plots the fixture and exits 0", async () => {
    const out = join(tmp(), "cli.svg");
    const code = await main(["plot", "--figure", "3", "--csv", FIXTURE, "--out", out]);
    expect(code).toBe(0);
    expect(existsSync(out)).toBe(true);
  });

  it("missing field exits 2 and names the field", async () => {
    const dir = tmp();
    const csv = join(dir, "bad.csv");
    writeFileSync(csv, "scenario_id,algorithm\nx,y\n");
    const code = await main(["plot", "--figure", "3", "--csv", csv, "--out", join(dir, "x.svg")]);
    expect(code).toBe(2);
  });

  it("unknown figure exits 2", async () => {
    const code = await main(["plot", "--figure", "11", "--csv", FIXTURE, "--out", "/tmp/x.svg"]);
    expect(code).toBe(2);
  });

  it("requires plot subcommand", async () => {
    const code = await main(["scatter"]);
    expect(code).toBe(2);
  });
});
