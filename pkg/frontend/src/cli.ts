#!/usr/bin/env node
/**
 * plot --figure N --csv <path> [--csv <path> ...] --out <path.png|path.svg>
 *
 * Reads experiment CSV output and renders the corresponding figure analogue.
 * Exit codes: 0 success, 2 configuration/data error (unknown figure, missing
 * CSV field, empty CSV).
 */

import { CsvFormatError } from "./csv.js";
import { FIGURES, figureSpec } from "./figures.js";
import { render } from "./render.js";

interface Args {
  figure: number;
  csvPaths: string[];
  out: string;
}

export function parseArgs(argv: string[]): Args {
  if (argv[0] !== "plot") {
    throw new UsageError(`unknown command '${argv[0] ?? ""}'; expected 'plot'`);
  }
  let figure: number | undefined;
  const csvPaths: string[] = [];
  let out: string | undefined;
  for (let i = 1; i < argv.length; i++) {
    switch (argv[i]) {
      case "--figure":
        figure = Number(argv[++i]);
        break;
      case "--csv":
        csvPaths.push(argv[++i]);
        break;
      case "--out":
        out = argv[++i];
        break;
      default:
        throw new UsageError(`unknown argument '${argv[i]}'`);
    }
  }
  if (figure === undefined || Number.isNaN(figure) || !FIGURES.includes(figure)) {
    throw new UsageError(`--figure must be one of ${FIGURES.join(", ")}`);
  }
  if (csvPaths.length === 0) throw new UsageError("at least one --csv path is required");
  if (!out) throw new UsageError("--out is required");
  return { figure, csvPaths, out };
}

export class UsageError extends Error {}

export async function main(argv: string[]): Promise<number> {
  try {
    const args = parseArgs(argv);
    const result = await render(figureSpec(args.figure, args.csvPaths, args.out));
    console.log(`wrote ${result.out} (${result.series.length} series)`);
    return 0;
  } catch (error) {
    if (error instanceof UsageError || error instanceof CsvFormatError || error instanceof Error) {
      console.error(`error: ${(error as Error).message}`);
      return 2;
    }
    throw error;
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("mmwavepp-plot")) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
