#!/usr/bin/env node
/** Command line entry: render --csv <path> --figure <name> --out <path> [--error-bars] */
import { writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { CsvError } from "./csv.js";
import { FIGURES, FigureName, FigureSpec, buildChart } from "./figures.js";
import { renderChart } from "./svg.js";

function usage(): string {
  return `usage: qmimo-figures render --csv <path> --figure <${FIGURES.join("|")}> --out <path> [--error-bars]`;
}

export function run(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        csv: { type: "string" },
        figure: { type: "string" },
        out: { type: "string" },
        "error-bars": { type: "boolean", default: false },
      },
    });
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    console.error(usage());
    return 2;
  }
  const { values, positionals } = parsed;
  if (positionals.length !== 1 || positionals[0] !== "render") {
    console.error(usage());
    return 2;
  }
  if (!values.csv || !values.figure || !values.out) {
    console.error("error: --csv, --figure, and --out are all required");
    console.error(usage());
    return 2;
  }
  if (!(FIGURES as readonly string[]).includes(values.figure)) {
    console.error(`error: unknown figure ${values.figure}; expected one of ${FIGURES.join(", ")}`);
    return 2;
  }
  const spec: FigureSpec = {
    inputCsv: values.csv,
    figure: values.figure as FigureName,
    output: values.out,
    withErrorBars: values["error-bars"] ?? false,
  };
  try {
    writeFileSync(spec.output, renderChart(buildChart(spec)));
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if (err instanceof Error && "code" in err) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  console.log(`wrote ${spec.output}`);
  return 0;
}

const entry = process.argv[1];
if (entry && import.meta.url === pathToFileURL(entry).href) {
  process.exit(run(process.argv.slice(2)));
}
