/**
 * Figure definitions: which CSV feeds each figure and which columns
 * become the plotted series. No numbers are recomputed here; points
 * are carried through to the SVG exactly as parsed.
 */
import { readResultsCsv, readTracesCsv, CsvError, ResultRow } from "./csv.js";
import { Chart, Series } from "./svg.js";

export const FIGURES = ["se_vs_snr", "se_vs_bits", "se_vs_xi", "ee_vs_bits", "convergence"] as const;
export type FigureName = (typeof FIGURES)[number];

export interface FigureSpec {
  inputCsv: string;
  figure: FigureName;
  output: string;
  withErrorBars: boolean;
}

interface AggregateFigure {
  axis: string;
  xLabel: string;
  yLabel: string;
  y: (r: ResultRow) => number;
  err: (r: ResultRow) => number;
}

const AGGREGATE_FIGURES: Record<Exclude<FigureName, "convergence">, AggregateFigure> = {
  se_vs_snr: {
    axis: "snr_db",
    xLabel: "SNR (dB)",
    yLabel: "spectral efficiency (bits/s/Hz)",
    y: (r) => r.mean_se_bits,
    err: (r) => r.se_stderr,
  },
  se_vs_bits: {
    axis: "bits",
    xLabel: "ADC resolution (bits)",
    yLabel: "spectral efficiency (bits/s/Hz)",
    y: (r) => r.mean_se_bits,
    err: (r) => r.se_stderr,
  },
  se_vs_xi: {
    axis: "xi",
    xLabel: "CSI quality",
    yLabel: "spectral efficiency (bits/s/Hz)",
    y: (r) => r.mean_se_bits,
    err: (r) => r.se_stderr,
  },
  ee_vs_bits: {
    axis: "bits",
    xLabel: "ADC resolution (bits)",
    yLabel: "energy efficiency (bits/Hz/J)",
    y: (r) => r.mean_ee,
    err: (r) => r.ee_stderr,
  },
};

/** Group rows into named series, keeping first-appearance order. */
function groupBy<T>(rows: T[], key: (row: T) => string): Map<string, T[]> {
  const groups = new Map<string, T[]>();
  for (const row of rows) {
    const k = key(row);
    const bucket = groups.get(k);
    if (bucket) {
      bucket.push(row);
    } else {
      groups.set(k, [row]);
    }
  }
  return groups;
}

function aggregateChart(spec: FigureSpec, fig: AggregateFigure): Chart {
  const rows = readResultsCsv(spec.inputCsv);
  for (const row of rows) {
    if (row.axis_name !== fig.axis) {
      throw new CsvError(
        `figure ${spec.figure} needs axis_name ${fig.axis}, the CSV has ${row.axis_name}`,
      );
    }
  }
  const series: Series[] = [];
  for (const [scheme, group] of groupBy(rows, (r) => r.scheme)) {
    // a mean over zero successful runs is NaN and cannot be drawn
    const drawable = group.filter((r) => Number.isFinite(fig.y(r)));
    series.push({
      name: scheme,
      points: drawable.map((r) => [r.axis_value, fig.y(r)]),
      errors: spec.withErrorBars ? drawable.map((r) => fig.err(r)) : undefined,
    });
  }
  return { xLabel: fig.xLabel, yLabel: fig.yLabel, series };
}

function convergenceChart(spec: FigureSpec): Chart {
  const rows = readTracesCsv(spec.inputCsv);
  const series: Series[] = [];
  const key = (r: { scheme: string; axis_name: string; axis_value: number; channel_index: number }) =>
    `${r.scheme} ${r.axis_name}=${r.axis_value} ch${r.channel_index}`;
  for (const [name, group] of groupBy(rows, key)) {
    series.push({
      name,
      points: group.map((r) => [r.iteration, r.se_bits]),
    });
  }
  return { xLabel: "iteration", yLabel: "spectral efficiency (bits/s/Hz)", series };
}

export function buildChart(spec: FigureSpec): Chart {
  if (spec.figure === "convergence") {
    return convergenceChart(spec);
  }
  return aggregateChart(spec, AGGREGATE_FIGURES[spec.figure]);
}
