/**
 * Strict parsers for the sweep CSV files.
 *
 * The renderer plots only what the CSV contains, so parsing is the one
 * place where bad input can hide. Both schemas are matched exactly:
 * a missing, extra, or misplaced column is an error naming the column,
 * and every numeric cell must be a well-formed float.
 */
import { readFileSync } from "node:fs";

export const RESULT_COLUMNS = [
  "scheme",
  "axis_name",
  "axis_value",
  "mean_se_bits",
  "se_stderr",
  "mean_ee",
  "ee_stderr",
  "mean_iters",
  "mean_ms",
  "n_ok",
  "n_failed",
] as const;

export const TRACE_COLUMNS = [
  "scheme",
  "axis_name",
  "axis_value",
  "channel_index",
  "iteration",
  "se_bits",
] as const;

export interface ResultRow {
  scheme: string;
  axis_name: string;
  axis_value: number;
  mean_se_bits: number;
  se_stderr: number;
  mean_ee: number;
  ee_stderr: number;
  mean_iters: number;
  mean_ms: number;
  n_ok: number;
  n_failed: number;
}

export interface TraceRow {
  scheme: string;
  axis_name: string;
  axis_value: number;
  channel_index: number;
  iteration: number;
  se_bits: number;
}

export class CsvError extends Error {}

const NUMBER_RE = /^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/;

/** Parse one numeric cell; "nan" and "inf" spellings come from the harness. */
function parseNumber(cell: string, column: string, line: number): number {
  const v = cell.trim();
  if (v === "nan") return NaN;
  if (v === "inf") return Infinity;
  if (v === "-inf") return -Infinity;
  if (!NUMBER_RE.test(v)) {
    throw new CsvError(`line ${line}: column ${column}: not a number: ${JSON.stringify(cell)}`);
  }
  return Number(v);
}

function splitLines(text: string): string[] {
  return text.split(/\r?\n/).filter((l) => l.length > 0);
}

function checkHeader(header: string, expected: readonly string[], path: string): void {
  const got = header.split(",");
  for (let i = 0; i < expected.length; i++) {
    if (i >= got.length) {
      throw new CsvError(`${path}: missing column ${expected[i]}`);
    }
    if (got[i] !== expected[i]) {
      throw new CsvError(`${path}: expected column ${expected[i]} at position ${i + 1}, found ${got[i]}`);
    }
  }
  if (got.length > expected.length) {
    throw new CsvError(`${path}: unexpected column ${got[expected.length]}`);
  }
}

function parseRows(path: string, expected: readonly string[]): string[][] {
  const lines = splitLines(readFileSync(path, "utf8"));
  if (lines.length === 0) {
    throw new CsvError(`${path}: empty file`);
  }
  checkHeader(lines[0]!, expected, path);
  return lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== expected.length) {
      throw new CsvError(`${path}: line ${i + 2}: expected ${expected.length} cells, found ${cells.length}`);
    }
    return cells;
  });
}

export function readResultsCsv(path: string): ResultRow[] {
  return parseRows(path, RESULT_COLUMNS).map((cells, i) => {
    const n = (col: number) => parseNumber(cells[col]!, RESULT_COLUMNS[col]!, i + 2);
    return {
      scheme: cells[0]!,
      axis_name: cells[1]!,
      axis_value: n(2),
      mean_se_bits: n(3),
      se_stderr: n(4),
      mean_ee: n(5),
      ee_stderr: n(6),
      mean_iters: n(7),
      mean_ms: n(8),
      n_ok: n(9),
      n_failed: n(10),
    };
  });
}

export function readTracesCsv(path: string): TraceRow[] {
  return parseRows(path, TRACE_COLUMNS).map((cells, i) => {
    const n = (col: number) => parseNumber(cells[col]!, TRACE_COLUMNS[col]!, i + 2);
    return {
      scheme: cells[0]!,
      axis_name: cells[1]!,
      axis_value: n(2),
      channel_index: n(3),
      iteration: n(4),
      se_bits: n(5),
    };
  });
}
