import { mkdtempSync, writeFileSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { CsvError, RESULT_COLUMNS, readResultsCsv, readTracesCsv } from "../src/csv.js";

const FIXTURES = join(__dirname, "fixtures");

function tempCsv(content: string): string {
  const dir = mkdtempSync(join(tmpdir(), "figures-"));
  const path = join(dir, "results.csv");
  writeFileSync(path, content);
  return path;
}

const HEADER = RESULT_COLUMNS.join(",");
const ROW = "dbf-wf,bits,1.0,5.5,0.1,2.0,0.05,9.0,0.0,2,0";

describe("results parser", () => {
  it("reads a harness fixture", () => {
    const rows = readResultsCsv(join(FIXTURES, "snr", "results.csv"));
    expect(rows.length).toBe(9);
    expect(rows[0]!.scheme).toBe("dbf-proposed");
    expect(rows[0]!.axis_name).toBe("snr_db");
    expect(rows.every((r) => Number.isFinite(r.mean_se_bits))).toBe(true);
  });

  it("names a missing column", () => {
    const noEe = HEADER.split(",").filter((c) => c !== "mean_ee").join(",");
    expect(() => readResultsCsv(tempCsv(`${noEe}\n`))).toThrow(/mean_ee/);
  });

  it("names an unexpected column", () => {
    expect(() => readResultsCsv(tempCsv(`${HEADER},wall_clock\n`))).toThrow(/wall_clock/);
  });

  it("rejects a misordered header", () => {
    const swapped = HEADER.replace("scheme,axis_name", "axis_name,scheme");
    expect(() => readResultsCsv(tempCsv(`${swapped}\n`))).toThrow(CsvError);
  });

  it("rejects an empty file", () => {
    expect(() => readResultsCsv(tempCsv(""))).toThrow(/empty/);
  });

  it("rejects a malformed number, naming column and line", () => {
    const bad = ROW.replace("5.5", "fast");
    expect(() => readResultsCsv(tempCsv(`${HEADER}\n${bad}\n`))).toThrow(/line 2.*mean_se_bits.*fast/);
  });

  it("rejects a short row", () => {
    expect(() => readResultsCsv(tempCsv(`${HEADER}\ndbf-wf,bits,1.0\n`))).toThrow(/line 2/);
  });

  it("parses nan cells as NaN", () => {
    const failed = "dbf-wf,bits,1.0,nan,nan,nan,nan,nan,nan,0,2";
    const rows = readResultsCsv(tempCsv(`${HEADER}\n${failed}\n`));
    expect(Number.isNaN(rows[0]!.mean_se_bits)).toBe(true);
    expect(rows[0]!.n_failed).toBe(2);
  });

  it("round-trips every numeric cell exactly", () => {
    const path = join(FIXTURES, "bits", "results.csv");
    const lines = readFileSync(path, "utf8").trim().split("\n").slice(1);
    const rows = readResultsCsv(path);
    lines.forEach((line, i) => {
      const cells = line.split(",");
      expect(rows[i]!.axis_value).toBe(Number(cells[2]));
      expect(rows[i]!.mean_se_bits).toBe(Number(cells[3]));
      expect(rows[i]!.mean_ee).toBe(Number(cells[5]));
    });
  });
});

describe("traces parser", () => {
  it("reads the harness trace fixture", () => {
    const rows = readTracesCsv(join(FIXTURES, "bits", "traces.csv"));
    expect(rows.length).toBeGreaterThan(0);
    expect(rows[0]!.iteration).toBe(1);
    expect(rows.every((r) => Number.isFinite(r.se_bits))).toBe(true);
  });

  it("rejects a results file passed as traces", () => {
    expect(() => readTracesCsv(join(FIXTURES, "snr", "results.csv"))).toThrow(CsvError);
  });
});
