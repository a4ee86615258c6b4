/**
 * CSV loading and schema validation for the engine's documented outputs.
 *
 * Curve files need step / cumulative_fraction / infectious columns; bar
 * files are either mitigation reports (method, mitigation_pct) or ablation
 * tables (ablation, mean_mitigation_pct, delta_pct_vs_none). Extra columns
 * are fine; a missing required column fails naming the column.
 */

import { readFileSync } from "fs";
import Papa from "papaparse";

export class SchemaError extends Error {}

export interface CurvePoint {
  step: number;
  cumulative_fraction: number;
  infectious: number;
}

export interface CurveSeries {
  label: string;
  points: CurvePoint[];
}

export interface Bar {
  label: string;
  value: number;
}

export interface BarGroup {
  label: string;
  bars: Bar[];
}

function parseRows(path: string): Record<string, string>[] {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch {
    throw new SchemaError(`cannot read input file: ${path}`);
  }
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new SchemaError(`${path}: malformed CSV (${first.message})`);
  }
  return parsed.data;
}

function requireColumns(path: string, rows: Record<string, string>[], columns: string[]): void {
  if (rows.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
  const present = Object.keys(rows[0]);
  for (const column of columns) {
    if (!present.includes(column)) {
      throw new SchemaError(`${path}: missing required column '${column}'`);
    }
  }
}

function toNumber(path: string, row: Record<string, string>, column: string): number {
  const value = Number(row[column]);
  if (!Number.isFinite(value)) {
    throw new SchemaError(`${path}: non-numeric value '${row[column]}' in column '${column}'`);
  }
  return value;
}

export function loadCurveSeries(path: string, label: string): CurveSeries {
  const rows = parseRows(path);
  requireColumns(path, rows, ["step", "cumulative_fraction", "infectious"]);
  const points = rows.map((row) => ({
    step: toNumber(path, row, "step"),
    cumulative_fraction: toNumber(path, row, "cumulative_fraction"),
    infectious: toNumber(path, row, "infectious"),
  }));
  return { label, points };
}

/** Accepts a mitigation report (per-source rows) or an ablation table. */
export function loadBarGroup(path: string, label: string): BarGroup {
  const rows = parseRows(path);
  const present = Object.keys(rows[0]);
  if (present.includes("mitigation_pct")) {
    requireColumns(path, rows, ["method", "source_raw", "mitigation_pct"]);
    return {
      label,
      bars: rows.map((row) => ({
        label: `${row.method}:${row.source_raw}`,
        value: toNumber(path, row, "mitigation_pct"),
      })),
    };
  }
  if (present.includes("delta_pct_vs_none")) {
    requireColumns(path, rows, ["ablation", "delta_pct_vs_none"]);
    return {
      label,
      bars: rows.map((row) => ({
        label: row.ablation,
        value: toNumber(path, row, "delta_pct_vs_none"),
      })),
    };
  }
  throw new SchemaError(
    `${path}: expected a mitigation report (mitigation_pct) or ablation table (delta_pct_vs_none)`,
  );
}
