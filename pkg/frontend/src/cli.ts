#!/usr/bin/env node
/**
 * rumorcut-plots: render figures from the engine's CSV outputs.
 *
 *   rumorcut-plots --kind curves --input run/curves.csv --label original \
 *                  --input mitigated/curves.csv --label mitigated --out fig.svg
 *   rumorcut-plots --kind bars --input eval/report.csv --out bars.svg
 *
 * Output format is inferred from the extension (.svg). Exits nonzero with a
 * one-line JSON error on schema mismatches.
 */

import { writeFileSync } from "fs";
import { basename, extname } from "path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { SchemaError, loadBarGroup, loadCurveSeries } from "./csv.js";
import { renderBars, renderCurves } from "./figures.js";

export interface PlotArgs {
  kind: "curves" | "bars";
  input: string[];
  label: string[];
  out: string;
}

export function runPlot(args: PlotArgs): void {
  if (args.input.length === 0) {
    throw new SchemaError("at least one --input is required");
  }
  if (extname(args.out).toLowerCase() !== ".svg") {
    throw new SchemaError(`unsupported output format '${extname(args.out)}'; use .svg`);
  }
  const labels = args.input.map(
    (path, i) => args.label[i] ?? basename(path, extname(path)),
  );
  let svg: string;
  if (args.kind === "curves") {
    svg = renderCurves(args.input.map((path, i) => loadCurveSeries(path, labels[i])));
  } else {
    svg = renderBars(args.input.map((path, i) => loadBarGroup(path, labels[i])));
  }
  writeFileSync(args.out, svg, "utf-8");
}

export function main(argv: string[]): number {
  const parsed = yargs(argv)
    .option("kind", { choices: ["curves", "bars"] as const, demandOption: true })
    .option("input", { type: "string", array: true, demandOption: true })
    .option("label", { type: "string", array: true, default: [] as string[] })
    .option("out", { type: "string", demandOption: true })
    .strict()
    .exitProcess(false)
    .parseSync();
  try {
    runPlot({
      kind: parsed.kind,
      input: parsed.input,
      label: parsed.label,
      out: parsed.out,
    });
    console.log(`wrote ${parsed.out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(JSON.stringify({ error: err.message }));
      return 1;
    }
    throw err;
  }
}

const invokedDirectly = process.argv[1] !== undefined
  && import.meta.url.endsWith(basename(process.argv[1]));
if (invokedDirectly) {
  process.exit(main(hideBin(process.argv)));
}
