#!/usr/bin/env node
/** CLI: render benchmark CSVs to SVG figures.
 *
 * Usage:
 *   node dist/plot.js --in a.csv,b.csv --x sketch_cols --y corr_err_avg --out fig.svg
 *
 * --x and --y accept comma-separated lists; with more than one
 * combination the output name gains a -<x>-<y> suffix per figure.
 * Nothing is written when the inputs are empty or malformed.
 */

import { readFile, writeFile } from "fs/promises";
import path from "path";
import process from "process";

import { parseMetricsCsv } from "./csv.js";
import { FigureSpec, renderFigure, XAxis, YAxis } from "./figure.js";

const X_CHOICES: XAxis[] = ["sketch_cols", "total_space_cols"];
const Y_CHOICES: YAxis[] = ["corr_err_avg", "corr_err_max"];

interface Args {
  inputs: string[];
  xs: XAxis[];
  ys: YAxis[];
  out: string;
}

export function parseArgs(argv: string[]): Args {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const val = argv[i + 1];
    if (!key.startsWith("--") || val === undefined) {
      throw new Error(`bad argument ${key}; expected --flag value pairs`);
    }
    flags.set(key.slice(2), val);
  }
  const input = flags.get("in");
  const out = flags.get("out");
  if (!input || !out) {
    throw new Error("--in and --out are required");
  }
  const xs = (flags.get("x") ?? "sketch_cols").split(",") as XAxis[];
  const ys = (flags.get("y") ?? "corr_err_avg").split(",") as YAxis[];
  for (const x of xs) {
    if (!X_CHOICES.includes(x)) throw new Error(`--x must be one of ${X_CHOICES.join(", ")}`);
  }
  for (const y of ys) {
    if (!Y_CHOICES.includes(y)) throw new Error(`--y must be one of ${Y_CHOICES.join(", ")}`);
  }
  return { inputs: input.split(","), xs, ys, out };
}

function outName(base: string, x: string, y: string, single: boolean): string {
  if (single) return base;
  const ext = path.extname(base) || ".svg";
  return base.slice(0, base.length - ext.length) + `-${x}-${y}` + ext;
}

export async function main(argv: string[]): Promise<number> {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const inputs = await Promise.all(
      args.inputs.map(async (p) => ({
        source: path.basename(p),
        rows: parseMetricsCsv(await readFile(p, "utf-8"), p),
      })),
    );
    const single = args.xs.length === 1 && args.ys.length === 1;
    for (const x of args.xs) {
      for (const y of args.ys) {
        const spec: FigureSpec = { inputs, xAxis: x, yAxis: y };
        const svg = renderFigure(spec);
        const target = outName(args.out, x, y, single);
        await writeFile(target, svg, "utf-8");
        console.log(`wrote ${target}`);
      }
    }
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && path.basename(process.argv[1]).startsWith("plot")) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
