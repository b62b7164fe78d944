/** SVG figure construction.
 *
 * Each (input file, algorithm) pair contributes one point per requested
 * metric, taken verbatim from that run's summary row (`mean` row for
 * corr_err_avg, `max` row for corr_err_max). Points carry their raw CSV
 * strings as data attributes so a reader can re-extract and diff them
 * against the source file.
 */

import { Column, MetricsRow } from "./csv.js";

export type XAxis = "sketch_cols" | "total_space_cols";
export type YAxis = "corr_err_avg" | "corr_err_max";

export interface FigureSpec {
  inputs: { source: string; rows: MetricsRow[] }[];
  xAxis: XAxis;
  yAxis: YAxis;
}

export interface Point {
  algorithm: string;
  x: string; // raw CSV text
  y: string;
  source: string;
}

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 70, right: 20, top: 20, bottom: 50 };

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

export function extractPoints(spec: FigureSpec): Point[] {
  const want = spec.yAxis === "corr_err_avg" ? "mean" : "max";
  const points: Point[] = [];
  for (const input of spec.inputs) {
    for (const row of input.rows) {
      if (row.step !== want) continue;
      points.push({
        algorithm: row.algorithm,
        x: row.raw[spec.xAxis],
        y: row.raw.corr_err,
        source: input.source,
      });
    }
  }
  return points;
}

function groupByAlgorithm(points: Point[]): Map<string, Point[]> {
  const groups = new Map<string, Point[]>();
  for (const p of points) {
    const list = groups.get(p.algorithm) ?? [];
    list.push(p);
    groups.set(p.algorithm, list);
  }
  for (const list of groups.values()) {
    list.sort((a, b) => Number(a.x) - Number(b.x));
  }
  return new Map([...groups.entries()].sort(([a], [b]) => (a < b ? -1 : 1)));
}

interface Scale {
  (v: number): number;
  ticks: number[];
  log: boolean;
}

function makeScale(values: number[], range: [number, number], log: boolean): Scale {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (log) {
    lo = Math.log10(lo);
    hi = Math.log10(hi);
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const f = ((v: number) => {
    const t = ((log ? Math.log10(v) : v) - lo) / (hi - lo);
    return range[0] + t * (range[1] - range[0]);
  }) as Scale;
  f.log = log;
  f.ticks = [];
  if (log) {
    for (let e = Math.ceil(lo); e <= Math.floor(hi); e++) f.ticks.push(10 ** e);
    if (f.ticks.length === 0) f.ticks.push(10 ** ((lo + hi) / 2));
  } else {
    const n = 5;
    for (let i = 0; i <= n; i++) f.ticks.push(lo + ((hi - lo) * i) / n);
  }
  return f;
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/"/g, "&quot;");

const fmtTick = (v: number) =>
  v !== 0 && (Math.abs(v) < 1e-3 || Math.abs(v) >= 1e4) ? v.toExponential(0) : String(Number(v.toPrecision(3)));

/** Render the figure; y-axis is log-scaled unless a value is <= 0. */
export function renderFigure(spec: FigureSpec): string {
  const points = extractPoints(spec);
  if (points.length === 0) {
    throw new Error(
      `no summary rows (step=${spec.yAxis === "corr_err_avg" ? "mean" : "max"}) in inputs`,
    );
  }
  const xs = points.map((p) => Number(p.x));
  const ys = points.map((p) => Number(p.y));
  const logY = ys.every((v) => v > 0);
  const sx = makeScale(xs, [MARGIN.left, WIDTH - MARGIN.right], false);
  const sy = makeScale(ys, [HEIGHT - MARGIN.bottom, MARGIN.top], logY);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // axes
  const x0 = MARGIN.left;
  const y0 = HEIGHT - MARGIN.bottom;
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${WIDTH - MARGIN.right}" y2="${y0}" stroke="black"/>`);
  parts.push(`<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" stroke="black"/>`);
  for (const t of sx.ticks) {
    const px = sx(t);
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 4}" stroke="black"/>`);
    parts.push(`<text x="${px}" y="${y0 + 18}" text-anchor="middle">${fmtTick(t)}</text>`);
  }
  for (const t of sy.ticks) {
    const py = sy(t);
    parts.push(`<line x1="${x0 - 4}" y1="${py}" x2="${x0}" y2="${py}" stroke="black"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${py + 4}" text-anchor="end">${fmtTick(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + WIDTH - MARGIN.right) / 2}" y="${HEIGHT - 12}" text-anchor="middle">${esc(spec.xAxis)}</text>`,
  );
  parts.push(
    `<text x="16" y="${(MARGIN.top + y0) / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${(MARGIN.top + y0) / 2})">${esc(spec.yAxis)}${logY ? " (log)" : ""}</text>`,
  );

  // one curve per algorithm
  const groups = groupByAlgorithm(points);
  let ci = 0;
  let legendY = MARGIN.top + 8;
  for (const [algorithm, pts] of groups) {
    const color = PALETTE[ci % PALETTE.length];
    ci += 1;
    if (pts.length > 1) {
      const path = pts.map((p) => `${sx(Number(p.x))},${sy(Number(p.y))}`).join(" ");
      parts.push(
        `<polyline points="${path}" fill="none" stroke="${color}" stroke-width="1.5"/>`,
      );
    }
    for (const p of pts) {
      parts.push(
        `<circle cx="${sx(Number(p.x))}" cy="${sy(Number(p.y))}" r="4" fill="${color}" ` +
          `data-algorithm="${esc(p.algorithm)}" data-x="${esc(p.x)}" data-y="${esc(p.y)}" ` +
          `data-source="${esc(p.source)}"/>`,
      );
    }
    parts.push(
      `<rect x="${WIDTH - 170}" y="${legendY - 9}" width="10" height="10" fill="${color}"/>`,
    );
    parts.push(`<text x="${WIDTH - 155}" y="${legendY}">${esc(algorithm)}</text>`);
    legendY += 16;
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

/** Pull the plotted points back out of a rendered SVG (for verification). */
export function pointsFromSvg(svg: string): Point[] {
  const out: Point[] = [];
  const re =
    /<circle[^>]*data-algorithm="([^"]*)"[^>]*data-x="([^"]*)"[^>]*data-y="([^"]*)"[^>]*data-source="([^"]*)"/g;
  let m: RegExpExecArray | null;
  while ((m = re.exec(svg)) !== null) {
    out.push({ algorithm: m[1], x: m[2], y: m[3], source: m[4] });
  }
  return out;
}
