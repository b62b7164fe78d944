/** Parsing for the benchmark metrics CSV.
 *
 * The schema is fixed by the benchmark runner; anything else is rejected
 * with the name of the first offending column. Values are kept as the raw
 * strings from the file so plotted points can be diffed byte-for-byte
 * against their source.
 */

export const SCHEMA = [
  "step",
  "algorithm",
  "level_used",
  "sketch_cols",
  "total_space_cols",
  "corr_err",
  "update_time_us",
] as const;

export type Column = (typeof SCHEMA)[number];

export interface MetricsRow {
  /** raw cell text per column, exactly as written by the runner */
  raw: Record<Column, string>;
  step: string;
  algorithm: string;
}

export class CsvError extends Error {}

export function parseMetricsCsv(text: string, source = "csv"): MetricsRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new CsvError(`${source}: empty file`);
  }
  const header = lines[0].split(",");
  for (let i = 0; i < SCHEMA.length; i++) {
    if (header[i] !== SCHEMA[i]) {
      throw new CsvError(
        `${source}: expected column ${i + 1} to be "${SCHEMA[i]}", got "${header[i] ?? ""}"`,
      );
    }
  }
  if (header.length !== SCHEMA.length) {
    throw new CsvError(`${source}: unexpected extra column "${header[SCHEMA.length]}"`);
  }
  const rows: MetricsRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== SCHEMA.length) {
      throw new CsvError(`${source}: line ${i + 1} has ${cells.length} cells`);
    }
    const raw = Object.fromEntries(SCHEMA.map((c, j) => [c, cells[j]])) as Record<
      Column,
      string
    >;
    rows.push({ raw, step: raw.step, algorithm: raw.algorithm });
  }
  if (rows.length === 0) {
    throw new CsvError(`${source}: no data rows`);
  }
  return rows;
}
