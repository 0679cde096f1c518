/**
 * Community benchmark CSV: the exact schema the CLI's export-community
 * command writes. Parsing is forgiving row-by-row (a malformed row is
 * skipped with a visible warning, never a hard failure), serialization
 * quotes only when needed.
 */

import { DashboardProject, METRIC_IDS, MetricValues } from "./types.js";

export const COMMUNITY_HEADER =
  "project,churn_rate,net_accumulation,cleanup_ratio,toggle_density,normalized_lifespan,snapshot_date";

export interface CsvParseResult {
  projects: DashboardProject[];
  snapshotDates: Record<string, string>;
  warnings: string[];
}

function splitCsvLine(line: string): string[] | null {
  const fields: string[] = [];
  let current = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          current += '"';
          i++;
        } else {
          quoted = false;
        }
      } else {
        current += ch;
      }
    } else if (ch === '"') {
      if (current.length > 0) return null; // quote in the middle of a bare field
      quoted = true;
    } else if (ch === ",") {
      fields.push(current);
      current = "";
    } else {
      current += ch;
    }
  }
  if (quoted) return null; // unterminated quote
  fields.push(current);
  return fields;
}

function parseMetricField(raw: string): number | null | undefined {
  const trimmed = raw.trim();
  if (trimmed === "") return null;
  const value = Number(trimmed);
  return Number.isFinite(value) ? value : undefined; // undefined = malformed
}

export function parseCommunityCsv(text: string): CsvParseResult {
  const result: CsvParseResult = { projects: [], snapshotDates: {}, warnings: [] };
  const lines = text.split(/\r?\n/).filter((line) => line.trim() !== "");
  if (lines.length === 0) {
    return result;
  }
  if (lines[0].trim() !== COMMUNITY_HEADER) {
    result.warnings.push("unexpected header row; expected the community CSV schema");
    return result;
  }
  lines.slice(1).forEach((line, rowIndex) => {
    const fields = splitCsvLine(line);
    if (fields === null || fields.length !== 7) {
      result.warnings.push(`row ${rowIndex + 2}: malformed row skipped`);
      return;
    }
    const name = fields[0].trim();
    if (!name) {
      result.warnings.push(`row ${rowIndex + 2}: empty project name, skipped`);
      return;
    }
    const metrics = {} as MetricValues;
    let bad = false;
    METRIC_IDS.forEach((metricId, index) => {
      const value = parseMetricField(fields[index + 1]);
      if (value === undefined) bad = true;
      else metrics[metricId] = value;
    });
    if (bad) {
      result.warnings.push(`row ${rowIndex + 2}: non-numeric metric value, skipped`);
      return;
    }
    if (METRIC_IDS.every((metricId) => metrics[metricId] === null)) {
      result.warnings.push(`row ${rowIndex + 2}: no metric values at all, skipped`);
      return;
    }
    result.projects.push({ name, metrics, source: "community-csv" });
    result.snapshotDates[name] = fields[6].trim();
  });
  return result;
}

function quoteField(raw: string): string {
  if (/[",\n]/.test(raw)) {
    return '"' + raw.replace(/"/g, '""') + '"';
  }
  return raw;
}

function formatMetric(value: number | null): string {
  if (value === null) return "";
  // mirrors the CLI's compact float format (shortest round-trip)
  return String(value);
}

export function serializeCommunityCsv(
  projects: DashboardProject[],
  snapshotDates: Record<string, string> = {},
): string {
  const lines = [COMMUNITY_HEADER];
  for (const project of projects) {
    const fields = [
      quoteField(project.name),
      ...METRIC_IDS.map((metricId) => formatMetric(project.metrics[metricId])),
      snapshotDates[project.name] ?? "",
    ];
    lines.push(fields.join(","));
  }
  return lines.join("\n") + "\n";
}

/** Form submissions append in memory; the grown CSV is offered as a download. */
export function appendProject(
  projects: DashboardProject[],
  addition: DashboardProject,
): DashboardProject[] {
  return [...projects, addition];
}
