/** Self-assessment form logic: field parsing and live zone badges. */

import { assessValues } from "./thresholds.js";
import {
  METRIC_IDS,
  MetricId,
  MetricValues,
  NOT_ASSESSABLE,
  ThresholdTable,
} from "./types.js";

export interface FieldParse {
  value: number | null;
  error: string | null;
}

/** Blank means "not assessable"; anything non-numeric is an inline error. */
export function parseMetricInput(raw: string): FieldParse {
  const trimmed = raw.trim();
  if (trimmed === "") {
    return { value: null, error: null };
  }
  const value = Number(trimmed);
  if (!Number.isFinite(value)) {
    return { value: null, error: "enter a number" };
  }
  return { value, error: null };
}

export interface BadgeModel {
  metricId: MetricId;
  value: number | null;
  zone: string;
  description: string;
  error: string | null;
}

export interface FormAssessment {
  badges: BadgeModel[];
  profile: string;
}

export function assessForm(
  table: ThresholdTable,
  rawFields: Record<MetricId, string>,
): FormAssessment {
  const values = {} as MetricValues;
  const errors = {} as Record<MetricId, string | null>;
  for (const metricId of METRIC_IDS) {
    const parsed = parseMetricInput(rawFields[metricId] ?? "");
    values[metricId] = parsed.value;
    errors[metricId] = parsed.error;
  }
  const assessment = assessValues(table, values);
  const badges = METRIC_IDS.map((metricId) => ({
    metricId,
    value: values[metricId],
    zone: errors[metricId] ? NOT_ASSESSABLE : assessment.zones[metricId],
    description: errors[metricId] ? "" : assessment.descriptions[metricId],
    error: errors[metricId],
  }));
  return { badges, profile: assessment.profile };
}
