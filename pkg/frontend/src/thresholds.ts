/**
 * Zone classification, kept bit-identical to the CLI's `assess` command.
 *
 * Zones are half-open intervals [min, max) with null for unbounded ends, so
 * every finite value lands in exactly one zone. The threshold table itself is
 * always loaded from the shared thresholds.json artifact, never re-hardcoded
 * here, so the page and the CLI cannot drift apart.
 */

import {
  METRIC_IDS,
  MetricId,
  MetricValues,
  NOT_ASSESSABLE,
  ThresholdTable,
  ZoneDef,
} from "./types.js";

export function parseThresholds(jsonText: string): ThresholdTable {
  const raw = JSON.parse(jsonText) as Record<string, ZoneDef[]>;
  for (const metricId of METRIC_IDS) {
    const zones = raw[metricId];
    if (!Array.isArray(zones) || zones.length === 0) {
      throw new Error(`thresholds file is missing zones for ${metricId}`);
    }
    const ordered = [...zones].sort(
      (a, b) => (a.min ?? -Infinity) - (b.min ?? -Infinity),
    );
    if (ordered[0].min !== null || ordered[ordered.length - 1].max !== null) {
      throw new Error(`zones for ${metricId} must be unbounded at both ends`);
    }
    for (let i = 0; i + 1 < ordered.length; i++) {
      if (ordered[i].max !== ordered[i + 1].min) {
        throw new Error(`zones for ${metricId} must be contiguous`);
      }
    }
    raw[metricId] = ordered;
  }
  return raw as ThresholdTable;
}

export function zoneContains(zone: ZoneDef, value: number): boolean {
  if (zone.min !== null && value < zone.min) return false;
  if (zone.max !== null && value >= zone.max) return false;
  return true;
}

export function classifyZone(
  table: ThresholdTable,
  metricId: MetricId,
  value: number | null,
): { zone: string; description: string } {
  if (value === null || !Number.isFinite(value)) {
    return { zone: NOT_ASSESSABLE, description: "metric value undefined" };
  }
  for (const zone of table[metricId]) {
    if (zoneContains(zone, value)) {
      return { zone: zone.zone, description: zone.description };
    }
  }
  throw new Error(`no zone contains ${value} for ${metricId}`);
}

export type Profile = "Conservative" | "Aggressive" | "Mixed";

export interface AssessmentResult {
  zones: Record<MetricId, string>;
  descriptions: Record<MetricId, string>;
  profile: Profile;
}

/** Same archetype rule as the CLI: see `assess` in the main tool. */
export function assessValues(
  table: ThresholdTable,
  values: MetricValues,
): AssessmentResult {
  const zones = {} as Record<MetricId, string>;
  const descriptions = {} as Record<MetricId, string>;
  for (const metricId of METRIC_IDS) {
    const { zone, description } = classifyZone(table, metricId, values[metricId]);
    zones[metricId] = zone;
    descriptions[metricId] = description;
  }

  let profile: Profile;
  if (!values.churn) {
    profile = "Mixed"; // no activity at all: nothing to profile
  } else if (
    zones.churn === "Low" &&
    zones.density === "Conservative" &&
    zones.net_accumulation === "Sustainable"
  ) {
    profile = "Conservative";
  } else if (
    zones.churn === "High" &&
    (zones.density === "Moderate" || zones.density === "Aggressive")
  ) {
    profile = "Aggressive";
  } else {
    profile = "Mixed";
  }
  return { zones, descriptions, profile };
}
