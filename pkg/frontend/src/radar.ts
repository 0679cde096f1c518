/**
 * Radar chart geometry and SVG rendering (no chart library, no canvas).
 *
 * Axis normalization is zone-indexed: a value maps to (zone index + fraction
 * within the zone) / zone count, where zones are ordered center-outward along
 * each axis's "badness" orientation. For four metrics larger is further out;
 * the cleanup-ratio axis is reversed because its healthy zone is the
 * high-value end. Unbounded outer/inner zones use the middle zone's width as
 * the fraction scale, clamped to the ring.
 */

import {
  DashboardProject,
  METRIC_IDS,
  METRIC_LABELS,
  MetricId,
  ThresholdTable,
} from "./types.js";
import { zoneContains } from "./thresholds.js";

const REVERSED_AXES: ReadonlySet<MetricId> = new Set(["cleanup_ratio"]);

const clamp01 = (x: number) => Math.max(0, Math.min(1, x));

/** Normalized radius in [0, 1]; null when the metric is missing. */
export function axisRadius(
  table: ThresholdTable,
  metricId: MetricId,
  value: number | null,
): number | null {
  if (value === null || !Number.isFinite(value)) return null;
  const ascending = table[metricId];
  const reversed = REVERSED_AXES.has(metricId);
  const centerOut = reversed ? [...ascending].reverse() : ascending;
  const index = centerOut.findIndex((z) => zoneContains(z, value));
  if (index < 0) return null;
  const zone = centerOut[index];
  const middle = centerOut[1];
  const ref = Math.abs((middle.max as number) - (middle.min as number)) || 1;

  // badness coordinate: grows toward the rim on every axis
  const b = reversed ? -value : value;
  const lo = reversed ? negate(zone.max) : zone.min; // center-side edge
  const hi = reversed ? negate(zone.min) : zone.max; // rim-side edge

  let fraction: number;
  if (lo !== null && hi !== null) {
    fraction = (b - lo) / (hi - lo);
  } else if (lo === null && hi !== null) {
    fraction = 1 - Math.min((hi - b) / ref, 1); // innermost zone, open toward center
  } else if (lo !== null) {
    fraction = Math.min((b - lo) / ref, 1); // outermost zone, open toward rim
  } else {
    fraction = 0.5;
  }
  return (index + clamp01(fraction)) / centerOut.length;
}

function negate(bound: number | null): number | null {
  return bound === null ? null : -bound;
}

export interface RadarPoint {
  metricId: MetricId;
  radius: number;
  x: number;
  y: number;
}

export interface RadarPolygon {
  project: DashboardProject;
  points: RadarPoint[];
  missing: MetricId[];
}

const axisAngle = (index: number) =>
  -Math.PI / 2 + (index * 2 * Math.PI) / METRIC_IDS.length;

export function computePolygon(
  table: ThresholdTable,
  project: DashboardProject,
  scale = 1,
): RadarPolygon {
  const points: RadarPoint[] = [];
  const missing: MetricId[] = [];
  METRIC_IDS.forEach((metricId, index) => {
    const radius = axisRadius(table, metricId, project.metrics[metricId]);
    if (radius === null) {
      missing.push(metricId);
      return;
    }
    const angle = axisAngle(index);
    points.push({
      metricId,
      radius,
      x: Math.cos(angle) * radius * scale,
      y: Math.sin(angle) * radius * scale,
    });
  });
  return { project, points, missing };
}

const PALETTE = ["#2b7bba", "#e08a1e", "#3a9d5d", "#d1495b", "#7d5ba6", "#4a4a4a"];

const fmt = (x: number) => (Math.round(x * 100) / 100).toString();

/** Full radar SVG: rings, axes, labels and one polygon per project. */
export function renderRadarSvg(
  table: ThresholdTable,
  projects: DashboardProject[],
  size = 460,
): string {
  const center = size / 2;
  const rim = size / 2 - 64;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${size} ${size}" role="img" aria-label="metric radar">`,
  ];

  for (const ring of [1 / 3, 2 / 3, 1]) {
    parts.push(
      `<circle cx="${center}" cy="${center}" r="${fmt(rim * ring)}" fill="none" stroke="#c8c8c8" stroke-width="1"/>`,
    );
  }
  METRIC_IDS.forEach((metricId, index) => {
    const angle = axisAngle(index);
    const x = center + Math.cos(angle) * rim;
    const y = center + Math.sin(angle) * rim;
    parts.push(
      `<line x1="${center}" y1="${center}" x2="${fmt(x)}" y2="${fmt(y)}" stroke="#c8c8c8" stroke-width="1"/>`,
    );
    const lx = center + Math.cos(angle) * (rim + 14);
    const ly = center + Math.sin(angle) * (rim + 14);
    const anchor = Math.abs(Math.cos(angle)) < 0.3 ? "middle" : Math.cos(angle) > 0 ? "start" : "end";
    parts.push(
      `<text x="${fmt(lx)}" y="${fmt(ly)}" text-anchor="${anchor}" font-size="11" fill="#333">${METRIC_LABELS[metricId]}</text>`,
    );
  });

  projects.forEach((project, index) => {
    const color = PALETTE[index % PALETTE.length];
    const polygon = computePolygon(table, project, rim);
    if (polygon.points.length === 0) return;
    const coords = polygon.points
      .map((p) => `${fmt(center + p.x)},${fmt(center + p.y)}`)
      .join(" ");
    if (polygon.points.length === 1) {
      // degenerate single-metric project: draw the lone spoke point
      const p = polygon.points[0];
      parts.push(
        `<circle cx="${fmt(center + p.x)}" cy="${fmt(center + p.y)}" r="4" fill="${color}"><title>${project.name}: only one metric present</title></circle>`,
      );
    } else {
      parts.push(
        `<polygon points="${coords}" fill="${color}" fill-opacity="0.15" stroke="${color}" stroke-width="2"><title>${project.name}</title></polygon>`,
      );
    }
    polygon.points.forEach((p) => {
      parts.push(
        `<circle cx="${fmt(center + p.x)}" cy="${fmt(center + p.y)}" r="2.5" fill="${color}"/>`,
      );
    });
  });

  parts.push("</svg>");
  return parts.join("\n");
}
