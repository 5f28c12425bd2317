/** Artifact schema as produced by the pipeline, plus the compatibility gate. */

export const SUPPORTED_SCHEMA_VERSION = 1;

export interface SeriesPoint {
  date: string;
  raw: number;
  baseline: number | null;
  rel_pct: number | null;
  n: number;
}

export interface CategorySeries {
  category: string;
  metric: string;
  points: SeriesPoint[];
}

export interface SeriesArtifact {
  schema_version: number;
  platform: string;
  generated_at: string;
  categories: CategorySeries[];
}

export interface CloudEntry {
  term: string;
  weight: number;
  direction: "increased" | "decreased";
  count_live: number;
  count_base: number;
}

export interface CloudArtifact {
  schema_version: number;
  platform: string;
  category: string;
  min_count: number;
  generated_at: string;
  entries: CloudEntry[];
}

export interface StatsArtifact {
  schema_version: number;
  generated_at: string;
  platforms: Record<string, unknown>;
}

export class ArtifactError extends Error {}

function fail(context: string, detail: string): never {
  throw new ArtifactError(`${context}: ${detail}`);
}

function gate(context: string, raw: Record<string, unknown>): void {
  if (raw.schema_version !== SUPPORTED_SCHEMA_VERSION) {
    fail(
      context,
      `schema_version ${String(raw.schema_version)} is not supported ` +
        `(expected ${SUPPORTED_SCHEMA_VERSION})`,
    );
  }
}

function asObject(context: string, raw: unknown): Record<string, unknown> {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    fail(context, "not a JSON object");
  }
  return raw as Record<string, unknown>;
}

export function checkSeriesArtifact(raw: unknown, context = "series artifact"): SeriesArtifact {
  const doc = asObject(context, raw);
  gate(context, doc);
  if (typeof doc.platform !== "string") fail(context, "missing platform");
  if (!Array.isArray(doc.categories)) fail(context, "missing categories array");
  for (const cat of doc.categories) {
    const c = asObject(context, cat);
    if (typeof c.category !== "string") fail(context, "category without name");
    if (!Array.isArray(c.points)) fail(context, `category ${String(c.category)} has no points`);
    for (const point of c.points) {
      const p = asObject(context, point);
      if (typeof p.date !== "string") fail(context, "point without date");
      if (typeof p.raw !== "number") fail(context, `point ${String(p.date)} without raw value`);
      if (p.rel_pct !== null && typeof p.rel_pct !== "number") {
        fail(context, `point ${String(p.date)} has a malformed rel_pct`);
      }
      if (typeof p.n !== "number") fail(context, `point ${String(p.date)} without n`);
    }
  }
  return doc as unknown as SeriesArtifact;
}

export function checkCloudArtifact(raw: unknown, context = "cloud artifact"): CloudArtifact {
  const doc = asObject(context, raw);
  gate(context, doc);
  if (typeof doc.category !== "string") fail(context, "missing category");
  if (!Array.isArray(doc.entries)) fail(context, "missing entries array");
  for (const entry of doc.entries) {
    const e = asObject(context, entry);
    if (typeof e.term !== "string") fail(context, "entry without term");
    if (typeof e.weight !== "number" || e.weight < 0) fail(context, `entry ${String(e.term)} has a bad weight`);
    if (e.direction !== "increased" && e.direction !== "decreased") {
      fail(context, `entry ${String(e.term)} has a bad direction`);
    }
  }
  return doc as unknown as CloudArtifact;
}

export function checkStatsArtifact(raw: unknown, context = "stats artifact"): StatsArtifact {
  const doc = asObject(context, raw);
  gate(context, doc);
  if (typeof doc.platforms !== "object" || doc.platforms === null) {
    fail(context, "missing platforms");
  }
  return doc as unknown as StatsArtifact;
}
