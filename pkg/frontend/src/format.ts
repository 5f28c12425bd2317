/** Display formatting. The dashboard never recomputes values: numbers are
 * shown exactly as serialized in the artifact JSON (shortest round-trip
 * form, which JSON.stringify reproduces for any parsed double). */
import type { SeriesPoint } from "./types.js";

export function num(value: number | null): string {
  return value === null ? "n/a" : JSON.stringify(value);
}

export function tooltipText(point: SeriesPoint): string {
  const rel = point.rel_pct === null ? "n/a" : `${num(point.rel_pct)}%`;
  return `${point.date}  raw ${num(point.raw)}  change ${rel}  n ${num(point.n)}`;
}

export function cloudTooltip(countLive: number, countBase: number): string {
  return `monitoring: ${num(countLive)}  baseline: ${num(countBase)}`;
}
