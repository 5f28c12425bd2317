/** SVG time-series chart: one line per isolated (platform, category) pair,
 * y = percentage change against the weekday baseline. Days with a null
 * rel_pct break the line into segments (gaps, never zeros). */
import { tooltipText } from "./format.js";
import type { HoverTarget, ViewState } from "./state.js";
import { seriesKey } from "./state.js";
import type { SeriesArtifact, SeriesPoint } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ChartGeometry {
  width: number;
  height: number;
  padLeft: number;
  padRight: number;
  padTop: number;
  padBottom: number;
}

export const DEFAULT_GEOMETRY: ChartGeometry = {
  width: 860,
  height: 360,
  padLeft: 56,
  padRight: 16,
  padTop: 12,
  padBottom: 28,
};

const PALETTE = [
  "#1b6ca8", "#c0392b", "#2d7d46", "#8e44ad", "#d4810b",
  "#16647e", "#a8326e", "#5d6d1e", "#555555", "#7aa6c2",
  "#e08477", "#76b38a", "#b58fc9", "#e3b04b", "#68a0ab",
];

export function seriesColor(state: ViewState, key: string): string {
  const index = state.available.indexOf(key);
  return PALETTE[(index >= 0 ? index : 0) % PALETTE.length]!;
}

/** Consecutive runs of points with a numeric rel_pct; null points split. */
export function seriesSegments(points: readonly SeriesPoint[]): SeriesPoint[][] {
  const segments: SeriesPoint[][] = [];
  let current: SeriesPoint[] = [];
  for (const point of points) {
    if (point.rel_pct === null) {
      if (current.length) segments.push(current);
      current = [];
    } else {
      current.push(point);
    }
  }
  if (current.length) segments.push(current);
  return segments;
}

interface Visible {
  key: string;
  color: string;
  points: SeriesPoint[];
}

function visibleSeries(artifacts: readonly SeriesArtifact[], state: ViewState): Visible[] {
  const result: Visible[] = [];
  for (const artifact of artifacts) {
    for (const cat of artifact.categories) {
      const key = seriesKey(artifact.platform, cat.category);
      if (!state.isolation.has(key)) continue;
      const points = cat.points.filter(
        (p) => p.date >= state.range[0] && p.date <= state.range[1],
      );
      result.push({ key, color: seriesColor(state, key), points });
    }
  }
  return result;
}

export interface SeriesHandlers {
  onHover?: (target: HoverTarget | null) => void;
}

export function renderSeries(
  root: HTMLElement,
  artifacts: readonly SeriesArtifact[],
  state: ViewState,
  handlers: SeriesHandlers = {},
  geometry: ChartGeometry = DEFAULT_GEOMETRY,
): void {
  root.textContent = "";
  const doc = root.ownerDocument;
  const visible = visibleSeries(artifacts, state);
  const dates = [...new Set(visible.flatMap((s) => s.points.map((p) => p.date)))].sort();
  if (dates.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "chart-empty";
    empty.textContent = "No series selected.";
    root.appendChild(empty);
    return;
  }
  const rels = visible.flatMap((s) =>
    s.points.map((p) => p.rel_pct).filter((v): v is number => v !== null),
  );
  const lo = Math.min(0, ...rels);
  const hi = Math.max(0, ...rels);
  const spanY = hi - lo || 1;
  const { width, height, padLeft, padRight, padTop, padBottom } = geometry;
  const plotW = width - padLeft - padRight;
  const plotH = height - padTop - padBottom;
  const x = (date: string) =>
    padLeft + (dates.length === 1 ? plotW / 2 : (dates.indexOf(date) / (dates.length - 1)) * plotW);
  const y = (rel: number) => padTop + (1 - (rel - lo) / spanY) * plotH;

  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.setAttribute("role", "img");
  svg.classList.add("series-chart");

  // zero line
  const zero = doc.createElementNS(SVG_NS, "line");
  zero.classList.add("zero-line");
  zero.setAttribute("x1", String(padLeft));
  zero.setAttribute("x2", String(width - padRight));
  zero.setAttribute("y1", String(y(0)));
  zero.setAttribute("y2", String(y(0)));
  svg.appendChild(zero);

  const zeroLabel = doc.createElementNS(SVG_NS, "text");
  zeroLabel.classList.add("axis-label");
  zeroLabel.setAttribute("x", String(padLeft - 6));
  zeroLabel.setAttribute("y", String(y(0) + 4));
  zeroLabel.setAttribute("text-anchor", "end");
  zeroLabel.textContent = "0%";
  svg.appendChild(zeroLabel);

  for (const edge of [dates[0]!, dates[dates.length - 1]!]) {
    const label = doc.createElementNS(SVG_NS, "text");
    label.classList.add("axis-label");
    label.setAttribute("x", String(x(edge)));
    label.setAttribute("y", String(height - 8));
    label.setAttribute("text-anchor", "middle");
    label.textContent = edge;
    svg.appendChild(label);
  }

  const tooltip = doc.createElement("div");
  tooltip.className = "tooltip";
  tooltip.hidden = true;

  for (const series of visible) {
    const group = doc.createElementNS(SVG_NS, "g");
    group.setAttribute("data-series", series.key);
    for (const segment of seriesSegments(series.points)) {
      const line = doc.createElementNS(SVG_NS, "polyline");
      line.classList.add("series-line");
      line.setAttribute("stroke", series.color);
      line.setAttribute(
        "points",
        segment.map((p) => `${x(p.date)},${y(p.rel_pct as number)}`).join(" "),
      );
      group.appendChild(line);
    }
    for (const point of series.points) {
      if (point.rel_pct === null) continue; // gap: no marker, no number invented
      const dot = doc.createElementNS(SVG_NS, "circle");
      dot.classList.add("series-point");
      dot.setAttribute("cx", String(x(point.date)));
      dot.setAttribute("cy", String(y(point.rel_pct)));
      dot.setAttribute("r", "3.5");
      dot.setAttribute("fill", series.color);
      dot.setAttribute("data-series", series.key);
      dot.setAttribute("data-date", point.date);
      dot.addEventListener("mouseenter", () => {
        tooltip.textContent = `${series.key}  ${tooltipText(point)}`;
        tooltip.hidden = false;
        tooltip.style.left = `${x(point.date) + 8}px`;
        tooltip.style.top = `${y(point.rel_pct as number) - 8}px`;
        handlers.onHover?.({ series: series.key, date: point.date });
      });
      dot.addEventListener("mouseleave", () => {
        tooltip.hidden = true;
        handlers.onHover?.(null);
      });
      group.appendChild(dot);
    }
    svg.appendChild(group);
  }

  root.appendChild(svg);
  root.appendChild(tooltip);
}

export interface LegendHandlers {
  onToggle: (key: string) => void;
  onIsolate: (key: string) => void;
  onShowAll: () => void;
}

export function renderLegend(
  root: HTMLElement,
  state: ViewState,
  handlers: LegendHandlers,
): void {
  root.textContent = "";
  const doc = root.ownerDocument;
  for (const key of state.available) {
    const item = doc.createElement("span");
    item.className = "legend-item";
    const toggle = doc.createElement("button");
    toggle.className = "legend-toggle";
    toggle.setAttribute("data-series", key);
    toggle.setAttribute("aria-pressed", state.isolation.has(key) ? "true" : "false");
    const swatch = doc.createElement("span");
    swatch.className = "legend-swatch";
    swatch.style.background = seriesColor(state, key);
    toggle.appendChild(swatch);
    toggle.appendChild(doc.createTextNode(key));
    toggle.addEventListener("click", () => handlers.onToggle(key));
    const only = doc.createElement("button");
    only.className = "legend-only";
    only.setAttribute("data-isolate", key);
    only.textContent = "only";
    only.addEventListener("click", () => handlers.onIsolate(key));
    item.appendChild(toggle);
    item.appendChild(only);
    root.appendChild(item);
  }
  const all = doc.createElement("button");
  all.className = "legend-all";
  all.textContent = "show all";
  all.addEventListener("click", () => handlers.onShowAll());
  root.appendChild(all);
}
