/** Comparative word cloud: font size scales linearly with the artifact's
 * precomputed weight, color encodes the direction of change. Layout is a
 * simple centered flow; the weights themselves are never recomputed. */
import { cloudTooltip } from "./format.js";
import type { CloudArtifact } from "./types.js";

export const CLOUD_COLORS: Record<"increased" | "decreased", string> = {
  increased: "#c0392b",
  decreased: "#1b6ca8",
};

export const EMPTY_CLOUD_MESSAGE = "No terms pass the inclusion threshold.";

export interface FontScale {
  minPx: number;
  maxPx: number;
}

export const DEFAULT_FONT_SCALE: FontScale = { minPx: 13, maxPx: 46 };

export function fontSizePx(
  weight: number,
  minWeight: number,
  maxWeight: number,
  scale: FontScale = DEFAULT_FONT_SCALE,
): number {
  if (maxWeight <= minWeight) return scale.maxPx;
  const t = (weight - minWeight) / (maxWeight - minWeight);
  return scale.minPx + t * (scale.maxPx - scale.minPx);
}

export function renderCloud(
  root: HTMLElement,
  artifact: CloudArtifact,
  scale: FontScale = DEFAULT_FONT_SCALE,
): void {
  root.textContent = "";
  const doc = root.ownerDocument;

  const legend = doc.createElement("div");
  legend.className = "cloud-legend";
  for (const [direction, label] of [
    ["increased", "more frequent than baseline"],
    ["decreased", "less frequent than baseline"],
  ] as const) {
    const item = doc.createElement("span");
    item.className = "cloud-legend-item";
    const swatch = doc.createElement("span");
    swatch.className = "legend-swatch";
    swatch.setAttribute("data-direction", direction);
    swatch.style.background = CLOUD_COLORS[direction];
    item.appendChild(swatch);
    item.appendChild(doc.createTextNode(label));
    legend.appendChild(item);
  }
  root.appendChild(legend);

  if (artifact.entries.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "cloud-empty";
    empty.textContent = EMPTY_CLOUD_MESSAGE;
    root.appendChild(empty);
    return;
  }

  const weights = artifact.entries.map((e) => e.weight);
  const minWeight = Math.min(...weights);
  const maxWeight = Math.max(...weights);
  const box = doc.createElement("div");
  box.className = "cloud-box";
  const tooltip = doc.createElement("div");
  tooltip.className = "tooltip";
  tooltip.hidden = true;
  for (const entry of artifact.entries) {
    const term = doc.createElement("span");
    term.className = "cloud-term";
    term.textContent = entry.term;
    term.style.fontSize = `${fontSizePx(entry.weight, minWeight, maxWeight, scale)}px`;
    term.style.color = CLOUD_COLORS[entry.direction];
    term.setAttribute("data-direction", entry.direction);
    term.setAttribute("data-count-live", String(entry.count_live));
    term.setAttribute("data-count-base", String(entry.count_base));
    term.addEventListener("mouseenter", () => {
      tooltip.textContent = `${entry.term}  ${cloudTooltip(entry.count_live, entry.count_base)}`;
      tooltip.hidden = false;
    });
    term.addEventListener("mouseleave", () => {
      tooltip.hidden = true;
    });
    box.appendChild(term);
    box.appendChild(doc.createTextNode(" "));
  }
  root.appendChild(box);
  root.appendChild(tooltip);
}
