/** Dashboard bootstrap: load artifacts, keep one state container, repaint. */
import { renderCloud } from "./cloud.js";
import { type Dashboard, loadDashboard } from "./data.js";
import { renderLegend, renderSeries } from "./series.js";
import {
  initialState,
  isolateOnly,
  setHover,
  showAll,
  toggleSeries,
  type ViewState,
} from "./state.js";
import { ArtifactError } from "./types.js";

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

export function showErrorBanner(message: string): void {
  const banner = el("error-banner");
  banner.textContent = `Could not load dashboard data: ${message}`;
  banner.hidden = false;
}

function repaint(dashboard: Dashboard, state: ViewState): void {
  renderLegend(el("legend"), state, {
    onToggle: (key) => repaint(dashboard, toggleSeries(state, key)),
    onIsolate: (key) => repaint(dashboard, isolateOnly(state, key)),
    onShowAll: () => repaint(dashboard, showAll(state)),
  });
  renderSeries(el("chart"), dashboard.series, state, {
    onHover: (hover) => {
      state = setHover(state, hover);
    },
  });
  paintCloudControls(dashboard, state);
}

function paintCloudControls(dashboard: Dashboard, state: ViewState): void {
  const select = el("cloud-select") as HTMLSelectElement;
  const keys = [...dashboard.clouds.keys()].filter((k) => dashboard.clouds.get(k) !== null);
  const previous = select.value;
  select.textContent = "";
  for (const key of keys) {
    const option = document.createElement("option");
    option.value = key;
    option.textContent = key;
    select.appendChild(option);
  }
  if (keys.length === 0) {
    el("cloud").textContent = "No word clouds in this artifact set.";
    return;
  }
  select.value = keys.includes(previous) ? previous : keys[0]!;
  select.onchange = () => paintCloud(dashboard, select.value);
  paintCloud(dashboard, select.value);
}

function paintCloud(dashboard: Dashboard, key: string): void {
  const artifact = dashboard.clouds.get(key);
  if (artifact) renderCloud(el("cloud"), artifact);
}

export async function boot(base = "data"): Promise<void> {
  try {
    const dashboard = await loadDashboard(base);
    el("generated-at").textContent = `data generated ${dashboard.stats.generated_at}`;
    repaint(dashboard, initialState(dashboard.series));
  } catch (error) {
    const message = error instanceof ArtifactError ? error.message : String(error);
    showErrorBanner(message);
  }
}

if (typeof document !== "undefined" && document.getElementById("chart")) {
  void boot();
}
