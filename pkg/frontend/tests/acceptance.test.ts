/** Acceptance gate for the dashboard, run entirely against the committed
 * fixture artifacts (no network access to the pipeline). */
import { describe, expect, it } from "vitest";

import { EMPTY_CLOUD_MESSAGE, renderCloud } from "../src/cloud.js";
import { renderSeries, seriesSegments } from "../src/series.js";
import { initialState, isolateOnly } from "../src/state.js";
import { checkCloudArtifact } from "../src/types.js";
import { fixtureSeries, readArtifact, readArtifactText } from "./helpers.js";

describe("acceptance: committed fixture artifacts", () => {
  const artifacts = fixtureSeries();

  function render(state: ReturnType<typeof initialState>) {
    const root = document.createElement("div");
    document.body.appendChild(root);
    renderSeries(root, artifacts, state);
    return root;
  }

  it("hover tooltip values byte-match the artifact JSON", () => {
    const raw = readArtifactText("series/liveticker.json");
    const liveticker = artifacts.find((a) => a.platform === "liveticker")!;
    let checked = 0;
    for (const category of liveticker.categories) {
      const target = category.points.find((p) => p.rel_pct !== null);
      if (!target) continue;
      const key = `liveticker:${category.category}`;
      const root = render(isolateOnly(initialState(artifacts), key));
      const dot = root.querySelector(`circle[data-date="${target.date}"]`)!;
      dot.dispatchEvent(new Event("mouseenter"));
      const text = (root.querySelector(".tooltip") as HTMLElement).textContent!;
      for (const [label, value] of [
        ["raw", target.raw],
        ["change", target.rel_pct],
        ["n", target.n],
      ] as const) {
        const token = JSON.stringify(value);
        expect(raw).toContain(token); // the serialization reproduces the bytes
        expect(text).toContain(`${label} ${token}`);
      }
      checked += 1;
    }
    expect(checked).toBeGreaterThan(0);
  });

  it("isolating one series hides all others", () => {
    const state = isolateOnly(initialState(artifacts), "studentchat:posemo");
    const root = render(state);
    const keys = [...root.querySelectorAll("g[data-series]")].map((g) =>
      g.getAttribute("data-series"),
    );
    expect(keys).toEqual(["studentchat:posemo"]);
  });

  it("null relative points render as gaps", () => {
    const liveticker = artifacts.find((a) => a.platform === "liveticker")!;
    const anxiety = liveticker.categories.find((c) => c.category === "anxiety")!;
    const flagged = anxiety.points.filter((p) => p.rel_pct === null);
    expect(flagged.length).toBeGreaterThan(0);
    const root = render(isolateOnly(initialState(artifacts), "liveticker:anxiety"));
    for (const point of flagged) {
      expect(root.querySelector(`circle[data-date="${point.date}"]`)).toBeNull();
    }
    expect(root.querySelectorAll("polyline.series-line").length).toBe(
      seriesSegments(anxiety.points).length,
    );
  });

  it("an empty cloud shows the placeholder message", () => {
    const posemo = checkCloudArtifact(readArtifact("clouds/liveticker/posemo.json"));
    expect(posemo.entries.length).toBe(0);
    const root = document.createElement("div");
    renderCloud(root, posemo);
    expect(root.querySelector(".cloud-empty")!.textContent).toBe(EMPTY_CLOUD_MESSAGE);
  });
});
