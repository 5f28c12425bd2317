import { readFileSync, readdirSync, existsSync } from "node:fs";
import { join, resolve } from "node:path";

import { checkSeriesArtifact, type SeriesArtifact } from "../src/types.js";

// vitest runs with the frontend directory as cwd; jsdom mangles
// import.meta.url, so resolve relative to the process instead
export const DATA_DIR = resolve("fixtures/data");

export function readArtifactText(relative: string): string {
  return readFileSync(join(DATA_DIR, relative), "utf-8");
}

export function readArtifact(relative: string): unknown {
  return JSON.parse(readArtifactText(relative));
}

export function fixtureSeries(): SeriesArtifact[] {
  const dir = join(DATA_DIR, "series");
  return readdirSync(dir)
    .sort()
    .map((name) => checkSeriesArtifact(JSON.parse(readFileSync(join(dir, name), "utf-8"))));
}

/** fetch stub serving the committed fixture artifacts from disk. */
export function installFixtureFetch(
  overrides: Record<string, unknown> = {},
): void {
  globalThis.fetch = (async (input: RequestInfo | URL) => {
    const url = String(input);
    const relative = url.replace(/^data\//, "");
    if (relative in overrides) {
      return new Response(JSON.stringify(overrides[relative]), { status: 200 });
    }
    const path = join(DATA_DIR, relative);
    if (!existsSync(path)) {
      return new Response("not found", { status: 404 });
    }
    return new Response(readFileSync(path, "utf-8"), { status: 200 });
  }) as typeof fetch;
}
