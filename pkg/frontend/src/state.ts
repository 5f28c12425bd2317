/** Immutable view state; every update returns a new state object.
 *
 * The isolation set is the subset of available series currently drawn; it
 * can never contain a series the artifacts do not provide, and the visible
 * date range is clamped to the data extent.
 */
import type { SeriesArtifact } from "./types.js";

export interface HoverTarget {
  series: string;
  date: string;
}

export interface ViewState {
  readonly available: readonly string[];
  readonly platforms: readonly string[];
  readonly categories: readonly string[];
  readonly extent: readonly [string, string];
  readonly range: readonly [string, string];
  readonly isolation: ReadonlySet<string>;
  readonly hover: HoverTarget | null;
}

export function seriesKey(platform: string, category: string): string {
  return `${platform}:${category}`;
}

export function initialState(artifacts: readonly SeriesArtifact[]): ViewState {
  const available: string[] = [];
  const platforms = new Set<string>();
  const categories = new Set<string>();
  const dates: string[] = [];
  for (const artifact of artifacts) {
    platforms.add(artifact.platform);
    for (const cat of artifact.categories) {
      categories.add(cat.category);
      available.push(seriesKey(artifact.platform, cat.category));
      for (const point of cat.points) dates.push(point.date);
    }
  }
  dates.sort();
  const extent: [string, string] =
    dates.length > 0 ? [dates[0]!, dates[dates.length - 1]!] : ["", ""];
  return {
    available,
    platforms: [...platforms].sort(),
    categories: [...categories].sort(),
    extent,
    range: extent,
    isolation: new Set(available),
    hover: null,
  };
}

export function toggleSeries(state: ViewState, key: string): ViewState {
  if (!state.available.includes(key)) return state;
  const isolation = new Set(state.isolation);
  if (isolation.has(key)) {
    isolation.delete(key);
  } else {
    isolation.add(key);
  }
  return { ...state, isolation };
}

export function isolateOnly(state: ViewState, key: string): ViewState {
  if (!state.available.includes(key)) return state;
  return { ...state, isolation: new Set([key]) };
}

export function showAll(state: ViewState): ViewState {
  return { ...state, isolation: new Set(state.available) };
}

export function setRange(state: ViewState, start: string, end: string): ViewState {
  const [lo, hi] = state.extent;
  const clamp = (value: string) => (value < lo ? lo : value > hi ? hi : value);
  let from = clamp(start);
  let to = clamp(end);
  if (from > to) [from, to] = [to, from];
  return { ...state, range: [from, to] };
}

export function setHover(state: ViewState, hover: HoverTarget | null): ViewState {
  return { ...state, hover };
}
