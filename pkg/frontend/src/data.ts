/** Artifact loading against the pipeline's static layout:
 * series/<platform>.json, clouds/<platform>/<category>.json, stats.json. */
import {
  ArtifactError,
  checkCloudArtifact,
  checkSeriesArtifact,
  checkStatsArtifact,
  type CloudArtifact,
  type SeriesArtifact,
  type StatsArtifact,
} from "./types.js";

export interface Dashboard {
  stats: StatsArtifact;
  series: SeriesArtifact[];
  /** platform:category -> cloud, or null when the platform has no clouds */
  clouds: Map<string, CloudArtifact | null>;
}

async function fetchJson(base: string, path: string): Promise<unknown | null> {
  const response = await fetch(`${base}/${path}`);
  if (response.status === 404) return null;
  if (!response.ok) {
    throw new ArtifactError(`${path}: HTTP ${response.status}`);
  }
  try {
    return await response.json();
  } catch {
    throw new ArtifactError(`${path}: not valid JSON`);
  }
}

export async function loadDashboard(base: string): Promise<Dashboard> {
  const statsRaw = await fetchJson(base, "stats.json");
  if (statsRaw === null) throw new ArtifactError("stats.json: missing");
  const stats = checkStatsArtifact(statsRaw, "stats.json");
  const platforms = Object.keys(stats.platforms).sort();
  const series: SeriesArtifact[] = [];
  const clouds = new Map<string, CloudArtifact | null>();
  for (const platform of platforms) {
    const raw = await fetchJson(base, `series/${platform}.json`);
    if (raw === null) continue;
    const artifact = checkSeriesArtifact(raw, `series/${platform}.json`);
    series.push(artifact);
    for (const cat of artifact.categories) {
      const path = `clouds/${platform}/${cat.category}.json`;
      const cloudRaw = await fetchJson(base, path);
      clouds.set(
        `${platform}:${cat.category}`,
        cloudRaw === null ? null : checkCloudArtifact(cloudRaw, path),
      );
    }
  }
  return { stats, series, clouds };
}
