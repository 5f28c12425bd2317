"""Pipeline configuration loaded from a TOML file.

Top-level keys hold shared settings; one ``[sources.<platform>]`` table per
data source. Relative paths are resolved against the config file's
directory. Defaults: batch_size 25, min_count 10, workers 4, timezone
Europe/Vienna, schedule 07:00.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from zoneinfo import ZoneInfo

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .ingest import PLATFORMS

SOURCE_KINDS = ("liveticker", "tsv", "aggregate")
_SCHEDULE_RE = re.compile(r"^([01]\d|2[0-3]):([0-5]\d)$")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SourceConfig:
    name: str
    kind: str
    baseline_start: date
    baseline_end: date
    monitor_start: date
    endpoint: str | None = None
    path: Path | None = None
    topic: str | None = None
    lexicon_dir: Path | None = None
    exclusions: Path | None = None
    metric: str = "mean_post_frequency"
    baseline_mode: str = "weekday"


@dataclass(frozen=True)
class PipelineConfig:
    sources: dict[str, SourceConfig]
    output_dir: Path
    publish_dir: Path
    data_dir: Path
    timezone: str = "Europe/Vienna"
    schedule: str = "07:00"
    batch_size: int = 25
    workers: int = 4
    min_count: int = 10
    author_salt: str = ""
    monitor_end: date | None = None
    refetch_days: int = 0
    post_publish_hook: str | None = None

    @property
    def tz(self) -> ZoneInfo:
        return ZoneInfo(self.timezone)

    def schedule_time(self) -> tuple[int, int]:
        m = _SCHEDULE_RE.match(self.schedule)
        if not m:
            raise ConfigError(f"invalid schedule time {self.schedule!r}, expected HH:MM")
        return int(m.group(1)), int(m.group(2))


def _as_date(value: object, key: str) -> date:
    if isinstance(value, date):
        return value
    if isinstance(value, str):
        try:
            return date.fromisoformat(value)
        except ValueError:
            pass
    raise ConfigError(f"{key}: expected a date, got {value!r}")


def _as_path(base: Path, value: object, key: str) -> Path:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"{key}: expected a path string, got {value!r}")
    path = Path(value)
    return path if path.is_absolute() else base / path


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    base = path.resolve().parent
    with path.open("rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc

    sources_raw = raw.get("sources")
    if not isinstance(sources_raw, dict) or not sources_raw:
        raise ConfigError("config needs at least one [sources.<platform>] table")
    sources: dict[str, SourceConfig] = {}
    for name, table in sources_raw.items():
        if name not in PLATFORMS:
            raise ConfigError(f"sources.{name}: unknown platform (expected one of {PLATFORMS})")
        kind = table.get("kind")
        if kind not in SOURCE_KINDS:
            raise ConfigError(f"sources.{name}.kind: expected one of {SOURCE_KINDS}")
        baseline_start = _as_date(table.get("baseline_start"), f"sources.{name}.baseline_start")
        baseline_end = _as_date(table.get("baseline_end"), f"sources.{name}.baseline_end")
        monitor_start = _as_date(table.get("monitor_start"), f"sources.{name}.monitor_start")
        if baseline_start > baseline_end:
            raise ConfigError(f"sources.{name}: baseline period start is after its end")
        if baseline_end >= monitor_start:
            raise ConfigError(
                f"sources.{name}: baseline period must end before monitoring starts"
            )
        metric = table.get("metric", "proportion_matching" if kind == "aggregate" else "mean_post_frequency")
        if metric not in ("mean_post_frequency", "proportion_matching"):
            raise ConfigError(f"sources.{name}.metric: unknown metric {metric!r}")
        if kind == "aggregate" and metric != "proportion_matching":
            raise ConfigError(f"sources.{name}: aggregate feeds only support proportion_matching")
        baseline_mode = table.get("baseline_mode", "weekday")
        if baseline_mode not in ("weekday", "global"):
            raise ConfigError(f"sources.{name}.baseline_mode: expected weekday or global")
        endpoint = table.get("endpoint")
        feed_path = table.get("path")
        if kind == "liveticker" and not endpoint:
            raise ConfigError(f"sources.{name}: liveticker sources need an endpoint")
        if kind in ("tsv", "aggregate") and not feed_path:
            raise ConfigError(f"sources.{name}: {kind} sources need a path")
        lexicon_dir = table.get("lexicon_dir")
        if kind != "aggregate" and not lexicon_dir:
            raise ConfigError(f"sources.{name}: text sources need a lexicon_dir")
        exclusions = table.get("exclusions")
        sources[name] = SourceConfig(
            name=name,
            kind=kind,
            endpoint=endpoint,
            path=_as_path(base, feed_path, f"sources.{name}.path") if feed_path else None,
            topic=table.get("topic"),
            lexicon_dir=_as_path(base, lexicon_dir, f"sources.{name}.lexicon_dir") if lexicon_dir else None,
            exclusions=_as_path(base, exclusions, f"sources.{name}.exclusions") if exclusions else None,
            baseline_start=baseline_start,
            baseline_end=baseline_end,
            monitor_start=monitor_start,
            metric=metric,
            baseline_mode=baseline_mode,
        )

    timezone = raw.get("timezone", "Europe/Vienna")
    try:
        ZoneInfo(timezone)
    except Exception as exc:
        raise ConfigError(f"timezone: unknown zone {timezone!r}") from exc

    cfg = PipelineConfig(
        sources=sources,
        output_dir=_as_path(base, raw.get("output_dir", "out"), "output_dir"),
        publish_dir=_as_path(base, raw.get("publish_dir", "public"), "publish_dir"),
        data_dir=_as_path(base, raw.get("data_dir", "data"), "data_dir"),
        timezone=timezone,
        schedule=str(raw.get("schedule", "07:00")),
        batch_size=int(raw.get("batch_size", 25)),
        workers=int(raw.get("workers", 4)),
        min_count=int(raw.get("min_count", 10)),
        author_salt=str(raw.get("author_salt", "")),
        monitor_end=_as_date(raw["monitor_end"], "monitor_end") if "monitor_end" in raw else None,
        refetch_days=int(raw.get("refetch_days", 0)),
        post_publish_hook=raw.get("post_publish_hook"),
    )
    if cfg.batch_size < 1:
        raise ConfigError("batch_size must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.min_count < 1:
        raise ConfigError("min_count must be >= 1")
    cfg.schedule_time()  # validates
    return cfg
