"""Daily routine: fetch, match, aggregate, export, publish.

Each run appends new posts to the store, re-matches only what is new,
regenerates all exports from scratch (cheap at this scale, and it makes
incremental runs provably equal to a full recomputation), archives the
artifact set under ``out/archive/run-NNNNNN/`` and atomically repoints the
publish directory symlink at it. The publish directory therefore always
holds one complete, internally consistent artifact set; rollback just
repoints the symlink at an older retained archive.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import shlex
import subprocess
import threading
import time as _time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from datetime import date, datetime, time, timedelta, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from mimetypes import guess_type
from pathlib import Path
from typing import Callable, Iterator, Sequence

from .config import PipelineConfig, SourceConfig
from .ingest import (
    LivetickerClient,
    NewsItem,
    Post,
    format_rfc3339,
    hash_author,
    ingest_aggregates,
    ingest_tsv,
    parse_rfc3339,
)
from .lexicon import Lexicon, apply_exclusions, compile_matcher, load_exclusions, load_lexicon
from .metrics import (
    IndicatorSeries,
    PlatformStats,
    SeriesPoint,
    aggregate_platform_stats,
    aggregate_values,
    compute_baseline,
    daily_values,
    descriptive_stats,
    relative_series,
)
from . import store as store_mod
from .store import PostStore
from .wordcloud import cloud_weights, term_stats

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class PipelineError(Exception):
    pass


class LockHeld(PipelineError):
    def __init__(self, path: Path, pid: int):
        super().__init__(f"lock {path} held by live process {pid}")
        self.path = path
        self.pid = pid


# ---------------------------------------------------------------------------
# clocks

class Clock:
    """Injectable time source so tests can simulate days in milliseconds."""

    def now(self) -> datetime:
        raise NotImplementedError

    def sleep(self, seconds: float) -> None:
        raise NotImplementedError


class SystemClock(Clock):
    def now(self) -> datetime:
        return datetime.now(timezone.utc)

    def sleep(self, seconds: float) -> None:
        _time.sleep(seconds)


class SimulatedClock(Clock):
    def __init__(self, start: datetime):
        if start.tzinfo is None:
            raise ValueError("simulated clock needs an aware start time")
        self._now = start.astimezone(timezone.utc)

    def now(self) -> datetime:
        return self._now

    def sleep(self, seconds: float) -> None:
        self._now += timedelta(seconds=seconds)

    def advance_to(self, instant: datetime) -> None:
        self._now = instant.astimezone(timezone.utc)


# ---------------------------------------------------------------------------
# locking

def _pid_alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True


@contextmanager
def file_lock(path: Path) -> Iterator[None]:
    """Exclusive pid lock file; stale locks of dead processes are stolen."""
    path.parent.mkdir(parents=True, exist_ok=True)
    while True:
        try:
            fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            os.write(fd, str(os.getpid()).encode("ascii"))
            os.close(fd)
            break
        except FileExistsError:
            try:
                pid = int(path.read_text() or "0")
            except (ValueError, FileNotFoundError):
                pid = 0
            if pid and _pid_alive(pid):
                raise LockHeld(path, pid)
            log.warning("removing stale lock %s (pid %s)", path, pid)
            try:
                path.unlink()
            except FileNotFoundError:
                pass
    try:
        yield
    finally:
        try:
            path.unlink()
        except FileNotFoundError:
            pass


# ---------------------------------------------------------------------------
# run ledger

def _runs_path(output_dir: Path) -> Path:
    return output_dir / "runs.json"


def load_ledger(output_dir: Path) -> list[dict]:
    path = _runs_path(output_dir)
    if not path.exists():
        return []
    return json.loads(path.read_text(encoding="utf-8"))["runs"]


def _append_ledger(output_dir: Path, entry: dict) -> bytes:
    runs = load_ledger(output_dir)
    if runs and entry["run_id"] <= max(r["run_id"] for r in runs):
        raise PipelineError("ledger run ids must strictly increase")
    runs.append(entry)
    return store_mod.write_json_atomic(
        _runs_path(output_dir), {"schema_version": SCHEMA_VERSION, "runs": runs}
    )


def _next_run_id(output_dir: Path) -> int:
    runs = load_ledger(output_dir)
    return (max((r["run_id"] for r in runs), default=0)) + 1


# ---------------------------------------------------------------------------
# source ingestion

def _anonymize(posts: Sequence[Post], salt: str) -> list[Post]:
    if not salt:
        return list(posts)
    return [
        Post(
            platform=p.platform,
            id=p.id,
            created_at=p.created_at,
            text=p.text,
            author=hash_author(p.author, salt) if p.author else None,
            parent_item=p.parent_item,
        )
        for p in posts
    ]


def ingest_source(
    cfg: PipelineConfig,
    source: SourceConfig,
    store: PostStore,
    clock: Clock | None = None,
) -> dict:
    """Pull one source into the store; returns ledger counters for it.

    Liveticker sources are incremental: only items missing from the
    fetched-items index (or published within ``refetch_days`` of now) are
    fetched, each item all-or-nothing. Feed sources are re-read fully and
    de-duplicated by the store.
    """
    clock = clock or SystemClock()
    stats = {"items_seen": 0, "items_fetched": 0, "posts_added": 0, "errors": []}
    if source.kind == "tsv":
        posts = _anonymize(ingest_tsv(source.path), cfg.author_salt)
        stats["posts_added"] = store.append(posts)
        return stats
    if source.kind == "aggregate":
        rows = ingest_aggregates(source.path)
        stats["items_seen"] = len(rows)
        return stats

    client = LivetickerClient(source.endpoint, batch_size=cfg.batch_size)
    predicate = (lambda url: source.topic in url) if source.topic else None
    refs = client.discover_tickers(predicate)
    index = dict(store.load_fetched_index(source.name))
    refetch_after = clock.now() - timedelta(days=cfg.refetch_days)
    to_fetch: list[NewsItem] = []
    for ref in refs:
        items = client.fetch_news_items(ref)
        stats["items_seen"] += len(items)
        for item in items:
            if item.id in index and not (
                cfg.refetch_days > 0 and item.published_at >= refetch_after
            ):
                continue
            to_fetch.append(item)

    # politeness serializes live hosts anyway; only loopback fixture hosts
    # are worth fetching with several workers
    workers = cfg.workers if client.min_interval == 0 else 1
    local = threading.local()

    def fetch_one(item: NewsItem) -> tuple[NewsItem, list[Post]]:
        worker = getattr(local, "client", None)
        if worker is None:
            worker = LivetickerClient(source.endpoint, batch_size=cfg.batch_size)
            local.client = worker
        return item, worker.fetch_posts(item.id, platform=source.name)

    lock = threading.Lock()
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for future in [pool.submit(fetch_one, item) for item in to_fetch]:
            try:
                item, posts = future.result()
            except Exception as exc:
                stats["errors"].append(f"item fetch failed: {exc}")
                continue
            posts = _anonymize(posts, cfg.author_salt)
            with lock:
                stats["posts_added"] += store.append(posts)
                stats["items_fetched"] += 1
                # item timestamps keep sub-second precision (first-post
                # latency medians depend on it); posts stay at seconds
                index[item.id] = {
                    "ticker": item.ticker_id,
                    "published_at": item.published_at.isoformat().replace("+00:00", "Z"),
                    "first_post_at": (
                        item.first_post_at.isoformat().replace("+00:00", "Z")
                        if item.first_post_at
                        else None
                    ),
                    "posts": len(posts),
                }
                store.save_fetched_index(source.name, index)
    return stats


def _items_from_index(store: PostStore, source: SourceConfig) -> list[NewsItem]:
    items = []
    for item_id, row in sorted(store.load_fetched_index(source.name).items()):
        items.append(
            NewsItem(
                id=item_id,
                ticker_id=row.get("ticker", ""),
                published_at=parse_rfc3339(row["published_at"]),
                first_post_at=parse_rfc3339(row["first_post_at"]) if row.get("first_post_at") else None,
            )
        )
    return items


# ---------------------------------------------------------------------------
# exports

def _load_source_lexicon(source: SourceConfig) -> Lexicon:
    paths = sorted(Path(source.lexicon_dir).glob("*.txt"))
    lexicon = load_lexicon(paths)
    if source.exclusions:
        lexicon, _ = apply_exclusions(lexicon, load_exclusions(source.exclusions))
    return lexicon


def _monitor_window(cfg: PipelineConfig, source: SourceConfig, clock: Clock) -> tuple[date, date]:
    # small collection delay: analyze through the end of the previous day
    end = cfg.monitor_end or (clock.now().astimezone(cfg.tz).date() - timedelta(days=1))
    return source.monitor_start, max(end, source.monitor_start)


def _series_for(
    values: Sequence, source: SourceConfig, window: tuple[date, date]
) -> IndicatorSeries:
    current = [v for v in values if window[0] <= v.date <= window[1]]
    baseline_values = [
        v for v in values if source.baseline_start <= v.date <= source.baseline_end
    ]
    if baseline_values:
        baseline = compute_baseline(
            baseline_values, (source.baseline_start, source.baseline_end),
            mode=source.baseline_mode,
        )
        return relative_series(current, baseline)
    log.warning(
        "%s: no data inside baseline period %s..%s, emitting flagged points",
        source.name, source.baseline_start, source.baseline_end,
    )
    points = tuple(
        SeriesPoint(date=v.date, raw=v.value, baseline=None, rel_pct=None, n_posts=v.n_posts)
        for v in sorted(current, key=lambda v: v.date)
    )
    category = current[0].category if current else "unknown"
    metric = current[0].metric if current else source.metric
    return IndicatorSeries(category=category, metric=metric, points=points)


def _series_payload(series: Sequence[IndicatorSeries]) -> list[dict]:
    return [
        {
            "category": s.category,
            "metric": s.metric,
            "points": [
                {
                    "date": p.date.isoformat(),
                    "raw": p.raw,
                    "baseline": p.baseline,
                    "rel_pct": p.rel_pct,
                    "n": p.n_posts,
                }
                for p in s.points
            ],
        }
        for s in series
    ]


def _stats_payload(stats: PlatformStats, window: tuple[date, date]) -> dict:
    return {
        "window": [window[0].isoformat(), window[1].isoformat()],
        "post_count": stats.post_count,
        "mean_posts_per_day": stats.mean_posts_per_day,
        "unique_authors": stats.unique_authors,
        "match_fraction": dict(sorted(stats.match_fraction.items())),
        "median_char_length": stats.median_char_length,
        "median_first_post_latency_s": stats.median_first_post_latency_s,
        "posts_per_item_mean": stats.posts_per_item_mean,
        "posts_per_item_sd": stats.posts_per_item_sd,
    }


def _dump(payload: dict) -> bytes:
    return (json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1) + "\n").encode("utf-8")


def build_exports(
    cfg: PipelineConfig,
    store: PostStore,
    clock: Clock | None = None,
    sections: Sequence[str] = ("series", "clouds", "stats"),
) -> dict[str, bytes]:
    """Build all artifact files (relative path -> bytes), deterministically.

    The only run-dependent field is ``generated_at``; everything else is a
    pure function of the stored data and configuration.
    """
    clock = clock or SystemClock()
    generated_at = format_rfc3339(clock.now())
    artifacts: dict[str, bytes] = {}
    stats_platforms: dict[str, dict] = {}

    for name in sorted(cfg.sources):
        source = cfg.sources[name]
        window = _monitor_window(cfg, source, clock)

        if source.kind == "aggregate":
            rows = ingest_aggregates(source.path)
            categories = sorted({r.category for r in rows})
            series_list = []
            for category in categories:
                values = aggregate_values([r for r in rows if r.category == category])
                series_list.append(_series_for(values, source, window))
            if "series" in sections:
                artifacts[f"series/{name}.json"] = _dump(
                    {
                        "schema_version": SCHEMA_VERSION,
                        "platform": name,
                        "generated_at": generated_at,
                        "categories": _series_payload(series_list),
                    }
                )
            if "stats" in sections:
                stats_platforms[name] = _stats_payload(
                    aggregate_platform_stats(rows, window=window), window
                )
            continue

        lexicon = _load_source_lexicon(source)
        matcher = compile_matcher(lexicon)
        posts = store.load(name)
        cache = store.load_match_cache(name, lexicon)
        missing = [p for p in posts if p.id not in cache]
        for post in missing:
            cache[post.id] = matcher.match(post.text)
        if missing:
            store.save_match_cache(name, lexicon, cache)
        pairs = [(p, cache[p.id]) for p in posts]
        categories = sorted(lexicon.categories)

        if "series" in sections:
            series_list = [
                _series_for(
                    daily_values(pairs, category, source.metric, cfg.tz),
                    source,
                    window,
                )
                for category in categories
            ]
            artifacts[f"series/{name}.json"] = _dump(
                {
                    "schema_version": SCHEMA_VERSION,
                    "platform": name,
                    "generated_at": generated_at,
                    "categories": _series_payload(series_list),
                }
            )

        in_window = [
            (p, mr) for p, mr in pairs
            if window[0] <= p.created_at.astimezone(cfg.tz).date() <= window[1]
        ]
        if "clouds" in sections:
            in_baseline = [
                (p, mr) for p, mr in pairs
                if source.baseline_start <= p.created_at.astimezone(cfg.tz).date() <= source.baseline_end
            ]
            for category in categories:
                live = term_stats((mr for _, mr in in_window), category, "live")
                base = term_stats((mr for _, mr in in_baseline), category, "baseline")
                entries = cloud_weights(live, base, cfg.min_count)
                artifacts[f"clouds/{name}/{category}.json"] = _dump(
                    {
                        "schema_version": SCHEMA_VERSION,
                        "platform": name,
                        "category": category,
                        "min_count": cfg.min_count,
                        "generated_at": generated_at,
                        "entries": [
                            {
                                "term": e.entry.surface,
                                "weight": e.weight,
                                "direction": e.direction,
                                "count_live": e.count_live,
                                "count_base": e.count_base,
                            }
                            for e in entries
                        ],
                    }
                )

        if "stats" in sections:
            items_by_platform = None
            if source.kind == "liveticker":
                items = [
                    item for item in _items_from_index(store, source)
                    if window[0] <= item.published_at.astimezone(cfg.tz).date() <= window[1]
                ]
                items_by_platform = {name: items}
            table = descriptive_stats(
                [p for p, _ in in_window],
                [mr for _, mr in in_window],
                items_by_platform,
                window=window,
            )
            platform_stats = table.platforms.get(name)
            if platform_stats is None:
                platform_stats = PlatformStats(
                    post_count=0, mean_posts_per_day=0.0, unique_authors=None,
                    match_fraction={}, median_char_length=None,
                    median_first_post_latency_s=None, posts_per_item_mean=None,
                    posts_per_item_sd=None,
                )
            stats_platforms[name] = _stats_payload(platform_stats, window)

    if "stats" in sections:
        artifacts["stats.json"] = _dump(
            {
                "schema_version": SCHEMA_VERSION,
                "generated_at": generated_at,
                "platforms": stats_platforms,
            }
        )
    return artifacts


def refresh_exports(
    cfg: PipelineConfig,
    clock: Clock | None = None,
    sections: Sequence[str] = ("series", "clouds", "stats"),
) -> list[str]:
    """Recompute and write the chosen artifact sections into output_dir."""
    store = PostStore(cfg.data_dir)
    artifacts = build_exports(cfg, store, clock, sections=sections)
    for rel in sorted(artifacts):
        store_mod.write_bytes_atomic(cfg.output_dir / rel, artifacts[rel])
    return sorted(artifacts)


# ---------------------------------------------------------------------------
# publication

def _archive_dir(cfg: PipelineConfig, run_id: int) -> Path:
    return cfg.output_dir / "archive" / f"run-{run_id:06d}"


def _publish(cfg: PipelineConfig, target: Path) -> None:
    """Atomically point the publish directory symlink at ``target``."""
    publish = cfg.publish_dir
    publish.parent.mkdir(parents=True, exist_ok=True)
    if publish.exists() and not publish.is_symlink():
        raise PipelineError(
            f"{publish} exists and is not a symlink; refusing to manage it"
        )
    tmp = publish.with_name(publish.name + ".swap")
    if tmp.is_symlink() or tmp.exists():
        tmp.unlink()
    os.symlink(target.resolve(), tmp)
    os.replace(tmp, publish)


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def run_daily(
    cfg: PipelineConfig,
    clock: Clock | None = None,
    scheduled_for: datetime | None = None,
) -> dict:
    """One full pipeline run; returns the new ledger entry.

    Sources fail independently (the run is marked partial); export or
    publication failure leaves the previous publication untouched and
    records a failed run.
    """
    clock = clock or SystemClock()
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    cfg.data_dir.mkdir(parents=True, exist_ok=True)
    with file_lock(cfg.data_dir / "run.lock"):
        run_id = _next_run_id(cfg.output_dir)
        previous = run_id - 1 if run_id > 1 else None
        started_at = format_rfc3339(clock.now())
        store = PostStore(cfg.data_dir)
        source_stats: dict[str, dict] = {}
        for name in sorted(cfg.sources):
            try:
                source_stats[name] = ingest_source(cfg, cfg.sources[name], store, clock)
            except Exception as exc:
                log.error("source %s failed: %s", name, exc)
                source_stats[name] = {
                    "items_seen": 0,
                    "items_fetched": 0,
                    "posts_added": 0,
                    "errors": [f"{type(exc).__name__}: {exc}"],
                }
        entry = {
            "run_id": run_id,
            "kind": "daily",
            "started_at": started_at,
            "scheduled_for": format_rfc3339(scheduled_for) if scheduled_for else None,
            "sources": source_stats,
            "previous_run": previous,
        }
        try:
            artifacts = build_exports(cfg, store, clock)
            for rel in sorted(artifacts):
                store_mod.write_bytes_atomic(cfg.output_dir / rel, artifacts[rel])
        except Exception as exc:
            entry.update(
                status="failure",
                finished_at=format_rfc3339(clock.now()),
                digests={},
                error=f"{type(exc).__name__}: {exc}",
            )
            _append_ledger(cfg.output_dir, entry)
            raise
        has_errors = any(s["errors"] for s in source_stats.values())
        entry.update(
            status="partial" if has_errors else "success",
            finished_at=format_rfc3339(clock.now()),
            digests={rel: _digest(data) for rel, data in sorted(artifacts.items())},
        )
        runs_bytes = _append_ledger(cfg.output_dir, entry)
        archive = _archive_dir(cfg, run_id)
        for rel in sorted(artifacts):
            store_mod.write_bytes_atomic(archive / rel, artifacts[rel])
        store_mod.write_bytes_atomic(archive / "runs.json", runs_bytes)
        _publish(cfg, archive)
        if cfg.post_publish_hook:
            subprocess.run(shlex.split(cfg.post_publish_hook), check=False)
        return entry


def rollback(cfg: PipelineConfig, run_id: int, clock: Clock | None = None) -> dict:
    """Restore the publish directory to the artifacts of ``run_id``.

    The data store is never rolled back; only publication moves.
    """
    clock = clock or SystemClock()
    with file_lock(cfg.data_dir / "run.lock"):
        runs = load_ledger(cfg.output_dir)
        by_id = {r["run_id"]: r for r in runs}
        available = sorted(
            r["run_id"]
            for r in runs
            if r.get("digests") and _archive_dir(cfg, r["run_id"]).exists()
        )
        target = by_id.get(run_id)
        if not target or not target.get("digests") or not _archive_dir(cfg, run_id).exists():
            raise PipelineError(
                f"run {run_id} has no retained artifacts; available runs: {available}"
            )
        new_id = _next_run_id(cfg.output_dir)
        entry = {
            "run_id": new_id,
            "kind": "rollback",
            "rollback_to": run_id,
            "started_at": format_rfc3339(clock.now()),
            "finished_at": format_rfc3339(clock.now()),
            "status": "success",
            "sources": {},
            "digests": target["digests"],
            "previous_run": new_id - 1 if new_id > 1 else None,
        }
        _append_ledger(cfg.output_dir, entry)
        _publish(cfg, _archive_dir(cfg, run_id))
        return entry


# ---------------------------------------------------------------------------
# scheduling

def _due_at(day: date, cfg: PipelineConfig) -> datetime:
    hour, minute = cfg.schedule_time()
    return datetime.combine(day, time(hour, minute), tzinfo=cfg.tz)


def next_due(after: datetime, cfg: PipelineConfig) -> datetime:
    local = after.astimezone(cfg.tz)
    candidate = _due_at(local.date(), cfg)
    if candidate <= after:
        candidate = _due_at(local.date() + timedelta(days=1), cfg)
    return candidate


def prev_due(at: datetime, cfg: PipelineConfig) -> datetime:
    local = at.astimezone(cfg.tz)
    candidate = _due_at(local.date(), cfg)
    if candidate > at:
        candidate = _due_at(local.date() - timedelta(days=1), cfg)
    return candidate


def schedule(
    cfg: PipelineConfig,
    clock: Clock | None = None,
    runner: Callable[..., dict] = run_daily,
    max_runs: int | None = None,
) -> int:
    """Run the daily routine at the configured local time of day.

    A missed slot (process down over a due time) triggers exactly one
    catch-up run at startup. A second scheduler finding the lock held
    skips with a ledger note instead of running concurrently.
    """
    clock = clock or SystemClock()
    state_path = cfg.data_dir / "scheduler_state.json"
    runs = 0
    lock = file_lock(cfg.data_dir / "scheduler.lock")
    try:
        lock.__enter__()
    except LockHeld as exc:
        log.warning("scheduler lock held (%s), skipping", exc)
        _skip_note(cfg, clock, str(exc))
        return 0
    try:
        last_due: datetime | None = None
        if state_path.exists():
            raw = json.loads(state_path.read_text(encoding="utf-8"))
            last_due = datetime.fromisoformat(raw["last_due"])

        def record(due: datetime) -> None:
            store_mod.write_json_atomic(state_path, {"last_due": due.isoformat()})

        def attempt(due: datetime) -> bool:
            nonlocal runs
            try:
                runner(cfg, clock=clock, scheduled_for=due)
            except LockHeld as exc:
                # a manual run is in progress; never overlap, note and move on
                log.warning("run lock held at %s (%s), skipping slot", due, exc)
                _skip_note(cfg, clock, str(exc))
                record(due)
                return False
            runs += 1
            record(due)
            return True

        missed = prev_due(clock.now(), cfg)
        if last_due is not None and missed > last_due:
            log.info("catch-up run for missed slot %s", missed)
            attempt(missed)
        while max_runs is None or runs < max_runs:
            target = next_due(clock.now(), cfg)
            seconds = (target - clock.now()).total_seconds()
            if seconds > 0:
                clock.sleep(seconds)
            attempt(target)
    finally:
        lock.__exit__(None, None, None)
    return runs


def _skip_note(cfg: PipelineConfig, clock: Clock, note: str) -> None:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    run_id = _next_run_id(cfg.output_dir)
    _append_ledger(
        cfg.output_dir,
        {
            "run_id": run_id,
            "kind": "schedule_skip",
            "started_at": format_rfc3339(clock.now()),
            "finished_at": format_rfc3339(clock.now()),
            "status": "success",
            "sources": {},
            "digests": {},
            "note": note,
            "previous_run": run_id - 1 if run_id > 1 else None,
        },
    )
    return None


# ---------------------------------------------------------------------------
# serving

class ArtifactServer:
    """Read-only static server for an artifact directory plus /api/runs."""

    def __init__(self, directory: str | Path, address: tuple[str, int] = ("127.0.0.1", 0)):
        self.root = Path(directory).resolve()
        server = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_GET(self):
                server._handle(self)

        self._httpd = ThreadingHTTPServer(address, Handler)  # raises if port busy
        self._thread: threading.Thread | None = None

    def start(self) -> "ArtifactServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> "ArtifactServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    @property
    def base_url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def _handle(self, handler: BaseHTTPRequestHandler) -> None:
        raw = handler.path.split("?", 1)[0]
        if raw == "/api/runs":
            runs = self.root / "runs.json"
            if not runs.exists():
                self._send(handler, 404, b"no runs", "text/plain")
                return
            self._send(handler, 200, runs.read_bytes(), "application/json")
            return
        relative = raw.lstrip("/") or "index.html"
        target = (self.root / relative).resolve()
        if not str(target).startswith(str(self.root) + os.sep) and target != self.root:
            self._send(handler, 404, b"not found", "text/plain")
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._send(handler, 404, b"not found", "text/plain")
            return
        ctype = guess_type(str(target))[0] or "application/octet-stream"
        self._send(handler, 200, target.read_bytes(), ctype)

    def _send(self, handler, status: int, body: bytes, ctype: str) -> None:
        handler.send_response(status)
        handler.send_header("Content-Type", ctype)
        handler.send_header("Content-Length", str(len(body)))
        handler.end_headers()
        handler.wfile.write(body)


def serve(directory: str | Path, address: tuple[str, int]) -> ArtifactServer:
    return ArtifactServer(directory, address).start()
