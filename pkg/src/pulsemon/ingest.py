"""Post retrieval: liveticker HTTP source, TSV feeds, daily aggregate feeds.

The liveticker wire protocol (a stand-in for the real site's infinite
scroll) is:

    GET /sitemap                          -> XML urlset or plain URL list
    GET /ticker/{id}/items                -> nested JSON with an item array
    GET /item/{id}/posts?cursor=C&limit=B -> {"posts": [...], "next_cursor": C'|null}

Post TSV schema (UTF-8, header required, tab-separated):
    platform  id  created_at  author  parent_item  text
created_at is RFC 3339; embedded backslash/tab/newline/CR in text are
escaped as ``\\\\``, ``\\t``, ``\\n``, ``\\r``. Aggregate TSV schema:
    date  category  posts_total  posts_matching
"""
from __future__ import annotations

import hashlib
import json
import logging
import re
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Sequence
from urllib.parse import urlsplit

import requests

log = logging.getLogger(__name__)

PLATFORMS = ("liveticker", "microblog", "studentchat")

POST_TSV_COLUMNS = ("platform", "id", "created_at", "author", "parent_item", "text")
AGGREGATE_TSV_COLUMNS = ("date", "category", "posts_total", "posts_matching")


class IngestError(Exception):
    """Validation failure in feed data or a malformed source document."""


class SourceError(Exception):
    """The remote source misbehaved (network failure, bad pagination)."""


def parse_rfc3339(value: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime."""
    raw = value.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        parsed = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise IngestError(f"unparseable timestamp {value!r}") from exc
    if parsed.tzinfo is None:
        raise IngestError(f"timestamp {value!r} has no UTC offset")
    return parsed.astimezone(timezone.utc)


def format_rfc3339(value: datetime) -> str:
    return value.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Post:
    """One user message, timestamps normalized to UTC at ingest."""

    platform: str
    id: str
    created_at: datetime
    text: str
    author: str | None = None
    parent_item: str | None = None

    def __post_init__(self) -> None:
        if self.platform not in PLATFORMS:
            raise IngestError(f"unknown platform {self.platform!r}")
        if not self.id:
            raise IngestError("post id must be non-empty")
        if self.created_at.tzinfo is None:
            raise IngestError("created_at must be timezone-aware")
        if self.created_at.utcoffset() != timezone.utc.utcoffset(None):
            object.__setattr__(self, "created_at", self.created_at.astimezone(timezone.utc))
        if self.created_at.microsecond:
            # posts carry seconds precision
            object.__setattr__(self, "created_at", self.created_at.replace(microsecond=0))

    @property
    def char_length(self) -> int:
        return len(self.text)


@dataclass(frozen=True)
class NewsItem:
    id: str
    ticker_id: str
    published_at: datetime
    first_post_at: datetime | None = None

    def __post_init__(self) -> None:
        if self.first_post_at is not None and self.first_post_at < self.published_at:
            raise IngestError(
                f"item {self.id}: first_post_at precedes published_at"
            )


@dataclass(frozen=True)
class TickerRef:
    url: str
    ticker_id: str
    discovered_at: datetime


@dataclass(frozen=True)
class AggregateDaily:
    date: date
    category: str
    posts_total: int
    posts_matching: int

    def __post_init__(self) -> None:
        if self.posts_total < 0:
            raise IngestError("posts_total must be >= 0")
        if not 0 <= self.posts_matching <= self.posts_total:
            raise IngestError("posts_matching must lie in [0, posts_total]")


def hash_author(author: str, salt: str) -> str:
    """Anonymize a raw author id with a configured salt."""
    return hashlib.sha256((salt + "\x00" + author).encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# sitemap parsing

def parse_sitemap(data: bytes) -> list[str]:
    """Extract ticker URLs from an XML urlset or a plain URL list.

    Malformed XML raises SourceError with the byte offset of the failure.
    """
    text = data.decode("utf-8", errors="replace")
    if text.lstrip().startswith("<"):
        try:
            root = ET.fromstring(text)
        except ET.ParseError as exc:
            line, column = exc.position
            offset = sum(len(l) + 1 for l in text.split("\n")[: line - 1]) + column
            raise SourceError(
                f"malformed sitemap XML at byte offset {offset}: {exc}"
            ) from exc
        urls = [
            el.text.strip()
            for el in root.iter()
            if el.tag.split("}")[-1] == "loc" and el.text and el.text.strip()
        ]
        return urls
    return [line.strip() for line in text.splitlines() if line.strip()]


def ticker_id_from_url(url: str) -> str:
    """Ticker id is the path segment after /ticker/ (an opaque slug)."""
    parts = [p for p in urlsplit(url).path.split("/") if p]
    for i, part in enumerate(parts):
        if part == "ticker" and i + 1 < len(parts):
            return parts[i + 1]
    return parts[-1] if parts else url


# ---------------------------------------------------------------------------
# record flattening

def flatten_record(raw: object) -> list[tuple[str, str]]:
    """Flatten a nested document into (dotted.path, stringified value) rows.

    Object keys are visited in sorted order, array elements by index;
    scalars are stringified (strings as-is, other JSON scalars in JSON
    notation). Anything else fails with the path of the offending node.
    """
    rows: list[tuple[str, str]] = []

    def walk(node: object, path: tuple[str, ...]) -> None:
        if isinstance(node, dict):
            for key in sorted(node):
                if not isinstance(key, str):
                    raise IngestError(
                        f"malformed document at {'.'.join(path) or '<root>'}: non-string key {key!r}"
                    )
                walk(node[key], path + (key,))
        elif isinstance(node, (list, tuple)):
            for i, value in enumerate(node):
                walk(value, path + (str(i),))
        elif isinstance(node, str):
            rows.append((".".join(path), node))
        elif node is None or isinstance(node, (bool, int, float)):
            rows.append((".".join(path), json.dumps(node)))
        else:
            raise IngestError(
                f"malformed document at {'.'.join(path) or '<root>'}: "
                f"unsupported value of type {type(node).__name__}"
            )

    walk(raw, ())
    return rows


# ---------------------------------------------------------------------------
# HTTP client

_LOOPBACK_HOSTS = {"localhost", "127.0.0.1", "::1"}


class LivetickerClient:
    """Client for the liveticker protocol with retries and politeness.

    Requests to non-loopback hosts are spaced by ``min_interval`` seconds on
    a single session (one connection per host); the fixture server on
    loopback is exempt. Failed requests are retried with exponential
    backoff, at most ``max_attempts`` tries.
    """

    def __init__(
        self,
        base_url: str,
        *,
        batch_size: int = 25,
        max_attempts: int = 3,
        backoff: float = 0.25,
        min_interval: float = 0.2,
        session: requests.Session | None = None,
    ):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.base_url = base_url.rstrip("/")
        self.batch_size = batch_size
        self.max_attempts = max_attempts
        self.backoff = backoff
        host = urlsplit(self.base_url).hostname or ""
        self.min_interval = 0.0 if host in _LOOPBACK_HOSTS else min_interval
        self._session = session or requests.Session()
        self._last_request = 0.0

    def _get(self, path: str, params: dict | None = None) -> requests.Response:
        url = f"{self.base_url}{path}"
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            wait = self._last_request + self.min_interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            try:
                self._last_request = time.monotonic()
                response = self._session.get(url, params=params, timeout=30)
            except requests.RequestException as exc:
                last_error = exc
                log.warning("request %s failed (%s), attempt %d", url, exc, attempt + 1)
                continue
            if response.status_code >= 500:
                last_error = SourceError(f"{url} -> HTTP {response.status_code}")
                log.warning("request %s -> %d, attempt %d", url, response.status_code, attempt + 1)
                continue
            return response
        raise SourceError(f"giving up on {url} after {self.max_attempts} attempts: {last_error}")

    def discover_tickers(
        self, predicate: Callable[[str], bool] | None = None
    ) -> list[TickerRef]:
        """Fetch the sitemap and return matching ticker refs, ordered by URL."""
        response = self._get("/sitemap")
        if response.status_code != 200:
            raise SourceError(f"sitemap -> HTTP {response.status_code}")
        urls = parse_sitemap(response.content)
        now = datetime.now(timezone.utc)
        refs = [
            TickerRef(url=url, ticker_id=ticker_id_from_url(url), discovered_at=now)
            for url in sorted(set(urls))
            if predicate is None or predicate(url)
        ]
        return refs

    def fetch_news_items(self, ticker: TickerRef | str) -> list[NewsItem]:
        """List the news items of one ticker.

        Item ids and timestamps are pulled from the flattened nested
        response. A 404 yields an empty list with a warning.
        """
        ticker_id = ticker.ticker_id if isinstance(ticker, TickerRef) else ticker
        response = self._get(f"/ticker/{ticker_id}/items")
        if response.status_code == 404:
            log.warning("ticker %s not found at source", ticker_id)
            return []
        if response.status_code != 200:
            raise SourceError(f"ticker {ticker_id} -> HTTP {response.status_code}")
        try:
            document = response.json()
        except ValueError as exc:
            raise SourceError(f"ticker {ticker_id}: response is not JSON") from exc
        rows = dict(flatten_record(document))
        items: list[NewsItem] = []
        indices = sorted(
            {
                int(m.group(1))
                for key in rows
                for m in [re.fullmatch(r"items\.(\d+)\.envelope\.id", key)]
                if m
            }
        )
        for i in indices:
            item_id = rows[f"items.{i}.envelope.id"]
            published = parse_rfc3339(rows[f"items.{i}.envelope.publishedAt"])
            first_raw = rows.get(f"items.{i}.firstPosting.createdAt")
            first = parse_rfc3339(first_raw) if first_raw else None
            items.append(
                NewsItem(
                    id=item_id,
                    ticker_id=ticker_id,
                    published_at=published,
                    first_post_at=first,
                )
            )
        return items

    def fetch_posts(
        self,
        item_id: str,
        batch_size: int | None = None,
        *,
        platform: str = "liveticker",
    ) -> list[Post]:
        """Retrieve all posts of one item, following the continuation cursor.

        All-or-nothing: any unrecoverable failure mid-pagination raises and
        contributes no posts. Posts are de-duplicated by id and ordered by
        (created_at, id). Request-level retries resume from the last good
        cursor.
        """
        limit = batch_size if batch_size is not None else self.batch_size
        if limit < 1:
            raise ValueError("batch_size must be >= 1")
        cursor: str | None = None
        seen_cursors: set[str] = set()
        by_id: dict[str, Post] = {}
        while True:
            params: dict[str, object] = {"limit": limit}
            if cursor is not None:
                params["cursor"] = cursor
            response = self._get(f"/item/{item_id}/posts", params=params)
            if response.status_code != 200:
                raise SourceError(f"item {item_id} -> HTTP {response.status_code}")
            try:
                payload = response.json()
                batch = payload["posts"]
                next_cursor = payload.get("next_cursor")
            except (ValueError, KeyError, TypeError) as exc:
                raise SourceError(f"item {item_id}: malformed posts payload") from exc
            for raw in batch:
                post = Post(
                    platform=platform,
                    id=str(raw["id"]),
                    created_at=parse_rfc3339(raw["createdAt"]),
                    text=str(raw.get("text", "")),
                    author=raw.get("author") or None,
                    parent_item=item_id,
                )
                by_id.setdefault(post.id, post)
            if next_cursor is None or len(batch) < limit:
                break
            if next_cursor in seen_cursors:
                raise SourceError(
                    f"item {item_id}: continuation loop, cursor {next_cursor!r} repeated"
                )
            seen_cursors.add(next_cursor)
            cursor = next_cursor
        return sorted(by_id.values(), key=lambda p: (p.created_at, p.id))


# ---------------------------------------------------------------------------
# TSV feeds

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def escape_field(value: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in value)


def unescape_field(value: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch == "\\" and i + 1 < len(value) and value[i + 1] in _UNESCAPES:
            out.append(_UNESCAPES[value[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def write_posts_tsv(posts: Iterable[Post], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(POST_TSV_COLUMNS) + "\n")
        for post in posts:
            fh.write(format_post_tsv_row(post) + "\n")


def format_post_tsv_row(post: Post) -> str:
    return "\t".join(
        (
            post.platform,
            post.id,
            format_rfc3339(post.created_at),
            post.author or "",
            post.parent_item or "",
            escape_field(post.text),
        )
    )


def _read_tsv_header(line: str, expected: Sequence[str], path: Path) -> None:
    columns = line.rstrip("\n").split("\t")
    if sorted(columns) != sorted(expected):
        raise IngestError(f"{path}: header {columns!r} does not match {list(expected)!r}")
    if columns != list(expected):
        raise IngestError(f"{path}: header columns out of order: {columns!r}")


def _write_rejects(path: Path, rejects: list[tuple[int, str, str]]) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("line\treason\traw\n")
        for lineno, reason, raw in rejects:
            fh.write(f"{lineno}\t{reason}\t{escape_field(raw)}\n")


def ingest_tsv(path: str | Path, reject_path: str | Path | None = None) -> list[Post]:
    """Read a Post TSV feed; invalid rows go to a reject file, with reasons."""
    path = Path(path)
    reject_path = Path(reject_path) if reject_path else path.with_name(path.name + ".rejects")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise IngestError(f"{path}: missing header row")
    _read_tsv_header(lines[0], POST_TSV_COLUMNS, path)
    posts: list[Post] = []
    seen: set[tuple[str, str]] = set()
    rejects: list[tuple[int, str, str]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != len(POST_TSV_COLUMNS):
            rejects.append((lineno, f"expected {len(POST_TSV_COLUMNS)} columns, got {len(fields)}", line))
            continue
        platform, post_id, created_raw, author, parent, text = fields
        try:
            post = Post(
                platform=platform,
                id=post_id,
                created_at=parse_rfc3339(created_raw),
                text=unescape_field(text),
                author=author or None,
                parent_item=parent or None,
            )
        except IngestError as exc:
            rejects.append((lineno, str(exc), line))
            continue
        key = (post.platform, post.id)
        if key in seen:
            rejects.append((lineno, f"duplicate post id {post.id!r}", line))
            continue
        seen.add(key)
        posts.append(post)
    if rejects:
        _write_rejects(reject_path, rejects)
        log.warning("%s: %d row(s) rejected, reasons in %s", path, len(rejects), reject_path)
    return posts


def ingest_aggregates(
    path: str | Path, reject_path: str | Path | None = None
) -> list[AggregateDaily]:
    """Read a daily aggregate TSV feed (date, category, totals)."""
    path = Path(path)
    reject_path = Path(reject_path) if reject_path else path.with_name(path.name + ".rejects")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise IngestError(f"{path}: missing header row")
    _read_tsv_header(lines[0], AGGREGATE_TSV_COLUMNS, path)
    rows: list[AggregateDaily] = []
    seen: set[tuple[date, str]] = set()
    rejects: list[tuple[int, str, str]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != len(AGGREGATE_TSV_COLUMNS):
            rejects.append((lineno, f"expected {len(AGGREGATE_TSV_COLUMNS)} columns, got {len(fields)}", line))
            continue
        date_raw, category, total_raw, matching_raw = fields
        try:
            day = date.fromisoformat(date_raw)
            row = AggregateDaily(
                date=day,
                category=category,
                posts_total=int(total_raw),
                posts_matching=int(matching_raw),
            )
        except (ValueError, IngestError) as exc:
            rejects.append((lineno, str(exc), line))
            continue
        key = (row.date, row.category)
        if key in seen:
            raise IngestError(f"{path}:{lineno}: duplicate (date, category) {key}")
        seen.add(key)
        rows.append(row)
    if rejects:
        _write_rejects(reject_path, rejects)
        log.warning("%s: %d row(s) rejected, reasons in %s", path, len(rejects), reject_path)
    return rows
