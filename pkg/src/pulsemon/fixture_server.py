"""HTTP fixture server replaying recorded-shape liveticker responses.

Serves the same wire protocol the client speaks (sitemap, ticker item
lists, batched posts with a continuation cursor) from an in-memory
dataset, either loaded from a recording under ``fixtures/`` or built
deterministically from a seed. Supports failure injection so retry and
resume paths can be exercised.
"""
from __future__ import annotations

import json
import random
import re
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit


@dataclass
class FixturePost:
    id: str
    created_at: str
    text: str
    author: str | None = None


@dataclass
class FixtureItem:
    id: str
    published_at: str
    first_post_at: str | None = None
    posts: list[FixturePost] = field(default_factory=list)


@dataclass
class FixtureTicker:
    id: str
    items: list[FixtureItem] = field(default_factory=list)


@dataclass
class FixtureDataset:
    tickers: list[FixtureTicker] = field(default_factory=list)
    sitemap_format: str = "xml"  # "xml" or "plain"
    duplicate_boundary: bool = False

    @classmethod
    def from_json(cls, path: str | Path) -> "FixtureDataset":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        tickers = [
            FixtureTicker(
                id=t["id"],
                items=[
                    FixtureItem(
                        id=i["id"],
                        published_at=i["published_at"],
                        first_post_at=i.get("first_post_at"),
                        posts=[
                            FixturePost(
                                id=p["id"],
                                created_at=p["created_at"],
                                text=p["text"],
                                author=p.get("author"),
                            )
                            for p in i.get("posts", [])
                        ],
                    )
                    for i in t.get("items", [])
                ],
            )
            for t in raw["tickers"]
        ]
        return cls(
            tickers=tickers,
            sitemap_format=raw.get("sitemap_format", "xml"),
            duplicate_boundary=raw.get("duplicate_boundary", False),
        )

    def find_ticker(self, ticker_id: str) -> FixtureTicker | None:
        return next((t for t in self.tickers if t.id == ticker_id), None)

    def find_item(self, item_id: str) -> FixtureItem | None:
        for ticker in self.tickers:
            for item in ticker.items:
                if item.id == item_id:
                    return item
        return None

    def post_count(self) -> int:
        return sum(len(i.posts) for t in self.tickers for i in t.items)


def build_scale_dataset(
    n_tickers: int = 111,
    n_items: int = 10013,
    big_item_posts: int = 2293,
    seed: int = 7,
) -> FixtureDataset:
    """Deterministic corpus at the scale of the recorded source.

    The first item of the first ticker carries ``big_item_posts`` posts;
    remaining items get 0-2 posts each.
    """
    rng = random.Random(seed)
    words = ["angst", "wut", "freude", "hilfe", "nachbarn", "heute", "wieder", "zusammen"]
    start = datetime(2020, 3, 9, 6, 0, tzinfo=timezone.utc)
    tickers: list[FixtureTicker] = []
    per_ticker = [n_items // n_tickers] * n_tickers
    for i in range(n_items - sum(per_ticker)):
        per_ticker[i] += 1
    item_no = 0
    for t in range(n_tickers):
        ticker = FixtureTicker(id=f"t{t:03d}-corona-liveticker")
        for _ in range(per_ticker[t]):
            published = start + timedelta(minutes=12 * item_no)
            n_posts = big_item_posts if item_no == 0 else rng.randint(0, 2)
            posts = [
                FixturePost(
                    id=f"i{item_no:05d}-p{p:04d}",
                    created_at=(published + timedelta(seconds=20 + 9 * p)).strftime(
                        "%Y-%m-%dT%H:%M:%SZ"
                    ),
                    text=" ".join(rng.choice(words) for _ in range(rng.randint(2, 6))),
                    author=f"u{rng.randint(1, 500):03d}",
                )
                for p in range(n_posts)
            ]
            first = posts[0].created_at if posts else None
            ticker.items.append(
                FixtureItem(
                    id=f"i{item_no:05d}",
                    published_at=published.strftime("%Y-%m-%dT%H:%M:%SZ"),
                    first_post_at=first,
                    posts=posts,
                )
            )
            item_no += 1
        tickers.append(ticker)
    return FixtureDataset(tickers=tickers)


class FixtureServer:
    """Threaded HTTP server over a FixtureDataset, bound to a free loopback port.

    ``fail_plan`` entries are dicts {"pattern": regex, "times": n, "status": s};
    a matching request consumes one failure and returns the status instead of
    the recorded response. ``requests`` logs every request line for
    assertions about request counts.
    """

    def __init__(self, dataset: FixtureDataset, fail_plan: list[dict] | None = None):
        self.dataset = dataset
        self.fail_plan = fail_plan or []
        self.requests: list[str] = []
        self._lock = threading.Lock()
        self._httpd: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    # -- lifecycle ----------------------------------------------------------

    def start(self) -> "FixtureServer":
        server = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # quiet
                pass

            def do_GET(self):
                server._handle(self)

        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        if self._httpd:
            self._httpd.shutdown()
            self._httpd.server_close()
            self._httpd = None

    def __enter__(self) -> "FixtureServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    @property
    def base_url(self) -> str:
        assert self._httpd is not None, "server not started"
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def request_count(self, pattern: str) -> int:
        regex = re.compile(pattern)
        with self._lock:
            return sum(1 for r in self.requests if regex.search(r))

    # -- request handling ----------------------------------------------------

    def _consume_failure(self, request_line: str) -> int | None:
        with self._lock:
            for rule in self.fail_plan:
                if rule.get("times", 0) > 0 and re.search(rule["pattern"], request_line):
                    rule["times"] -= 1
                    return int(rule.get("status", 503))
        return None

    def _handle(self, handler: BaseHTTPRequestHandler) -> None:
        request_line = handler.path
        with self._lock:
            self.requests.append(request_line)
        status = self._consume_failure(request_line)
        if status is not None:
            handler.send_response(status)
            handler.end_headers()
            return
        split = urlsplit(handler.path)
        path = split.path
        query = parse_qs(split.query)
        if path == "/sitemap":
            self._send_sitemap(handler)
            return
        m = re.fullmatch(r"/ticker/([^/]+)/items", path)
        if m:
            self._send_items(handler, m.group(1))
            return
        m = re.fullmatch(r"/item/([^/]+)/posts", path)
        if m:
            self._send_posts(handler, m.group(1), query)
            return
        self._send(handler, 404, b"not found", "text/plain")

    def _send(
        self, handler: BaseHTTPRequestHandler, status: int, body: bytes, ctype: str
    ) -> None:
        handler.send_response(status)
        handler.send_header("Content-Type", f"{ctype}; charset=utf-8")
        handler.send_header("Content-Length", str(len(body)))
        handler.end_headers()
        handler.wfile.write(body)

    def _send_json(self, handler: BaseHTTPRequestHandler, payload: object, status=200) -> None:
        self._send(handler, status, json.dumps(payload).encode("utf-8"), "application/json")

    def _send_sitemap(self, handler: BaseHTTPRequestHandler) -> None:
        urls = [f"{self.base_url}/ticker/{t.id}" for t in self.dataset.tickers]
        if self.dataset.sitemap_format == "plain":
            self._send(handler, 200, "\n".join(urls).encode("utf-8"), "text/plain")
            return
        body = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            '<urlset xmlns="http://www.sitemaps.org/schemas/sitemap/0.9">\n'
            + "\n".join(f"  <url><loc>{u}</loc></url>" for u in urls)
            + "\n</urlset>\n"
        )
        self._send(handler, 200, body.encode("utf-8"), "application/xml")

    def _send_items(self, handler: BaseHTTPRequestHandler, ticker_id: str) -> None:
        ticker = self.dataset.find_ticker(ticker_id)
        if ticker is None:
            self._send(handler, 404, b"unknown ticker", "text/plain")
            return
        payload = {
            "ticker": {"id": ticker.id},
            "items": [
                {
                    "envelope": {"id": item.id, "publishedAt": item.published_at},
                    "firstPosting": (
                        {"createdAt": item.first_post_at} if item.first_post_at else None
                    ),
                    "stats": {"postings": len(item.posts)},
                }
                for item in ticker.items
            ],
        }
        self._send_json(handler, payload)

    def _send_posts(self, handler, item_id: str, query: dict) -> None:
        item = self.dataset.find_item(item_id)
        if item is None:
            self._send(handler, 404, b"unknown item", "text/plain")
            return
        try:
            limit = int(query.get("limit", ["25"])[0])
            cursor = query.get("cursor", [None])[0]
            offset = 0 if cursor is None else int(cursor.lstrip("c"))
        except ValueError:
            self._send(handler, 400, b"bad cursor or limit", "text/plain")
            return
        if limit < 1 or offset < 0:
            self._send(handler, 400, b"bad cursor or limit", "text/plain")
            return
        window = item.posts[offset : offset + limit]
        if self.dataset.duplicate_boundary and offset > 0 and item.posts:
            window = [item.posts[offset - 1]] + window
        next_offset = offset + limit
        payload = {
            "posts": [
                {
                    "id": p.id,
                    "createdAt": p.created_at,
                    "author": p.author,
                    "text": p.text,
                }
                for p in window
            ],
            "next_cursor": f"c{next_offset}" if next_offset < len(item.posts) else None,
        }
        self._send_json(handler, payload)
