"""Append-only post store plus the pipeline's incremental bookkeeping.

Posts live in TSV files partitioned by platform and month
(``posts/<platform>/<YYYY-MM>.tsv``), chosen for diffability. A
fetched-items index records which news items have already been retrieved,
and a per-platform match cache keeps per-post match results so only new
posts are re-matched each run.
"""
from __future__ import annotations

import json
import os
import tempfile
import threading
from collections import defaultdict
from pathlib import Path
from typing import Mapping, Sequence

from .ingest import POST_TSV_COLUMNS, Post, format_post_tsv_row, ingest_tsv
from .lexicon import Lexicon, MatchResult


def write_bytes_atomic(path: Path, data: bytes) -> None:
    """Write via temp file + rename so readers never see partial content."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path: Path, payload: object) -> bytes:
    data = (
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1) + "\n"
    ).encode("utf-8")
    write_bytes_atomic(path, data)
    return data


class PostStore:
    """Posts partitioned by platform and month, de-duplicated by (platform, id).

    Appends are serialized per platform file; the matcher-facing loads
    return posts ordered by (created_at, id).
    """

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self._locks: defaultdict[str, threading.Lock] = defaultdict(threading.Lock)

    def _platform_dir(self, platform: str) -> Path:
        return self.data_dir / "posts" / platform

    def load(self, platform: str) -> list[Post]:
        directory = self._platform_dir(platform)
        posts: list[Post] = []
        if directory.exists():
            for part in sorted(directory.glob("*.tsv")):
                posts.extend(ingest_tsv(part))
        posts.sort(key=lambda p: (p.created_at, p.id))
        return posts

    def existing_ids(self, platform: str) -> set[str]:
        return {p.id for p in self.load(platform)}

    def append(self, posts: Sequence[Post]) -> int:
        """Append posts not already stored; returns the number added."""
        added = 0
        by_platform: dict[str, list[Post]] = defaultdict(list)
        for post in posts:
            by_platform[post.platform].append(post)
        for platform, group in by_platform.items():
            with self._locks[platform]:
                existing = self.existing_ids(platform)
                fresh = [p for p in group if p.id not in existing]
                seen: set[str] = set()
                by_month: dict[str, list[Post]] = defaultdict(list)
                for post in fresh:
                    if post.id in seen:
                        continue
                    seen.add(post.id)
                    by_month[post.created_at.strftime("%Y-%m")].append(post)
                for month, month_posts in by_month.items():
                    part = self._platform_dir(platform) / f"{month}.tsv"
                    part.parent.mkdir(parents=True, exist_ok=True)
                    is_new = not part.exists()
                    with part.open("a", encoding="utf-8", newline="\n") as fh:
                        if is_new:
                            fh.write("\t".join(POST_TSV_COLUMNS) + "\n")
                        for post in sorted(month_posts, key=lambda p: (p.created_at, p.id)):
                            fh.write(format_post_tsv_row(post) + "\n")
                    added += len(month_posts)
        return added

    # -- fetched-items index --------------------------------------------------

    def _index_path(self, source: str) -> Path:
        return self.data_dir / "fetched" / f"{source}.json"

    def load_fetched_index(self, source: str) -> dict[str, dict]:
        path = self._index_path(source)
        if not path.exists():
            return {}
        return json.loads(path.read_text(encoding="utf-8"))["items"]

    def save_fetched_index(self, source: str, items: Mapping[str, dict]) -> None:
        write_json_atomic(self._index_path(source), {"items": dict(items)})

    # -- match cache ------------------------------------------------------------

    def _cache_path(self, platform: str) -> Path:
        return self.data_dir / "match_cache" / f"{platform}.json"

    def load_match_cache(
        self, platform: str, lexicon: Lexicon
    ) -> dict[str, MatchResult]:
        """Cached per-post match results, empty if the lexicon changed."""
        path = self._cache_path(platform)
        if not path.exists():
            return {}
        raw = json.loads(path.read_text(encoding="utf-8"))
        if raw.get("lexicon_version") != lexicon.version:
            return {}
        categories = sorted(lexicon.categories)
        results: dict[str, MatchResult] = {}
        for post_id, row in raw["results"].items():
            term_counts = {}
            valid = True
            for key, count in row["terms"].items():
                category, _, surface = key.partition("\t")
                entry = lexicon.find(category, surface)
                if entry is None:
                    valid = False
                    break
                term_counts[entry] = count
            if not valid:
                continue
            category_counts = {c: 0 for c in categories}
            category_counts.update(row["cats"])
            results[post_id] = MatchResult(
                token_count=row["tokens"],
                category_counts=category_counts,
                term_counts=term_counts,
                lexicon_version=lexicon.version,
            )
        return results

    def save_match_cache(
        self, platform: str, lexicon: Lexicon, results: Mapping[str, MatchResult]
    ) -> None:
        payload = {
            "lexicon_version": lexicon.version,
            "results": {
                post_id: {
                    "tokens": mr.token_count,
                    "cats": {c: n for c, n in sorted(mr.category_counts.items()) if n},
                    "terms": {
                        f"{e.category}\t{e.surface}": n
                        for e, n in sorted(
                            mr.term_counts.items(), key=lambda kv: (kv[0].category, kv[0].surface)
                        )
                    },
                }
                for post_id, mr in sorted(results.items())
            },
        }
        write_json_atomic(self._cache_path(platform), payload)
