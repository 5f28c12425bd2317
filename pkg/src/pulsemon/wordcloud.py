"""Comparative word-cloud weights between a monitored and a baseline corpus.

For each dictionary entry that occurs at least ``min_count`` times in both
corpora, the weight is |ln(p_live / p_base)| where p is the entry's share
of all matches in its category within that corpus; the direction records
which side was more frequent. The natural log is used; any other base only
rescales all weights uniformly.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .lexicon import LexiconEntry, MatchResult

log = logging.getLogger(__name__)


class WordCloudError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusTermStats:
    """Per-entry match totals of one corpus, restricted to one category."""

    corpus_id: str
    category: str
    counts: Mapping[LexiconEntry, int]
    category_total: int
    lexicon_version: str


@dataclass(frozen=True)
class WordCloudEntry:
    entry: LexiconEntry
    weight: float
    direction: str  # "increased" | "decreased"
    count_live: int
    count_base: int


def term_stats(
    matched: Iterable[MatchResult], category: str, corpus_id: str
) -> CorpusTermStats:
    """Sum per-entry counts of one category across a corpus of match results."""
    counts: dict[LexiconEntry, int] = {}
    version: str | None = None
    for result in matched:
        if version is None:
            version = result.lexicon_version
        elif version != result.lexicon_version:
            raise WordCloudError(
                f"mixed lexicon versions in corpus {corpus_id!r}: "
                f"{version} vs {result.lexicon_version}"
            )
        for entry, count in result.term_counts.items():
            if entry.category == category:
                counts[entry] = counts.get(entry, 0) + count
    return CorpusTermStats(
        corpus_id=corpus_id,
        category=category,
        counts=counts,
        category_total=sum(counts.values()),
        lexicon_version=version or "",
    )


def cloud_weights(
    live: CorpusTermStats, base: CorpusTermStats, min_count: int = 10
) -> list[WordCloudEntry]:
    """Weight every entry occurring >= min_count times in both corpora.

    Entries with equal probabilities get weight 0 and direction
    "increased" by convention. Output is sorted by weight descending,
    ties broken by entry surface.
    """
    if min_count < 1:
        raise WordCloudError("min_count must be >= 1")
    if live.category != base.category:
        raise WordCloudError(
            f"category mismatch: {live.category!r} vs {base.category!r}"
        )
    if live.lexicon_version and base.lexicon_version and live.lexicon_version != base.lexicon_version:
        raise WordCloudError(
            f"lexicon version mismatch: {live.lexicon_version} vs {base.lexicon_version}"
        )
    if live.category_total == 0 or base.category_total == 0:
        log.warning(
            "category %r has no matches in %s corpus, emitting empty cloud",
            live.category,
            "live" if live.category_total == 0 else "baseline",
        )
        return []
    entries: list[WordCloudEntry] = []
    for entry, count_live in live.counts.items():
        count_base = base.counts.get(entry, 0)
        if count_live < min_count or count_base < min_count:
            continue
        p_live = count_live / live.category_total
        p_base = count_base / base.category_total
        ratio = math.log(p_live / p_base)
        entries.append(
            WordCloudEntry(
                entry=entry,
                weight=abs(ratio),
                direction="increased" if ratio >= 0 else "decreased",
                count_live=count_live,
                count_base=count_base,
            )
        )
    entries.sort(key=lambda e: (-e.weight, e.entry.surface))
    return entries
