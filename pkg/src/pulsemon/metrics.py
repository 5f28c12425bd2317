"""Daily indicator values, weekday baselines, and descriptive statistics.

Two indicator metrics exist: the mean per-post term frequency (term matches
divided by token count, averaged over the posts of a day) and the
proportion of posts containing at least one category term. Baselines are
per-weekday means over a reference period; the published quantity is the
relative difference against the matching weekday baseline, in percent.
"""
from __future__ import annotations

import logging
import math
import statistics
from dataclasses import dataclass
from datetime import date, tzinfo
from typing import Mapping, Sequence

from .ingest import AggregateDaily, NewsItem, Post
from .lexicon import MatchResult

log = logging.getLogger(__name__)

METRIC_MEAN_FREQUENCY = "mean_post_frequency"
METRIC_PROPORTION = "proportion_matching"
METRICS = (METRIC_MEAN_FREQUENCY, METRIC_PROPORTION)


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class DailyIndicator:
    """One day's raw indicator value for one category.

    ``n_posts`` is the denominator that produced ``value``: posts with at
    least one token for the mean-frequency metric, all posts of the day for
    the proportion metric.
    """

    date: date
    category: str
    metric: str
    value: float
    n_posts: int


@dataclass(frozen=True)
class BaselineTable:
    """Per-weekday means over a reference period (0 = Monday .. 6 = Sunday)."""

    category: str
    metric: str
    period: tuple[date, date]
    weekday_means: Mapping[int, float]
    weekday_days: Mapping[int, int]


@dataclass(frozen=True)
class SeriesPoint:
    """Raw value, weekday baseline, and relative difference for one day.

    ``rel_pct`` is None (flagged) where the weekday baseline is zero or
    missing; no number is invented for those days.
    """

    date: date
    raw: float
    baseline: float | None
    rel_pct: float | None
    n_posts: int


@dataclass(frozen=True)
class IndicatorSeries:
    category: str
    metric: str
    points: tuple[SeriesPoint, ...]


def post_frequency(mr: MatchResult, category: str) -> float | None:
    """Category matches per token; None for zero-token posts."""
    if mr.token_count == 0:
        return None
    return mr.category_counts.get(category, 0) / mr.token_count


def daily_values(
    matched_posts: Sequence[tuple[Post, MatchResult]],
    category: str,
    metric: str,
    tz: tzinfo,
) -> list[DailyIndicator]:
    """Bucket matched posts into calendar days of ``tz`` and aggregate.

    Days without posts yield no indicator (gaps, never zeros). Summation
    order is fixed (by date, then post id) so results are bit-identical
    regardless of input order or parallel pre-processing.
    """
    if metric not in METRICS:
        raise MetricsError(f"unknown metric {metric!r}")
    if matched_posts:
        known = matched_posts[0][1].category_counts
        if category not in known:
            raise MetricsError(f"unknown category {category!r}")
    buckets: dict[date, list[tuple[Post, MatchResult]]] = {}
    for post, result in matched_posts:
        day = post.created_at.astimezone(tz).date()
        buckets.setdefault(day, []).append((post, result))
    indicators: list[DailyIndicator] = []
    for day in sorted(buckets):
        pairs = sorted(buckets[day], key=lambda pr: pr[0].id)
        if metric == METRIC_MEAN_FREQUENCY:
            freqs = [
                f for _, mr in pairs
                if (f := post_frequency(mr, category)) is not None
            ]
            if not freqs:
                continue
            value = sum(freqs) / len(freqs)
            n = len(freqs)
        else:
            n = len(pairs)
            matching = sum(1 for _, mr in pairs if mr.category_counts.get(category, 0) >= 1)
            value = matching / n
        indicators.append(
            DailyIndicator(date=day, category=category, metric=metric, value=value, n_posts=n)
        )
    return indicators


def aggregate_values(aggs: Sequence[AggregateDaily]) -> list[DailyIndicator]:
    """Turn pre-aggregated daily counts into proportion indicators.

    Days with posts_total == 0 are skipped with a warning.
    """
    indicators: list[DailyIndicator] = []
    for row in sorted(aggs, key=lambda r: (r.category, r.date)):
        if row.posts_total == 0:
            log.warning("skipping %s/%s: posts_total is 0", row.date, row.category)
            continue
        indicators.append(
            DailyIndicator(
                date=row.date,
                category=row.category,
                metric=METRIC_PROPORTION,
                value=row.posts_matching / row.posts_total,
                n_posts=row.posts_total,
            )
        )
    return indicators


def compute_baseline(
    history: Sequence[DailyIndicator],
    period: tuple[date, date],
    mode: str = "weekday",
) -> BaselineTable:
    """Mean indicator value per weekday over ``period`` (inclusive).

    ``mode="global"`` collapses the seasonality correction to a single mean
    replicated across all weekdays.
    """
    if mode not in ("weekday", "global"):
        raise MetricsError(f"unknown baseline mode {mode!r}")
    start, end = period
    if start > end:
        raise MetricsError("baseline period start is after its end")
    inside = [ind for ind in history if start <= ind.date <= end]
    if not inside:
        raise MetricsError(f"no indicator values inside baseline period {start}..{end}")
    keys = {(ind.category, ind.metric) for ind in inside}
    if len(keys) > 1:
        raise MetricsError(f"mixed category/metric in baseline input: {sorted(keys)}")
    ((category, metric),) = keys
    inside.sort(key=lambda ind: ind.date)
    if mode == "global":
        mean = sum(ind.value for ind in inside) / len(inside)
        weekday_means = {w: mean for w in range(7)}
        weekday_days = {w: len(inside) for w in range(7)}
    else:
        by_weekday: dict[int, list[float]] = {}
        for ind in inside:
            by_weekday.setdefault(ind.date.weekday(), []).append(ind.value)
        weekday_means = {w: sum(vs) / len(vs) for w, vs in sorted(by_weekday.items())}
        weekday_days = {w: len(vs) for w, vs in sorted(by_weekday.items())}
    return BaselineTable(
        category=category,
        metric=metric,
        period=(start, end),
        weekday_means=weekday_means,
        weekday_days=weekday_days,
    )


def relative_series(
    current: Sequence[DailyIndicator], base: BaselineTable
) -> IndicatorSeries:
    """Percentage change of each day against its weekday baseline.

    Days whose weekday baseline is zero or missing get rel_pct None.
    """
    points: list[SeriesPoint] = []
    for ind in sorted(current, key=lambda i: i.date):
        if (ind.category, ind.metric) != (base.category, base.metric):
            raise MetricsError(
                f"series ({ind.category}, {ind.metric}) does not match baseline "
                f"({base.category}, {base.metric})"
            )
        baseline = base.weekday_means.get(ind.date.weekday())
        if baseline is None or baseline == 0:
            rel = None
        else:
            rel = 100.0 * (ind.value - baseline) / baseline
        points.append(
            SeriesPoint(
                date=ind.date,
                raw=ind.value,
                baseline=baseline,
                rel_pct=rel,
                n_posts=ind.n_posts,
            )
        )
    return IndicatorSeries(category=base.category, metric=base.metric, points=tuple(points))


# ---------------------------------------------------------------------------
# descriptive statistics

@dataclass(frozen=True)
class PlatformStats:
    post_count: int
    mean_posts_per_day: float
    unique_authors: int | None
    match_fraction: Mapping[str, float]
    median_char_length: float | None
    median_first_post_latency_s: float | None
    posts_per_item_mean: float | None
    posts_per_item_sd: float | None


@dataclass(frozen=True)
class StatsTable:
    window: tuple[date, date]
    platforms: Mapping[str, PlatformStats]


def _median(values: list[float]) -> float | None:
    # even counts: mean of the lower and upper middle values
    return statistics.median(values) if values else None


def descriptive_stats(
    posts: Sequence[Post],
    matched: Sequence[MatchResult],
    items_by_platform: Mapping[str, Sequence[NewsItem]] | None = None,
    *,
    window: tuple[date, date],
) -> StatsTable:
    """Table-style corpus statistics over an already-windowed corpus.

    ``matched`` is aligned with ``posts``. Fractions count posts containing
    at least one category term. Posts-per-item uses the population standard
    deviation; items without posts count as zero.
    """
    if len(posts) != len(matched):
        raise MetricsError("posts and matched results must align")
    start, end = window
    if start > end:
        raise MetricsError("stats window start is after its end")
    n_days = (end - start).days + 1
    items_by_platform = items_by_platform or {}
    by_platform: dict[str, list[tuple[Post, MatchResult]]] = {}
    for post, mr in zip(posts, matched):
        by_platform.setdefault(post.platform, []).append((post, mr))
    platforms: dict[str, PlatformStats] = {}
    for platform in sorted(set(by_platform) | set(items_by_platform)):
        pairs = by_platform.get(platform, [])
        categories = sorted(
            {cat for _, mr in pairs for cat in mr.category_counts}
        )
        fractions = {
            cat: sum(1 for _, mr in pairs if mr.category_counts.get(cat, 0) >= 1) / len(pairs)
            for cat in categories
        } if pairs else {}
        authors = {post.author for post, _ in pairs if post.author}
        lengths = [float(post.char_length) for post, _ in pairs]
        items = list(items_by_platform.get(platform, ()))
        latencies = [
            (item.first_post_at - item.published_at).total_seconds()
            for item in items
            if item.first_post_at is not None
        ]
        if items:
            counts_by_item = {item.id: 0 for item in items}
            for post, _ in pairs:
                if post.parent_item in counts_by_item:
                    counts_by_item[post.parent_item] += 1
            counts = list(counts_by_item.values())
            per_item_mean = sum(counts) / len(counts)
            per_item_sd = math.sqrt(
                sum((c - per_item_mean) ** 2 for c in counts) / len(counts)
            )
        else:
            per_item_mean = per_item_sd = None
        platforms[platform] = PlatformStats(
            post_count=len(pairs),
            mean_posts_per_day=len(pairs) / n_days,
            unique_authors=len(authors) if authors else None,
            match_fraction=fractions,
            median_char_length=_median(lengths),
            median_first_post_latency_s=_median(latencies),
            posts_per_item_mean=per_item_mean,
            posts_per_item_sd=per_item_sd,
        )
    return StatsTable(window=window, platforms=platforms)


def aggregate_platform_stats(
    aggs: Sequence[AggregateDaily], *, window: tuple[date, date]
) -> PlatformStats:
    """Platform statistics for a pre-aggregated (count-only) source."""
    start, end = window
    inside = [row for row in aggs if start <= row.date <= end]
    n_days = (end - start).days + 1
    by_category: dict[str, tuple[int, int]] = {}
    for row in inside:
        total, matching = by_category.get(row.category, (0, 0))
        by_category[row.category] = (total + row.posts_total, matching + row.posts_matching)
    # post volume is per day, not per category: take the max category total
    # per day as the day's volume (categories share the same denominator feed)
    per_day: dict[date, int] = {}
    for row in inside:
        per_day[row.date] = max(per_day.get(row.date, 0), row.posts_total)
    post_count = sum(per_day.values())
    fractions = {
        cat: (matching / total if total else 0.0)
        for cat, (total, matching) in sorted(by_category.items())
    }
    return PlatformStats(
        post_count=post_count,
        mean_posts_per_day=post_count / n_days,
        unique_authors=None,
        match_fraction=fractions,
        median_char_length=None,
        median_first_post_latency_s=None,
        posts_per_item_mean=None,
        posts_per_item_sd=None,
    )
