from __future__ import annotations

import math
import random

import pytest

from pulsemon.lexicon import LexiconEntry, MatchResult
from pulsemon.wordcloud import (
    CorpusTermStats,
    WordCloudError,
    cloud_weights,
    term_stats,
)


def entry(surface: str, category="sadness") -> LexiconEntry:
    wildcard = surface.endswith("*")
    stem = surface[:-1] if wildcard else surface
    return LexiconEntry(
        surface=surface,
        category=category,
        tokens=tuple(stem.casefold().split()),
        wildcard=wildcard,
    )


def stats(counts: dict[LexiconEntry, int], corpus_id="live", category="sadness",
          total: int | None = None) -> CorpusTermStats:
    return CorpusTermStats(
        corpus_id=corpus_id,
        category=category,
        counts=counts,
        category_total=total if total is not None else sum(counts.values()),
        lexicon_version="v1",
    )


def match_result(term_counts: dict[LexiconEntry, int], version="v1") -> MatchResult:
    cats: dict[str, int] = {}
    for e, c in term_counts.items():
        cats[e.category] = cats.get(e.category, 0) + c
    return MatchResult(
        token_count=sum(term_counts.values()) + 2,
        category_counts=cats,
        term_counts=term_counts,
        lexicon_version=version,
    )


HILF = entry("hilf*", "prosocial")
SPENDE = entry("spende*", "prosocial")


def test_term_stats_sums_across_posts():
    matched = [match_result({HILF: 1}), match_result({HILF: 1, SPENDE: 2})]
    result = term_stats(matched, "prosocial", "live")
    assert result.counts == {HILF: 2, SPENDE: 2}
    assert result.category_total == 4


def test_term_stats_empty_category():
    matched = [match_result({HILF: 1})]
    result = term_stats(matched, "anxiety", "live")
    assert result.counts == {}
    assert result.category_total == 0


def test_term_stats_hand_tally():
    rng = random.Random(5)
    entries = [entry(f"wort{chr(97 + i)}*", "sadness") for i in range(6)]
    matched = []
    tally = {e: 0 for e in entries}
    for _ in range(30):
        chosen = {e: rng.randint(0, 2) for e in rng.sample(entries, 3)}
        chosen = {e: c for e, c in chosen.items() if c}
        for e, c in chosen.items():
            tally[e] += c
        matched.append(match_result(chosen))
    result = term_stats(matched, "sadness", "live")
    assert result.counts == {e: c for e, c in tally.items() if c}
    assert result.category_total == sum(tally.values())


def test_term_stats_version_mismatch():
    with pytest.raises(WordCloudError):
        term_stats([match_result({HILF: 1}), match_result({HILF: 1}, version="v2")],
                   "prosocial", "live")


def test_weight_ln_ten():
    e = entry("verabschiede*")
    live = stats({e: 50}, total=500)
    base = stats({e: 10}, corpus_id="base", total=1000)
    (cloud_entry,) = cloud_weights(live, base, min_count=10)
    assert cloud_entry.weight == pytest.approx(math.log(10), rel=1e-12)
    assert cloud_entry.direction == "increased"
    assert cloud_entry.count_live == 50
    assert cloud_entry.count_base == 10


def test_weight_nine_times_more_frequent():
    e = entry("verabschiede*")
    live = stats({e: 90}, total=1000)
    base = stats({e: 10}, corpus_id="base", total=1000)
    (cloud_entry,) = cloud_weights(live, base, min_count=10)
    assert cloud_entry.weight == pytest.approx(math.log(9), rel=1e-12)
    assert cloud_entry.direction == "increased"


def test_equal_probabilities_weight_zero_increased():
    e = entry("tot*")
    live = stats({e: 20}, total=200)
    base = stats({e: 40}, corpus_id="base", total=400)
    (cloud_entry,) = cloud_weights(live, base, min_count=10)
    assert cloud_entry.weight == 0.0
    assert cloud_entry.direction == "increased"


def test_min_count_excludes_nine_occurrences():
    e, other = entry("tot*"), entry("trauer*")
    live = stats({e: 50, other: 60}, total=110)
    base = stats({e: 9, other: 30}, corpus_id="base", total=39)
    result = cloud_weights(live, base, min_count=10)
    assert [we.entry for we in result] == [other]


def test_empty_category_total_warns_empty(caplog):
    e = entry("tot*")
    live = stats({}, total=0)
    base = stats({e: 40}, corpus_id="base", total=40)
    with caplog.at_level("WARNING"):
        assert cloud_weights(live, base, min_count=1) == []
    assert "no matches" in caplog.text


def test_category_mismatch_error():
    live = stats({entry("tot*"): 10})
    base = stats({entry("wut*", "anger"): 10}, corpus_id="base", category="anger")
    with pytest.raises(WordCloudError):
        cloud_weights(live, base)


def random_corpus_pair(rng: random.Random, n_entries=12):
    entries = [
        entry(f"w{chr(97 + i % 26)}{chr(97 + i // 26)}*") for i in range(n_entries)
    ]
    live = {e: rng.randint(1, 60) for e in entries}
    base = {e: rng.randint(1, 60) for e in entries}
    return stats(live), stats(base, corpus_id="base")


def test_antisymmetry_swapping_corpora():
    rng = random.Random(31)
    for _ in range(50):
        live, base = random_corpus_pair(rng)
        forward = {we.entry: we for we in cloud_weights(live, base, min_count=1)}
        backward = {we.entry: we for we in cloud_weights(base, live, min_count=1)}
        assert set(forward) == set(backward)
        for e, fw in forward.items():
            bw = backward[e]
            assert fw.weight == pytest.approx(bw.weight, rel=1e-12, abs=1e-15)
            if fw.weight > 0:
                assert {fw.direction, bw.direction} == {"increased", "decreased"}


def test_scale_invariance():
    rng = random.Random(37)
    for _ in range(50):
        live, base = random_corpus_pair(rng)
        scaled = stats({e: c * 7 for e, c in live.counts.items()},
                       total=live.category_total * 7)
        original = cloud_weights(live, base, min_count=1)
        rescaled = cloud_weights(scaled, base, min_count=1)
        assert [we.entry for we in original] == [we.entry for we in rescaled]
        for a, b in zip(original, rescaled):
            assert a.weight == pytest.approx(b.weight, rel=1e-12, abs=1e-15)
            assert a.direction == b.direction


def test_threshold_monotonicity():
    rng = random.Random(41)
    for _ in range(30):
        live, base = random_corpus_pair(rng)
        previous = None
        for min_count in (1, 5, 10, 20, 40):
            current = {we.entry for we in cloud_weights(live, base, min_count=min_count)}
            if previous is not None:
                assert current <= previous
            previous = current


def test_weights_nonnegative_finite_and_sorted():
    rng = random.Random(43)
    live, base = random_corpus_pair(rng, n_entries=30)
    result = cloud_weights(live, base, min_count=1)
    assert all(we.weight >= 0 and math.isfinite(we.weight) for we in result)
    weights = [we.weight for we in result]
    assert weights == sorted(weights, reverse=True)
