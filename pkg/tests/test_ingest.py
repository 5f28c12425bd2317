from __future__ import annotations

import random
import re
from datetime import date, datetime, timezone

import pytest

from pulsemon.fixture_server import (
    FixtureDataset,
    FixtureItem,
    FixturePost,
    FixtureTicker,
    build_scale_dataset,
)
from pulsemon.ingest import (
    AggregateDaily,
    IngestError,
    LivetickerClient,
    NewsItem,
    Post,
    SourceError,
    flatten_record,
    hash_author,
    ingest_aggregates,
    ingest_tsv,
    parse_rfc3339,
    parse_sitemap,
    write_posts_tsv,
)

from conftest import make_posts, single_item_dataset


def client_for(server, **kwargs) -> LivetickerClient:
    return LivetickerClient(server.base_url, backoff=0.01, **kwargs)


# -- timestamps and domain types ---------------------------------------------

def test_parse_rfc3339_variants():
    assert parse_rfc3339("2020-03-16T08:00:00Z") == datetime(2020, 3, 16, 8, tzinfo=timezone.utc)
    assert parse_rfc3339("2020-03-16T09:00:00+01:00") == datetime(2020, 3, 16, 8, tzinfo=timezone.utc)
    with pytest.raises(IngestError):
        parse_rfc3339("16.03.2020 08:00")
    with pytest.raises(IngestError):
        parse_rfc3339("2020-03-16T08:00:00")  # naive


def test_post_normalizes_to_utc_seconds():
    post = Post(
        platform="liveticker",
        id="p1",
        created_at=datetime(2020, 3, 16, 9, 0, 0, 123456, tzinfo=timezone.utc),
        text="größer",
    )
    assert post.created_at.microsecond == 0
    assert post.char_length == 6


def test_post_rejects_unknown_platform():
    with pytest.raises(IngestError):
        Post(platform="blog", id="x", created_at=datetime.now(timezone.utc), text="")


def test_news_item_invariant():
    published = datetime(2020, 3, 16, 8, tzinfo=timezone.utc)
    with pytest.raises(IngestError):
        NewsItem(id="i", ticker_id="t", published_at=published,
                 first_post_at=published.replace(hour=7))


def test_aggregate_invariant():
    with pytest.raises(IngestError):
        AggregateDaily(date(2020, 3, 16), "anxiety", 10, 11)


def test_hash_author_is_stable_and_salted():
    assert hash_author("alice", "s1") == hash_author("alice", "s1")
    assert hash_author("alice", "s1") != hash_author("alice", "s2")
    assert re.fullmatch(r"[0-9a-f]{16}", hash_author("alice", "s1"))


# -- flatten_record ------------------------------------------------------------

def test_flatten_one_level():
    assert flatten_record({"a": {"b": 1}}) == [("a.b", "1")]


def test_flatten_array():
    assert flatten_record({"a": [{"b": 1}, {"b": 2}]}) == [("a.0.b", "1"), ("a.1.b", "2")]


def test_flatten_scalars_and_null():
    rows = dict(flatten_record({"s": "x", "f": 1.5, "t": True, "n": None}))
    assert rows == {"s": "x", "f": "1.5", "t": "true", "n": "null"}


def test_flatten_deterministic_key_order():
    rows = flatten_record({"b": 1, "a": 2})
    assert [k for k, _ in rows] == ["a", "b"]


def test_flatten_malformed_reports_path():
    with pytest.raises(IngestError) as err:
        flatten_record({"a": [{"b": {1, 2}}]})
    assert "a.0.b" in str(err.value)


# -- sitemap / ticker discovery -----------------------------------------------

def test_parse_sitemap_plain_and_xml():
    assert parse_sitemap(b"http://x/ticker/a\n\nhttp://x/ticker/b\n") == [
        "http://x/ticker/a",
        "http://x/ticker/b",
    ]
    xml = b'<?xml version="1.0"?><urlset><url><loc>http://x/ticker/a</loc></url></urlset>'
    assert parse_sitemap(xml) == ["http://x/ticker/a"]


def test_parse_sitemap_malformed_reports_byte_offset():
    with pytest.raises(SourceError) as err:
        parse_sitemap(b"<urlset><url></urlset>")
    assert "byte offset" in str(err.value)


def test_discover_filters_by_predicate(run_server):
    dataset = FixtureDataset(
        tickers=[
            FixtureTicker(id="t1-corona"),
            FixtureTicker(id="t2-bundesliga"),
            FixtureTicker(id="t3-corona-schulen"),
        ]
    )
    server = run_server(dataset)
    refs = client_for(server).discover_tickers(lambda url: "corona" in url)
    assert [r.ticker_id for r in refs] == ["t1-corona", "t3-corona-schulen"]
    assert all(r.url.startswith(server.base_url) for r in refs)


def test_discover_empty_sitemap(run_server):
    server = run_server(FixtureDataset(tickers=[]))
    assert client_for(server).discover_tickers() == []


def test_discover_plain_sitemap(run_server):
    server = run_server(FixtureDataset(tickers=[FixtureTicker(id="t1")], sitemap_format="plain"))
    refs = client_for(server).discover_tickers()
    assert [r.ticker_id for r in refs] == ["t1"]


def test_discover_retries_then_succeeds(run_server):
    server = run_server(
        FixtureDataset(tickers=[FixtureTicker(id="t1")]),
        fail_plan=[{"pattern": r"/sitemap", "times": 2, "status": 503}],
    )
    refs = client_for(server).discover_tickers()
    assert len(refs) == 1
    assert server.request_count(r"/sitemap") == 3


def test_discover_gives_up_after_retries(run_server):
    server = run_server(
        FixtureDataset(tickers=[FixtureTicker(id="t1")]),
        fail_plan=[{"pattern": r"/sitemap", "times": 10, "status": 500}],
    )
    with pytest.raises(SourceError):
        client_for(server).discover_tickers()
    assert server.request_count(r"/sitemap") == 3


def test_scale_sitemap_has_111_tickers(run_server):
    dataset = build_scale_dataset(n_items=300, big_item_posts=5)
    server = run_server(dataset)
    refs = client_for(server).discover_tickers()
    assert len(refs) == 111


# -- news items ----------------------------------------------------------------

def test_fetch_news_items_five(run_server):
    items = [
        FixtureItem(id=f"i{k}", published_at=f"2020-03-16T0{k}:00:00Z")
        for k in range(1, 6)
    ]
    server = run_server(FixtureDataset(tickers=[FixtureTicker(id="t1", items=items)]))
    got = client_for(server).fetch_news_items("t1")
    assert [i.id for i in got] == ["i1", "i2", "i3", "i4", "i5"]
    assert got[0].ticker_id == "t1"


def test_fetch_news_items_empty(run_server):
    server = run_server(FixtureDataset(tickers=[FixtureTicker(id="t1", items=[])]))
    assert client_for(server).fetch_news_items("t1") == []


def test_fetch_news_items_404_warns_empty(run_server, caplog):
    server = run_server(FixtureDataset(tickers=[]))
    with caplog.at_level("WARNING"):
        assert client_for(server).fetch_news_items("missing") == []
    assert "missing" in caplog.text


def test_fetch_news_items_first_post_latency(run_server):
    items = [
        FixtureItem(
            id="i1",
            published_at="2020-03-16T08:00:00Z",
            first_post_at="2020-03-16T08:00:25Z",
        )
    ]
    server = run_server(FixtureDataset(tickers=[FixtureTicker(id="t1", items=items)]))
    (item,) = client_for(server).fetch_news_items("t1")
    assert (item.first_post_at - item.published_at).total_seconds() == 25.0


def test_item_id_reachable_via_flatten(run_server):
    server = run_server(single_item_dataset(3))
    client = client_for(server)
    response = client._get("/ticker/t1-corona/items")
    rows = flatten_record(response.json())
    assert any(path.endswith(".id") and value == "i1" for path, value in rows)
    posts = client.fetch_posts("i1")
    assert len(posts) == 3


# -- post pagination -------------------------------------------------------------

def test_fetch_posts_batches_and_request_count(run_server):
    server = run_server(single_item_dataset(58))
    posts = client_for(server).fetch_posts("i1", batch_size=25)
    assert len(posts) == 58
    assert len({p.id for p in posts}) == 58
    assert server.request_count(r"/item/i1/posts") == 3
    assert posts == sorted(posts, key=lambda p: (p.created_at, p.id))
    assert all(p.parent_item == "i1" for p in posts)


def test_fetch_posts_empty_item_single_request(run_server):
    server = run_server(single_item_dataset(0))
    assert client_for(server).fetch_posts("i1") == []
    assert server.request_count(r"/item/i1/posts") == 1


@pytest.mark.parametrize("n_posts,batch", [(1, 1), (10, 10), (10, 3), (25, 25), (7, 100)])
def test_pagination_completeness(run_server, n_posts, batch):
    server = run_server(single_item_dataset(n_posts))
    posts = client_for(server).fetch_posts("i1", batch_size=batch)
    assert len(posts) == n_posts
    assert len({p.id for p in posts}) == n_posts


def test_duplicate_across_boundary_collapses(run_server):
    server = run_server(single_item_dataset(40, duplicate_boundary=True))
    posts = client_for(server).fetch_posts("i1", batch_size=10)
    assert len(posts) == 40
    assert len({p.id for p in posts}) == 40


def test_mid_pagination_failure_resumes_from_last_cursor(run_server):
    server = run_server(
        single_item_dataset(50),
        fail_plan=[{"pattern": r"cursor=c25", "times": 1, "status": 500}],
    )
    posts = client_for(server).fetch_posts("i1", batch_size=25)
    assert len(posts) == 50
    assert server.request_count(r"cursor=c25") == 2


def test_mid_pagination_failure_is_all_or_nothing(run_server):
    server = run_server(
        single_item_dataset(50),
        fail_plan=[{"pattern": r"cursor=c25", "times": 10, "status": 500}],
    )
    with pytest.raises(SourceError):
        client_for(server).fetch_posts("i1", batch_size=25)


def test_continuation_loop_detected(run_server, monkeypatch):
    server = run_server(single_item_dataset(10))

    original = type(server)._send_posts

    def looping(self, handler, item_id, query):
        item = self.dataset.find_item(item_id)
        payload = {
            "posts": [
                {"id": p.id, "createdAt": p.created_at, "author": p.author, "text": p.text}
                for p in item.posts[:5]
            ],
            "next_cursor": "c5",
        }
        self._send_json(handler, payload)

    monkeypatch.setattr(type(server), "_send_posts", looping)
    with pytest.raises(SourceError) as err:
        client_for(server).fetch_posts("i1", batch_size=5)
    assert "loop" in str(err.value)
    monkeypatch.setattr(type(server), "_send_posts", original)


# -- TSV feeds -------------------------------------------------------------------

def sample_posts():
    t0 = datetime(2020, 3, 16, 8, 0, tzinfo=timezone.utc)
    return [
        Post(platform="studentchat", id="s1", created_at=t0, text="hallo zusammen", author="a1"),
        Post(
            platform="studentchat",
            id="s2",
            created_at=t0.replace(hour=9),
            text="mit\ttab und\nzeile und \\backslash\r",
            author=None,
            parent_item="i9",
        ),
    ]


def test_tsv_round_trip(tmp_path):
    path = tmp_path / "posts.tsv"
    posts = sample_posts()
    write_posts_tsv(posts, path)
    assert ingest_tsv(path) == posts


def test_tsv_double_round_trip_is_stable(tmp_path):
    p1, p2 = tmp_path / "a.tsv", tmp_path / "b.tsv"
    write_posts_tsv(sample_posts(), p1)
    write_posts_tsv(ingest_tsv(p1), p2)
    assert p1.read_text(encoding="utf-8") == p2.read_text(encoding="utf-8")


def test_tsv_random_round_trip(tmp_path):
    rng = random.Random(17)
    alphabet = "abßü \t\n\\#@0:焼"
    t0 = datetime(2020, 3, 16, 8, 0, tzinfo=timezone.utc)
    posts = [
        Post(
            platform="studentchat",
            id=f"r{i}",
            created_at=t0,
            text="".join(rng.choice(alphabet) for _ in range(rng.randint(0, 30))),
        )
        for i in range(80)
    ]
    path = tmp_path / "posts.tsv"
    write_posts_tsv(posts, path)
    assert ingest_tsv(path) == posts


def test_tsv_rejects_bad_timestamp(tmp_path):
    path = tmp_path / "posts.tsv"
    path.write_text(
        "platform\tid\tcreated_at\tauthor\tparent_item\ttext\n"
        "studentchat\ts1\t2020-03-16T08:00:00Z\ta\t\tok\n"
        "studentchat\ts2\tgestern\ta\t\tkaputt\n"
        "studentchat\ts3\t2020-03-16T09:00:00Z\t\t\tok\n",
        encoding="utf-8",
    )
    posts = ingest_tsv(path)
    assert [p.id for p in posts] == ["s1", "s3"]
    rejects = (tmp_path / "posts.tsv.rejects").read_text(encoding="utf-8")
    assert "gestern" in rejects and "unparseable" in rejects


def test_tsv_header_error(tmp_path):
    path = tmp_path / "posts.tsv"
    path.write_text("platform\tid\twrong\n", encoding="utf-8")
    with pytest.raises(IngestError):
        ingest_tsv(path)


def test_tsv_duplicate_id_rejected_row(tmp_path):
    path = tmp_path / "posts.tsv"
    path.write_text(
        "platform\tid\tcreated_at\tauthor\tparent_item\ttext\n"
        "studentchat\ts1\t2020-03-16T08:00:00Z\t\t\teins\n"
        "studentchat\ts1\t2020-03-16T08:01:00Z\t\t\tzwei\n",
        encoding="utf-8",
    )
    posts = ingest_tsv(path)
    assert len(posts) == 1
    assert "duplicate" in (tmp_path / "posts.tsv.rejects").read_text(encoding="utf-8")


# -- aggregate feeds --------------------------------------------------------------

def write_aggregates(tmp_path, rows):
    path = tmp_path / "agg.tsv"
    path.write_text(
        "date\tcategory\tposts_total\tposts_matching\n"
        + "".join(f"{r}\n" for r in rows),
        encoding="utf-8",
    )
    return path


def test_aggregates_valid_row(tmp_path):
    rows = ingest_aggregates(write_aggregates(tmp_path, ["2020-03-16\tanxiety\t1000\t62"]))
    assert rows == [AggregateDaily(date(2020, 3, 16), "anxiety", 1000, 62)]


def test_aggregates_reject_matching_above_total(tmp_path):
    path = write_aggregates(
        tmp_path,
        ["2020-03-16\tanxiety\t100\t101", "2020-03-17\tanxiety\t100\t50"],
    )
    rows = ingest_aggregates(path)
    assert len(rows) == 1 and rows[0].date == date(2020, 3, 17)
    assert "posts_matching" in (tmp_path / "agg.tsv.rejects").read_text(encoding="utf-8")


def test_aggregates_duplicate_key_hard_error(tmp_path):
    path = write_aggregates(
        tmp_path,
        ["2020-03-16\tanxiety\t100\t10", "2020-03-16\tanxiety\t100\t11"],
    )
    with pytest.raises(IngestError):
        ingest_aggregates(path)


def test_aggregates_empty_file_with_header(tmp_path):
    assert ingest_aggregates(write_aggregates(tmp_path, [])) == []


def test_scale_corpus_has_10013_items_total(run_server):
    dataset = build_scale_dataset(big_item_posts=3)
    server = run_server(dataset)
    client = client_for(server)
    total = 0
    for ref in client.discover_tickers():
        total += len(client.fetch_news_items(ref))
    assert total == 10013
