from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

# one line per acceptance criterion, printed in the terminal summary
acceptance_details: dict[str, str] = {}
acceptance_lines: list[str] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    detail = acceptance_details.get(name, name)
    acceptance_lines.append(f"{detail}: {'PASS' if report.passed else 'FAIL'}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)

from pulsemon.fixture_server import (
    FixtureDataset,
    FixtureItem,
    FixturePost,
    FixtureServer,
    FixtureTicker,
)

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def make_posts(item_id: str, n: int, start: str = "2020-03-16T08:00:00Z", step: int = 7):
    t0 = datetime.fromisoformat(start.replace("Z", "+00:00"))
    return [
        FixturePost(
            id=f"{item_id}-p{i:04d}",
            created_at=(t0 + timedelta(seconds=step * i)).strftime("%Y-%m-%dT%H:%M:%SZ"),
            text=f"beitrag {i}",
            author=f"u{i % 5}",
        )
        for i in range(n)
    ]


def single_item_dataset(n_posts: int, duplicate_boundary: bool = False) -> FixtureDataset:
    item = FixtureItem(
        id="i1",
        published_at="2020-03-16T08:00:00Z",
        first_post_at="2020-03-16T08:00:00Z" if n_posts else None,
        posts=make_posts("i1", n_posts),
    )
    return FixtureDataset(
        tickers=[FixtureTicker(id="t1-corona", items=[item])],
        duplicate_boundary=duplicate_boundary,
    )


@pytest.fixture
def run_server():
    servers: list[FixtureServer] = []

    def _run(dataset: FixtureDataset, fail_plan: list[dict] | None = None) -> FixtureServer:
        server = FixtureServer(dataset, fail_plan=fail_plan).start()
        servers.append(server)
        return server

    yield _run
    for server in servers:
        server.stop()
