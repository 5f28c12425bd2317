"""pulsemon command line: ingest, analyze, publish, serve, roll back.

Exit codes: 0 success, 1 partial (some source failed but the run
completed), 2 failure.
"""
from __future__ import annotations

import sys
import threading
from pathlib import Path

import click

from . import pipeline
from .config import ConfigError, load_config
from .store import PostStore


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    default=Path("pulsemon.toml"),
    show_default=True,
    help="Path to the pipeline TOML config.",
)
@click.pass_context
def main(ctx: click.Context, config_path: Path) -> None:
    ctx.obj = config_path


def _load(ctx: click.Context):
    try:
        return load_config(ctx.obj)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)


def _run(action):
    try:
        return action()
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


@main.command()
@click.option("--source", "source_name", required=True, help="Source/platform name to ingest.")
@click.pass_context
def ingest(ctx: click.Context, source_name: str) -> None:
    """Fetch one source into the post store (no exports)."""
    cfg = _load(ctx)
    if source_name not in cfg.sources:
        click.echo(f"error: unknown source {source_name!r}", err=True)
        sys.exit(2)
    stats = _run(
        lambda: pipeline.ingest_source(cfg, cfg.sources[source_name], PostStore(cfg.data_dir))
    )
    click.echo(
        f"{source_name}: items_seen={stats['items_seen']} "
        f"items_fetched={stats['items_fetched']} posts_added={stats['posts_added']}"
    )
    if stats["errors"]:
        for err in stats["errors"]:
            click.echo(f"  error: {err}", err=True)
        sys.exit(1)


@main.command()
@click.pass_context
def analyze(ctx: click.Context) -> None:
    """Recompute the series and stats exports from the store."""
    cfg = _load(ctx)
    written = _run(lambda: pipeline.refresh_exports(cfg, sections=("series", "stats")))
    for rel in written:
        click.echo(f"wrote {cfg.output_dir / rel}")


@main.command()
@click.pass_context
def wordcloud(ctx: click.Context) -> None:
    """Recompute the comparative word-cloud exports."""
    cfg = _load(ctx)
    written = _run(lambda: pipeline.refresh_exports(cfg, sections=("clouds",)))
    for rel in written:
        click.echo(f"wrote {cfg.output_dir / rel}")


@main.command("run-daily")
@click.pass_context
def run_daily_cmd(ctx: click.Context) -> None:
    """Run the whole daily routine once: fetch, analyze, export, publish."""
    cfg = _load(ctx)
    entry = _run(lambda: pipeline.run_daily(cfg))
    click.echo(f"run {entry['run_id']} finished: {entry['status']}")
    sys.exit(0 if entry["status"] == "success" else 1)


@main.command("schedule")
@click.pass_context
def schedule_cmd(ctx: click.Context) -> None:
    """Run the daily routine at the configured time, forever."""
    cfg = _load(ctx)
    _run(lambda: pipeline.schedule(cfg))


@main.command("serve")
@click.option("--addr", default="127.0.0.1:8000", show_default=True, help="host:port to bind.")
@click.option(
    "--dir",
    "directory",
    type=click.Path(path_type=Path),
    default=None,
    help="Directory to serve (default: publish dir if present, else output dir).",
)
@click.pass_context
def serve_cmd(ctx: click.Context, addr: str, directory: Path | None) -> None:
    """Serve the artifact directory read-only over HTTP."""
    cfg = _load(ctx)
    if directory is None:
        directory = cfg.publish_dir if cfg.publish_dir.exists() else cfg.output_dir
    host, _, port = addr.rpartition(":")
    try:
        server = pipeline.serve(directory, (host or "127.0.0.1", int(port)))
    except OSError as exc:
        click.echo(f"error: cannot bind {addr}: {exc}", err=True)
        sys.exit(2)
    click.echo(f"serving {directory} at {server.base_url}")
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        server.stop()


@main.command("rollback")
@click.option("--run", "run_id", type=int, required=True, help="Run id to restore.")
@click.pass_context
def rollback_cmd(ctx: click.Context, run_id: int) -> None:
    """Point the publish directory back at an earlier run's artifacts."""
    cfg = _load(ctx)
    entry = _run(lambda: pipeline.rollback(cfg, run_id))
    click.echo(f"publish directory restored to run {run_id} (ledger entry {entry['run_id']})")


if __name__ == "__main__":
    main()
