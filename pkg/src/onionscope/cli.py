"""Operator CLI: world generation, seeding, crawling, analysis, stats,
exports, and the query API server."""

from __future__ import annotations

import json
import re
import sys
import time
from pathlib import Path
from typing import Optional

import click

from .config import Config, load_config
from .frontier import Frontier, JobKind
from .model import parse_url
from .store import Store
from .webgraph import parse_verdict_feed

_DURATION_RE = re.compile(r"^(\d+(?:\.\d+)?)\s*([smhdw]?)$")
_DURATION_UNITS = {"": 1.0, "s": 1.0, "m": 60.0, "h": 3600.0,
                   "d": 86400.0, "w": 604800.0}


def parse_duration(text: str) -> float:
    """'90s', '15m', '36h', '2d', '1w', or bare seconds."""
    m = _DURATION_RE.match(text.strip().lower())
    if not m:
        raise click.BadParameter(f"cannot parse duration {text!r}")
    return float(m.group(1)) * _DURATION_UNITS[m.group(2)]


def parse_roles(text: str) -> list[JobKind]:
    names = {"explore": JobKind.EXPLORE, "update": JobKind.UPDATE,
             "check": JobKind.CHECK}
    roles = []
    for part in text.split(","):
        part = part.strip().lower()
        if part not in names:
            raise click.BadParameter(
                f"unknown role {part!r}; choose from explore,update,check")
        roles.append(names[part])
    return roles


def _load_cfg(config_path: Optional[str], storage: Optional[str]) -> Config:
    cfg = load_config(config_path)
    if storage:
        cfg.storage_dir = storage
    return cfg


def _open_store(cfg: Config) -> Store:
    if cfg.tables_dir.exists():
        return Store.load(cfg.tables_dir, files_dir=cfg.files_dir)
    return Store(files_dir=cfg.files_dir)


def _restore_frontier(store: Store, cfg: Config):
    from .pipeline import SimClock

    snap = store.frontier_snapshot or {}
    clock = SimClock(float(snap.get("clock", 0.0)))
    frontier = Frontier(
        now_fn=clock.now,
        politeness_delay=cfg.politeness_delay,
        max_inflight_per_domain=cfg.max_inflight_per_domain,
        check_interval=cfg.check_interval,
        update_interval=cfg.update_interval,
        max_attempts=cfg.max_attempts,
    )
    if snap:
        frontier = Frontier.restore(
            snap,
            now_fn=clock.now,
            politeness_delay=cfg.politeness_delay,
            max_inflight_per_domain=cfg.max_inflight_per_domain,
            check_interval=cfg.check_interval,
            update_interval=cfg.update_interval,
            max_attempts=cfg.max_attempts,
        )
    return frontier, clock


def _save(store: Store, frontier: Frontier, clock, cfg: Config) -> None:
    snap = frontier.snapshot()
    snap["clock"] = clock.now()
    store.frontier_snapshot = snap
    store.save(cfg.tables_dir)


_config_option = click.option(
    "--config", "config_path", type=click.Path(exists=True, dir_okay=False),
    default=None, help="Flat key=value config file.")
_store_option = click.option(
    "--store", "storage", type=click.Path(file_okay=False), default=None,
    help="Storage directory (overrides config storage_dir).")


@click.group()
def main() -> None:
    """Crawl and analyze an onion web, then query the results."""


# -- world ---------------------------------------------------------------


@main.group()
def world() -> None:
    """Synthetic world management."""


@world.command("generate")
@click.option("--out", "out_dir", required=True,
              type=click.Path(file_okay=False))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--domains", default=160, show_default=True, type=int)
@click.option("--churn-weeks", default=3, show_default=True, type=int)
def world_generate(out_dir: str, seed: int, domains: int,
                   churn_weeks: int) -> None:
    """Generate a synthetic onion web and write it with its ground truth."""
    from .synthnet import WorldSpec, generate, save_world

    spec = WorldSpec(seed=seed, n_domains=domains, churn_weeks=churn_weeks)
    t0 = time.monotonic()
    w = generate(spec)
    save_world(w, out_dir)
    click.echo(f"world: {domains} domains, {len(w.chain)} txs, "
               f"{len(w.truth.images)} images -> {out_dir} "
               f"({time.monotonic() - t0:.1f}s)")


# -- seed ----------------------------------------------------------------


@main.group()
def seed() -> None:
    """Seed management."""


@seed.command("load")
@click.argument("seed_file", type=click.Path(exists=True, dir_okay=False))
@_store_option
@_config_option
def seed_load(seed_file: str, storage: Optional[str],
              config_path: Optional[str]) -> None:
    """Load seed URLs (one per line; # comments) into the crawl queue."""
    cfg = _load_cfg(config_path, storage)
    store = _open_store(cfg)
    frontier, clock = _restore_frontier(store, cfg)
    urls = []
    for raw in Path(seed_file).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            urls.append(parse_url(line))
        except ValueError:
            click.echo(f"skipping unparseable seed: {line}", err=True)
    accepted = frontier.enqueue_discovered(urls)
    _save(store, frontier, clock, cfg)
    click.echo(f"seeds: {accepted} accepted of {len(urls)} parsed")


# -- crawl ---------------------------------------------------------------


@main.group()
def crawl() -> None:
    """Crawling."""


@crawl.command("run")
@click.option("--roles", default="explore,update,check", show_default=True,
              help="Comma-separated crawler roles to run.")
@click.option("--duration", default="24h", show_default=True,
              help="Simulated crawl window (e.g. 90m, 36h, 2d).")
@click.option("--world", "world_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="Synthetic world directory (omit to use live proxies).")
@click.option("--max-pages", default=None, type=int)
@_store_option
@_config_option
def crawl_run(roles: str, duration: str, world_dir: Optional[str],
              max_pages: Optional[int], storage: Optional[str],
              config_path: Optional[str]) -> None:
    """Run crawler roles until the window closes or the queues drain."""
    from .fetch import HttpProxyBackend, ProxyEndpoint, ProxyPool
    from .pipeline import Crawler

    cfg = _load_cfg(config_path, storage)
    store = _open_store(cfg)
    frontier, clock = _restore_frontier(store, cfg)

    world_dir = world_dir or (cfg.world_dir or None)
    if world_dir:
        from .synthnet import load_world
        from .synthnet.world import SyntheticBackend

        backend = SyntheticBackend(load_world(world_dir), now_fn=clock.now)
        pool = ProxyPool([ProxyEndpoint("synthetic", capacity=8)])
    else:
        specs = cfg.endpoint_specs()
        if not specs:
            raise click.UsageError(
                "no --world and no proxy_endpoints configured")
        host0, port0, _ = specs[0]
        backend = HttpProxyBackend(f"socks5://{host0}:{port0}",
                                   timeout=cfg.request_timeout,
                                   user_agent=cfg.user_agent)
        pool = ProxyPool([ProxyEndpoint(f"{h}:{p}", capacity=c)
                          for h, p, c in specs])

    crawler = Crawler(store, frontier, backend, pool=pool, clock=clock)
    stats = crawler.run(parse_duration(duration), roles=parse_roles(roles),
                        max_pages=max_pages)
    _save(store, frontier, clock, cfg)
    click.echo(json.dumps(stats.to_json(), indent=2))


# -- analyze -------------------------------------------------------------


@main.group()
def analyze() -> None:
    """Analysis passes."""


@analyze.command("run")
@click.option("--world", "world_dir", default=None,
              type=click.Path(exists=True, file_okay=False),
              help="World directory supplying labels, chain, and verdicts.")
@_store_option
@_config_option
def analyze_run(world_dir: Optional[str], storage: Optional[str],
                config_path: Optional[str]) -> None:
    """Classify domains, cluster templates/images, build the web graph and
    wallet tables, and store every aggregate."""
    from .pipeline import TrainingLabels, analyze as run_analysis, labels_from_truth

    cfg = _load_cfg(config_path, storage)
    store = _open_store(cfg)

    labels = TrainingLabels()
    chain_txs: list = []
    rates = None
    verdicts: dict = {}
    world_dir = world_dir or (cfg.world_dir or None)
    if world_dir:
        from .synthnet import load_world

        w = load_world(world_dir)
        labels = labels_from_truth(w.truth)
        chain_txs = w.chain
        rates = w.rates
        verdicts = {v.url: v for v in parse_verdict_feed(w.verdict_feed)}

    stats = run_analysis(store, labels, chain_txs=chain_txs, rates=rates,
                         verdicts=verdicts, config=cfg)
    store.save(cfg.tables_dir)
    click.echo(json.dumps(stats.to_json(), indent=2))


# -- stats / export --------------------------------------------------------


@main.command("stats")
@_store_option
@_config_option
def stats_cmd(storage: Optional[str], config_path: Optional[str]) -> None:
    """Print store counts and stored aggregates as JSON."""
    from .pipeline import summarize

    cfg = _load_cfg(config_path, storage)
    store = _open_store(cfg)
    click.echo(json.dumps(summarize(store), indent=2, default=str))


@main.command("export")
@click.option("--what", type=click.Choice(["wallets", "graph", "domains"]),
              required=True)
@click.option("--out", "out_file", type=click.Path(dir_okay=False),
              default="-", show_default=True, help="Output path ('-' = stdout).")
@_store_option
@_config_option
def export_cmd(what: str, out_file: str, storage: Optional[str],
               config_path: Optional[str]) -> None:
    """Export wallets, graph edges, or domain records as delimited text."""
    from . import webgraph

    cfg = _load_cfg(config_path, storage)
    store = _open_store(cfg)

    if what == "wallets":
        feature_order = ("n_addresses", "n_tx", "n_deposit_tx",
                         "n_withdraw_tx", "deposits_usd", "withdrawals_usd",
                         "balance_usd")
        lines = []
        for wid in sorted(store.wallets):
            w = store.wallets[wid]
            lines.append("\t".join(
                (w.wallet_id, ",".join(w.addresses), ",".join(w.labels))
                + tuple(w.features.get(k, "") for k in feature_order)))
        text = "\n".join(lines) + ("\n" if lines else "")
    elif what == "graph":
        graph = webgraph.build(store.documents.values())
        text = webgraph.export_edge_list(graph)
    else:
        lines = []
        for host in sorted(store.domains):
            rec = store.domains[host]
            lines.append("\t".join((
                rec.domain, rec.version,
                rec.language or "", rec.category or "",
                "" if rec.illicit is None else str(int(rec.illicit)),
                "" if rec.tracking is None else str(int(rec.tracking)),
                "" if rec.template_cluster_id is None
                else str(rec.template_cluster_id),
                ",".join(rec.attributed_addresses),
                str(rec.page_count),
            )))
        text = "\n".join(lines) + ("\n" if lines else "")

    if out_file == "-":
        sys.stdout.write(text)
    else:
        Path(out_file).write_text(text)
        click.echo(f"wrote {out_file}")


# -- serve ----------------------------------------------------------------


@main.group()
def serve() -> None:
    """Serving."""


@serve.command("api")
@click.option("--host", default=None, help="Bind address.")
@click.option("--port", default=None, type=int)
@_store_option
@_config_option
def serve_api(host: Optional[str], port: Optional[int],
              storage: Optional[str], config_path: Optional[str]) -> None:
    """Serve the read-only /v1 query API over the stored analysis state."""
    import uvicorn

    from .api import create_app

    cfg = _load_cfg(config_path, storage)
    store = _open_store(cfg)
    app = create_app(store)
    uvicorn.run(app, host=host or cfg.api_host, port=port or cfg.api_port,
                log_level="warning")


if __name__ == "__main__":
    main()
