"""CLI verbs, run end to end in an isolated filesystem."""

import json

import click
import pytest
from click.testing import CliRunner

from onionscope.cli import main, parse_duration, parse_roles
from onionscope.frontier import JobKind


def test_parse_duration_units():
    assert parse_duration("90s") == 90.0
    assert parse_duration("15m") == 900.0
    assert parse_duration("36h") == 36 * 3600.0
    assert parse_duration("2d") == 2 * 86400.0
    assert parse_duration("1w") == 604800.0
    assert parse_duration("45") == 45.0
    assert parse_duration("1.5h") == 5400.0
    with pytest.raises(click.BadParameter):
        parse_duration("soon")
    with pytest.raises(click.BadParameter):
        parse_duration("-5m")


def test_parse_roles():
    assert parse_roles("explore") == [JobKind.EXPLORE]
    assert parse_roles("explore, update,check") == \
        [JobKind.EXPLORE, JobKind.UPDATE, JobKind.CHECK]
    with pytest.raises(click.BadParameter):
        parse_roles("explore,render")


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """world generate -> seed load -> crawl run -> analyze run, once."""
    root = tmp_path_factory.mktemp("cli")
    runner = CliRunner()

    def run(*args):
        result = runner.invoke(main, list(args), catch_exceptions=False)
        assert result.exit_code == 0, result.output
        return result.output

    run("world", "generate", "--out", str(root / "world"),
        "--domains", "24", "--seed", "9")
    run("seed", "load", str(root / "world" / "seeds.txt"),
        "--store", str(root / "data"))
    crawl_out = run("crawl", "run", "--world", str(root / "world"),
                    "--store", str(root / "data"), "--duration", "30h")
    analyze_out = run("analyze", "run", "--world", str(root / "world"),
                      "--store", str(root / "data"))
    return root, runner, run, crawl_out, analyze_out


def test_crawl_reports_stats(workspace):
    root, runner, run, crawl_out, analyze_out = workspace
    stats = json.loads(crawl_out)
    assert stats["pages_fetched"] > 0
    assert stats["checks"] > 0
    assert stats["pages_per_minute"] > 0


def test_analyze_reports_stats(workspace):
    root, runner, run, crawl_out, analyze_out = workspace
    stats = json.loads(analyze_out)
    assert stats["domains_classified"] > 0
    assert stats["wallets"] > 0


def test_stats_command(workspace):
    root, runner, run, *_ = workspace
    body = json.loads(run("stats", "--store", str(root / "data")))
    assert body["documents"] > 0
    assert body["domains"] > 0
    assert body["wallets"] > 0


def test_seed_load_skips_junk(workspace, tmp_path):
    root, runner, run, *_ = workspace
    seeds = tmp_path / "seeds.txt"
    seeds.write_text("# comment only\n\nnot a url at all\n")
    result = runner.invoke(main, ["seed", "load", str(seeds),
                                  "--store", str(tmp_path / "s")])
    assert result.exit_code == 0
    assert "0 accepted" in result.output


def test_export_wallets(workspace, tmp_path):
    root, runner, run, *_ = workspace
    out = tmp_path / "wallets.tsv"
    run("export", "--what", "wallets", "--store", str(root / "data"),
        "--out", str(out))
    lines = out.read_text().splitlines()
    assert lines
    for line in lines:
        cols = line.split("\t")
        assert len(cols) == 10
        assert cols[0] in cols[1].split(",")  # wallet id is a member address
        float(cols[7]) and float(cols[8])     # USD columns parse


def test_export_graph_stdout(workspace):
    root, runner, run, *_ = workspace
    text = run("export", "--what", "graph", "--store", str(root / "data"))
    rows = [l.split("\t") for l in text.splitlines() if l]
    assert rows
    for row in rows:
        assert len(row) == 4
        assert row[2] in ("type-1", "type-2")
        assert row[3] in ("type-1", "type-2")


def test_export_domains(workspace):
    root, runner, run, *_ = workspace
    text = run("export", "--what", "domains", "--store", str(root / "data"))
    rows = [l.split("\t") for l in text.splitlines() if l]
    assert rows
    for row in rows:
        assert len(row) == 9
        assert row[0].endswith(".onion")
        assert row[1] in ("v2", "v3", "unknown")


def test_crawl_resumes_from_saved_frontier(workspace):
    """A second crawl run picks up the persisted clock and queues instead
    of starting from zero."""
    root, runner, run, *_ = workspace
    out = run("crawl", "run", "--world", str(root / "world"),
              "--store", str(root / "data"), "--duration", "6h")
    first = json.loads(workspace[3])
    stats = json.loads(out)
    assert stats["started_at"] >= first["ended_at"] > 0
    assert stats["checks"] > 0


def test_crawl_without_world_or_endpoints_fails(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["crawl", "run",
                                  "--store", str(tmp_path / "d")])
    assert result.exit_code != 0
    assert "proxy_endpoints" in result.output


def test_config_file_and_env_override(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"storage_dir = {tmp_path / 'cfg-data'}\n")
    runner = CliRunner()
    seeds = tmp_path / "seeds.txt"
    seeds.write_text("")
    result = runner.invoke(main, ["seed", "load", str(seeds),
                                  "--config", str(cfg)])
    assert result.exit_code == 0
    assert (tmp_path / "cfg-data" / "tables").exists()

    monkeypatch.setenv("ONIONSCOPE_STORAGE_DIR", str(tmp_path / "env-data"))
    result = runner.invoke(main, ["seed", "load", str(seeds),
                                  "--config", str(cfg)])
    assert result.exit_code == 0
    assert (tmp_path / "env-data" / "tables").exists()
