"""Operator command line.

Subcommands: ``serve`` (run the local server), ``replay`` (feed recorded
session reports), ``profile`` / ``achievements`` / ``daily`` (inspect or
edit via the running server) and ``simulate`` (generate a synthetic
report).  Exit codes: 0 ok, 2 config/startup, 3 connectivity, 4 domain
rejection.
"""
from __future__ import annotations

import json
import random
import sys
import uuid
from pathlib import Path

import click
import httpx

from . import store
from .catalog import CatalogError, default_catalog, load_catalog
from .model import ModelError, ReportValidationError, SessionReport, validate_report
from .server import (
    DEFAULT_ADDR,
    ENV_ADDR,
    GamificationService,
    ServerConfig,
    create_app,
)

EXIT_CONFIG = 2
EXIT_CONNECT = 3
EXIT_DOMAIN = 4

_LOOPBACK_HOSTS = {"127.0.0.1", "localhost", "::1"}


def _server_url(addr: str) -> str:
    return addr if addr.startswith("http") else f"http://{addr}"


@click.group()
def main():
    """Gamification engine for scripted GUI testing."""


@main.command()
@click.option("--addr", default=None, help=f"bind address (default {DEFAULT_ADDR})")
@click.option("--data-dir", type=click.Path(), default=None, help="state directory")
@click.option("--catalog", "catalog_path", type=click.Path(), default=None, help="catalog JSON file")
@click.option("--allow-external", is_flag=True, help="permit a non-loopback bind address")
def serve(addr, data_dir, catalog_path, allow_external):
    """Run the local ingest server until interrupted."""
    config = ServerConfig.from_env(
        bind_address=addr,
        data_dir=Path(data_dir) if data_dir else None,
        catalog_path=Path(catalog_path) if catalog_path else None,
    )
    if config.host not in _LOOPBACK_HOSTS and not allow_external:
        click.echo(f"refusing non-loopback bind {config.bind_address} without --allow-external",
                   err=True)
        sys.exit(EXIT_CONFIG)
    try:
        app = create_app(config)
    except (CatalogError, store.UnsupportedVersionError, OSError) as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_CONFIG)
    import uvicorn

    click.echo(f"listening on {config.host}:{config.port}")
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    except (OSError, SystemExit):
        click.echo(f"cannot bind {config.bind_address}", err=True)
        sys.exit(EXIT_CONFIG)


def _print_outcome(outcome: dict, names: dict[str, str]) -> None:
    if outcome.get("duplicate"):
        click.echo("duplicate session — no effect")
        return
    for cross in outcome["milestones_crossed"]:
        name = names.get(cross["achievement_id"], cross["achievement_id"])
        click.echo(
            f"{name} ✓ milestone {cross['milestone_index'] + 1} (+{cross['xp_awarded']} XP)"
        )
    daily = outcome.get("daily_progress")
    if daily and daily["completed_now"]:
        click.echo(f"daily task complete (+{daily['xp_awarded']} XP)")
    if outcome["level_after"] > outcome["level_before"]:
        click.echo(f"level up! {outcome['level_before']} → {outcome['level_after']}")
    if not outcome["milestones_crossed"] and outcome["xp_total_awarded"] == 0:
        click.echo("no milestones crossed")


@main.command()
@click.argument("reports", nargs=-1, required=True, type=click.Path(exists=False))
@click.option("--server", "server_addr", envvar=ENV_ADDR, default=DEFAULT_ADDR)
@click.option("--offline", is_flag=True, help="drive the engine in-process against --data-dir")
@click.option("--data-dir", type=click.Path(), default=".")
@click.option("--catalog", "catalog_path", type=click.Path(), default=None)
def replay(reports, server_addr, offline, data_dir, catalog_path):
    """Ingest recorded session reports in argument order."""
    if offline:
        try:
            config = ServerConfig.from_env(
                data_dir=Path(data_dir),
                catalog_path=Path(catalog_path) if catalog_path else None,
            )
            service = GamificationService(config)
        except (CatalogError, store.UnsupportedVersionError) as exc:
            click.echo(str(exc), err=True)
            sys.exit(EXIT_CONFIG)
        names = {a.id: a.name for a in service.catalog.achievements}
        for path in reports:
            outcome = _replay_one_offline(service, path)
            _print_outcome(outcome, names)
        return

    url = _server_url(server_addr)
    try:
        defs = httpx.get(f"{url}/api/v1/achievements", timeout=10).json()
        names = {row["def"]["id"]: row["def"]["name"] for row in defs}
        for path in reports:
            body = _load_report_json(path)
            resp = httpx.post(f"{url}/api/v1/sessions", json=body, timeout=30)
            if resp.status_code != 200:
                click.echo(f"{path}: {resp.json().get('error', resp.text)}", err=True)
                sys.exit(EXIT_DOMAIN)
            _print_outcome(resp.json(), names)
    except httpx.ConnectError:
        click.echo(f"cannot reach server at {url}", err=True)
        sys.exit(EXIT_CONNECT)


def _load_report_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"{path}: {exc}", err=True)
        sys.exit(EXIT_DOMAIN)


def _replay_one_offline(service: GamificationService, path: str) -> dict:
    body = _load_report_json(path)
    try:
        return service.ingest(SessionReport.from_dict(body))
    except (ReportValidationError, ModelError) as exc:
        click.echo(f"{path}: {exc}", err=True)
        sys.exit(EXIT_DOMAIN)


def _get_json(url: str, path: str) -> httpx.Response:
    try:
        return httpx.get(f"{url}{path}", timeout=10)
    except httpx.ConnectError:
        click.echo(f"cannot reach server at {url}", err=True)
        sys.exit(EXIT_CONNECT)


@main.group()
def profile():
    """Inspect or edit the tester profile."""


@profile.command("show")
@click.option("--server", "server_addr", envvar=ENV_ADDR, default=DEFAULT_ADDR)
@click.option("--json", "as_json", is_flag=True)
def profile_show(server_addr, as_json):
    url = _server_url(server_addr)
    resp = _get_json(url, "/api/v1/profile")
    if as_json:
        click.echo(resp.text)
        return
    p = resp.json()
    level = p["level"]
    # Level thresholds come from the default curve; a server running a custom
    # catalog still reports raw xp/level correctly via --json.
    table = default_catalog().level_table.cumulative_xp
    if level < 10:
        click.echo(f"Level {level} — {p['xp']}/{table[level]} XP")
    else:
        click.echo(f"Level {level} — {p['xp']} XP")
    click.echo(f"{p['username']} [{p['title_id']}] icon={p['icon_id']}")
    if p["showcase"]:
        click.echo("showcase: " + ", ".join(p["showcase"]))


@profile.command("set")
@click.argument("field_name", metavar="FIELD",
                type=click.Choice(["username", "icon", "title", "showcase"]))
@click.argument("value")
@click.option("--server", "server_addr", envvar=ENV_ADDR, default=DEFAULT_ADDR)
@click.option("--json", "as_json", is_flag=True)
def profile_set(field_name, value, server_addr, as_json):
    url = _server_url(server_addr)
    key = {"icon": "icon_id", "title": "title_id"}.get(field_name, field_name)
    body: dict = {key: value}
    if field_name == "showcase":
        body = {"showcase": [v for v in value.split(",") if v]}
    try:
        resp = httpx.put(f"{url}/api/v1/profile", json=body, timeout=10)
    except httpx.ConnectError:
        click.echo(f"cannot reach server at {url}", err=True)
        sys.exit(EXIT_CONNECT)
    if resp.status_code != 200:
        click.echo(resp.json().get("error", resp.text), err=True)
        sys.exit(EXIT_DOMAIN)
    if as_json:
        click.echo(resp.text)
    else:
        click.echo(f"{field_name} updated")


@main.command()
@click.option("--server", "server_addr", envvar=ENV_ADDR, default=DEFAULT_ADDR)
@click.option("--project", "project_id", default=None)
@click.option("--json", "as_json", is_flag=True)
def achievements(server_addr, project_id, as_json):
    """List achievements with current progress."""
    url = _server_url(server_addr)
    query = f"?project_id={project_id}" if project_id else ""
    resp = _get_json(url, f"/api/v1/achievements{query}")
    if as_json:
        click.echo(resp.text)
        return
    for row in resp.json():
        d = row["def"]
        prog = row["global_progress"] or row["project_progress"]
        counter = prog["counter"] if prog else 0
        reached = prog["milestones_reached"] if prog else 0
        total = len(d["milestones"])
        click.echo(f"{d['name']:<16} [{d['scope']}] {counter:>6}  milestones {reached}/{total}")


@main.command()
@click.option("--server", "server_addr", envvar=ENV_ADDR, default=DEFAULT_ADDR)
@click.option("--json", "as_json", is_flag=True)
def daily(server_addr, as_json):
    """Show today's daily task."""
    url = _server_url(server_addr)
    resp = _get_json(url, "/api/v1/daily-task")
    if resp.status_code != 200:
        click.echo(resp.json().get("error", resp.text), err=True)
        sys.exit(EXIT_DOMAIN)
    if as_json:
        click.echo(resp.text)
        return
    t = resp.json()
    mark = "done" if t["completed"] else f"{t['counter']}/{t['threshold']}"
    click.echo(f"{t['date']}: {t['achievement_id']} — {mark} (+{t['xp_reward']} XP on completion)")


_SIM_HOSTS = (
    "https://shop.example.com",
    "https://blog.example.org",
    "https://app.testsite.net",
    "https://admin.example.io",
)
_SIM_IDS = ("submit", "search-box", "login", "nav-home", "add-to-cart")
_SIM_NAMES = ("q", "email", "password", "quantity")
_SIM_XPATHS = ("/html/body/div[1]/button", "/html/body/form/input[2]", "/html/body/div[3]/a")

_SIM_BASE_TS = 1_704_067_200_000  # fixed epoch so output is seed-deterministic


@main.command()
@click.option("--pages", default=0, type=click.IntRange(min=0))
@click.option("--clicks", default=0, type=click.IntRange(min=0))
@click.option("--inputs", default=0, type=click.IntRange(min=0))
@click.option("--lookups", default=0, type=click.IntRange(min=0))
@click.option("--tests", default=0, type=click.IntRange(min=0))
@click.option("--fail", "failures", default=0, type=click.IntRange(min=0))
@click.option("--seed", default=0, type=int)
@click.option("--project", "project_id", default="demo-project")
@click.option("--profile", "profile_id", default=store.DEFAULT_PROFILE_ID)
def simulate(pages, clicks, inputs, lookups, tests, failures, seed, project_id, profile_id):
    """Emit a synthetic session report on stdout; deterministic under --seed."""
    if failures > tests:
        click.echo("--fail cannot exceed --tests", err=True)
        sys.exit(EXIT_CONFIG)
    rng = random.Random(seed)
    session_id = str(uuid.UUID(int=rng.getrandbits(128), version=4))
    ts = _SIM_BASE_TS
    test_ids = [f"suite::test_{i}" for i in range(tests)]
    results = [
        {"test_id": tid, "status": "failed" if i < failures else "passed"}
        for i, tid in enumerate(test_ids)
    ]

    def owner(i: int) -> str:
        return test_ids[i % len(test_ids)] if test_ids else ""

    events = []
    n = 0
    for i in range(pages):
        url = f"{_SIM_HOSTS[i % len(_SIM_HOSTS)]}/page{i}"
        events.append({"kind": "navigate", "timestamp": ts, "test_id": owner(n),
                       "url": url, "locator": None, "detail": None})
        ts += 100
        n += 1
    for kind, count, make in (
        ("click", clicks, lambda: _sim_locator(rng)),
        ("send_keys", inputs, lambda: _sim_locator(rng)),
        ("find_element", lookups, lambda: _sim_locator(rng)),
    ):
        for _ in range(count):
            events.append({"kind": kind, "timestamp": ts, "test_id": owner(n),
                           "url": None, "locator": make(), "detail": None})
            ts += 100
            n += 1
    report = {
        "session_id": session_id,
        "project_id": project_id,
        "profile_id": profile_id,
        "started_at": _SIM_BASE_TS,
        "finished_at": ts,
        "events": events,
        "results": results,
    }
    validate_report(SessionReport.from_dict(report))
    click.echo(json.dumps(report, indent=2, sort_keys=True))


def _sim_locator(rng: random.Random) -> dict:
    roll = rng.random()
    if roll < 0.4:
        return {"strategy": "id", "value": rng.choice(_SIM_IDS)}
    if roll < 0.7:
        return {"strategy": "name", "value": rng.choice(_SIM_NAMES)}
    return {"strategy": "xpath", "value": rng.choice(_SIM_XPATHS)}


if __name__ == "__main__":
    main()
