"""Independent oracles and fixture builders.

Everything here works on plain report dicts with dumb loops -- no calls
into the counting or progress code under test -- so test expectations are
computed by a second, independent route.
"""
from __future__ import annotations

import random
import uuid
from urllib.parse import urlsplit

URL_POOL = [
    "https://one.example.com/a",
    "https://one.example.com/b",
    "https://two.example.org/x",
    "https://two.example.org/y",
    "https://three.example.net/",
    "https://four.example.io/p",
]

XPATHS = ["/html/body/div[1]", "/html/body/form/input[1]", "/html/body/a[3]"]


def make_report(
    session_id=None,
    project_id="proj-a",
    profile_id="tester",
    events=(),
    results=(),
    started_at=1_000,
    finished_at=None,
):
    if finished_at is None:
        finished_at = started_at + 1000 + 100 * len(events)
    return {
        "session_id": session_id or str(uuid.uuid4()),
        "project_id": project_id,
        "profile_id": profile_id,
        "started_at": started_at,
        "finished_at": finished_at,
        "events": list(events),
        "results": list(results),
    }


def ev(kind, ts, url=None, locator=None, test_id=""):
    return {"kind": kind, "timestamp": ts, "test_id": test_id,
            "url": url, "locator": locator, "detail": None}


def loc_xpath(i=0):
    return {"strategy": "xpath", "value": XPATHS[i % len(XPATHS)]}


def f1_report(session_id=None, project_id="proj-a", profile_id="tester"):
    """Fixture F1: 12 clicks, 6 send_keys, 3 distinct pages, 2 passed tests."""
    events = []
    ts = 1_000
    for i in range(3):
        events.append(ev("navigate", ts, url=URL_POOL[i], test_id="suite::t1"))
        ts += 10
    for _ in range(12):
        events.append(ev("click", ts, locator=loc_xpath(), test_id="suite::t1"))
        ts += 10
    for _ in range(6):
        events.append(ev("send_keys", ts, locator=loc_xpath(1), test_id="suite::t2"))
        ts += 10
    results = [
        {"test_id": "suite::t1", "status": "passed"},
        {"test_id": "suite::t2", "status": "passed"},
    ]
    return make_report(session_id=session_id, project_id=project_id,
                       profile_id=profile_id, events=events, results=results)


def random_report(rng: random.Random, n_events=None, project_id=None, profile_id="tester"):
    """A valid random report dict; ≤200 events unless told otherwise."""
    if n_events is None:
        n_events = rng.randrange(0, 201)
    if project_id is None:
        project_id = rng.choice(["proj-a", "proj-b", "proj-c"])
    n_tests = rng.randrange(0, 6)
    test_ids = [f"suite::t{i}" for i in range(n_tests)]
    results = [
        {"test_id": tid, "status": rng.choice(["passed", "failed", "error", "skipped"])}
        for tid in test_ids
    ]
    events = []
    ts = rng.randrange(0, 10_000)
    for _ in range(n_events):
        kind = rng.choice(
            ["navigate", "click", "send_keys", "find_element", "page_load", "other"]
        )
        url = rng.choice(URL_POOL) if kind in ("navigate", "page_load") else None
        locator = loc_xpath(rng.randrange(3)) if kind in ("click", "send_keys", "find_element") else None
        test_id = rng.choice(test_ids) if test_ids and rng.random() < 0.5 else ""
        events.append(ev(kind, ts, url=url, locator=locator, test_id=test_id))
        ts += rng.randrange(0, 50)
    return make_report(project_id=project_id, profile_id=profile_id,
                       events=events, results=results,
                       started_at=0, finished_at=ts + 1)


# ---------------------------------------------------------------------------
# naive recount oracle


def naive_count(report: dict, kind: str) -> int:
    """Recount one counter from a raw report dict, the dumb way."""
    total = 0
    if kind == "pages_visited":
        seen = []
        for e in report["events"]:
            if e["kind"] in ("navigate", "page_load") and e["url"] not in seen:
                seen.append(e["url"])
        return len(seen)
    if kind == "sites_visited":
        seen = []
        for e in report["events"]:
            if e["kind"] in ("navigate", "page_load"):
                host = urlsplit(e["url"]).hostname
                if host is not None and host.lower() not in seen:
                    seen.append(host.lower())
        return len(seen)
    if kind == "clicks":
        for e in report["events"]:
            if e["kind"] == "click":
                total += 1
        return total
    if kind == "inputs":
        for e in report["events"]:
            if e["kind"] == "send_keys":
                total += 1
        return total
    if kind == "element_lookups":
        for e in report["events"]:
            if e["kind"] == "find_element":
                total += 1
        return total
    if kind == "element_interactions":
        return naive_count(report, "clicks") + naive_count(report, "inputs")
    if kind == "tests_run":
        for r in report["results"]:
            if r["status"] in ("passed", "failed", "error"):
                total += 1
        return total
    if kind == "sessions_completed":
        return 1
    return 0


def naive_fixed_tests(history: dict, report: dict) -> list:
    """Replay fixed-test detection over a raw history dict; mutates history."""
    fixed = []
    for r in report["results"]:
        key = (report["project_id"], r["test_id"])
        if history.get(key) in ("failed", "error") and r["status"] == "passed":
            fixed.append(r["test_id"])
    for r in report["results"]:
        history[(report["project_id"], r["test_id"])] = r["status"]
    return sorted(fixed)


def naive_final_counters(reports: list[dict]) -> dict:
    """Expected final (counter_kind, scope_key) totals over a history.

    Duplicated session ids are skipped exactly once, as the engine must.
    """
    totals: dict[tuple[str, str], int] = {}
    history: dict = {}
    seen = set()
    kinds = [
        "pages_visited", "sites_visited", "clicks", "inputs", "element_lookups",
        "element_interactions", "tests_run", "sessions_completed",
    ]
    for report in reports:
        if report["session_id"] in seen:
            continue
        seen.add(report["session_id"])
        fixed = naive_fixed_tests(history, report)
        per_session = {k: naive_count(report, k) for k in kinds}
        per_session["tests_fixed"] = len(fixed)
        for kind, n in per_session.items():
            if n == 0:
                continue
            totals[(kind, "*")] = totals.get((kind, "*"), 0) + n
            totals[(kind, report["project_id"])] = totals.get((kind, report["project_id"]), 0) + n
    return totals


def naive_expected_xp(reports: list[dict], catalog) -> int:
    """Milestone XP an engine must have awarded after this history (no daily)."""
    totals = naive_final_counters(reports)
    xp = 0
    for adef in catalog.achievements:
        if adef.scope == "global":
            scopes = ["*"]
        else:
            scopes = sorted({r["project_id"] for r in reports})
        for scope in scopes:
            counter = totals.get((adef.counter, scope), 0)
            for m, m_xp in zip(adef.milestones, adef.xp_per_milestone):
                if m <= counter:
                    xp += m_xp
    return xp
