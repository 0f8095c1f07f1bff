"""Core domain types for the gamification engine.

Everything here is an immutable value: events, session reports, tester
profiles, achievement progress rows and the aggregate engine state.  The
canonical serialized form of each type is a JSON object with snake_case
keys; timestamps are UTC milliseconds and enumerations are lowercase
strings.  Locators are opaque identification payloads -- nothing in this
module touches a DOM or evaluates an XPath.
"""
from __future__ import annotations

import uuid
from dataclasses import dataclass, field, replace
from typing import Optional
from urllib.parse import urlsplit

EVENT_KINDS = (
    "navigate",
    "click",
    "send_keys",
    "find_element",
    "page_load",
    "test_start",
    "test_end",
    "other",
)

# Kinds that must carry a URL / a locator to be a valid observation.
_URL_KINDS = frozenset({"navigate", "page_load"})
_LOCATOR_KINDS = frozenset({"click", "send_keys", "find_element"})

RESULT_STATUSES = ("passed", "failed", "error", "skipped")

COUNTER_KINDS = (
    "pages_visited",
    "sites_visited",
    "clicks",
    "inputs",
    "element_lookups",
    "element_interactions",
    "tests_run",
    "tests_fixed",
    "profile_customizations",
    "sessions_completed",
)

LOCATOR_STRATEGIES = ("id", "name", "xpath")

GLOBAL_SCOPE_KEY = "*"


class ModelError(ValueError):
    """Invalid domain value."""


class LocatorError(ModelError):
    """No usable locator candidate."""


class ReportValidationError(ModelError):
    """A session report violates an invariant.

    ``field`` names the offending field for wire-level diagnostics.
    """

    def __init__(self, field_name: str, reason: str):
        super().__init__(f"invalid report: {field_name}, {reason}")
        self.field = field_name
        self.reason = reason


def _require(cond: bool, field_name: str, reason: str) -> None:
    if not cond:
        raise ReportValidationError(field_name, reason)


@dataclass(frozen=True)
class Locator:
    """Identifying property of a page element (id, name or xpath)."""

    strategy: str
    value: str

    def __post_init__(self):
        if self.strategy not in LOCATOR_STRATEGIES:
            raise ModelError(f"unknown locator strategy {self.strategy!r}")
        if not self.value:
            raise ModelError("locator value must be non-empty")
        if self.strategy == "xpath" and self.value[0] not in "/(.":
            raise ModelError(f"xpath locator must start with '/', '(' or '.': {self.value!r}")

    def to_dict(self) -> dict:
        return {"strategy": self.strategy, "value": self.value}

    @classmethod
    def from_dict(cls, d: dict) -> "Locator":
        return cls(strategy=d.get("strategy", ""), value=d.get("value", ""))


def select_locator(
    id: Optional[str] = None,
    name: Optional[str] = None,
    xpath: Optional[str] = None,
) -> Locator:
    """Pick the first usable candidate, in priority order id, name, xpath.

    Empty strings count as absent; raises :class:`LocatorError` when all
    three candidates are missing.
    """
    if id:
        return Locator("id", id)
    if name:
        return Locator("name", name)
    if xpath:
        return Locator("xpath", xpath)
    raise LocatorError("no locator available")


@dataclass(frozen=True)
class TestEvent:
    """One observed WebDriver-level action."""

    kind: str
    timestamp: int
    test_id: str = ""
    url: Optional[str] = None
    locator: Optional[Locator] = None
    detail: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "timestamp": self.timestamp,
            "test_id": self.test_id,
            "url": self.url,
            "locator": self.locator.to_dict() if self.locator else None,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TestEvent":
        loc = d.get("locator") or None
        return cls(
            kind=d.get("kind", ""),
            timestamp=d.get("timestamp", 0),
            test_id=d.get("test_id") or "",
            url=d.get("url") or None,
            locator=Locator.from_dict(loc) if loc else None,
            detail=d.get("detail") or None,
        )


@dataclass(frozen=True)
class TestResult:
    """Terminal status of one test within a session."""

    test_id: str
    status: str

    def to_dict(self) -> dict:
        return {"test_id": self.test_id, "status": self.status}

    @classmethod
    def from_dict(cls, d: dict) -> "TestResult":
        return cls(test_id=d.get("test_id", ""), status=d.get("status", ""))


@dataclass(frozen=True)
class SessionReport:
    """One test run's events plus per-test results: the unit of ingestion."""

    session_id: str
    project_id: str
    profile_id: str
    started_at: int
    finished_at: int
    events: tuple[TestEvent, ...] = ()
    results: tuple[TestResult, ...] = ()

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "project_id": self.project_id,
            "profile_id": self.profile_id,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "events": [e.to_dict() for e in self.events],
            "results": [r.to_dict() for r in self.results],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SessionReport":
        if not isinstance(d, dict):
            raise ReportValidationError("body", "report must be a JSON object")
        try:
            events = tuple(TestEvent.from_dict(e) for e in d.get("events", []))
        except ModelError as exc:
            raise ReportValidationError("events", str(exc)) from exc
        results = tuple(TestResult.from_dict(r) for r in d.get("results", []))
        return cls(
            session_id=d.get("session_id", ""),
            project_id=d.get("project_id", ""),
            profile_id=d.get("profile_id", ""),
            started_at=d.get("started_at", 0),
            finished_at=d.get("finished_at", 0),
            events=events,
            results=results,
        )


def validate_report(report: SessionReport) -> SessionReport:
    """Check every report invariant and return the normalized report.

    Events are stably sorted by timestamp; semantic violations are
    rejected, never repaired.  Idempotent: validating a validated report
    returns an equal report.
    """
    _require(bool(report.session_id), "session_id", "must be non-empty")
    try:
        uuid.UUID(report.session_id)
    except (ValueError, AttributeError, TypeError):
        raise ReportValidationError("session_id", "must be a UUID string")
    _require(bool(report.project_id), "project_id", "must be non-empty")
    _require(bool(report.profile_id), "profile_id", "must be non-empty")
    _require(isinstance(report.started_at, int), "started_at", "must be an integer (UTC ms)")
    _require(isinstance(report.finished_at, int), "finished_at", "must be an integer (UTC ms)")
    _require(report.started_at <= report.finished_at, "finished_at", "must be >= started_at")

    result_ids = set()
    for r in report.results:
        _require(bool(r.test_id), "results.test_id", "must be non-empty")
        _require(r.status in RESULT_STATUSES, "results.status", f"unknown status {r.status!r}")
        _require(r.test_id not in result_ids, "results.test_id", f"duplicate result for {r.test_id!r}")
        result_ids.add(r.test_id)

    for e in report.events:
        _require(e.kind in EVENT_KINDS, "events.kind", f"unknown kind {e.kind!r}")
        _require(isinstance(e.timestamp, int), "events.timestamp", "must be an integer (UTC ms)")
        if e.kind in _URL_KINDS:
            _require(bool(e.url), "events.url", f"{e.kind} event requires a url")
            _require(bool(urlsplit(e.url).scheme), "events.url", f"url must be absolute: {e.url!r}")
        if e.kind in _LOCATOR_KINDS:
            _require(e.locator is not None, "events.locator", f"{e.kind} event requires a locator")
        if e.test_id:
            _require(e.test_id in result_ids, "events.test_id",
                     f"{e.test_id!r} has no matching result")

    events = tuple(sorted(report.events, key=lambda e: e.timestamp))
    return replace(report, events=events)


def host_of(url: str) -> Optional[str]:
    """Lowercased hostname of a URL, or None when it has no host part."""
    host = urlsplit(url).hostname
    return host.lower() if host else None


def count_events(report: SessionReport, counter: str) -> int:
    """Count one kind of activity in a validated report.

    Pure and deterministic; ``tests_fixed`` and ``profile_customizations``
    are never derivable from raw events and always count 0 here.
    """
    if counter not in COUNTER_KINDS:
        raise ModelError(f"unknown counter kind {counter!r}")
    events = report.events
    if counter == "pages_visited":
        return len({e.url for e in events if e.kind in _URL_KINDS})
    if counter == "sites_visited":
        hosts = {host_of(e.url) for e in events if e.kind in _URL_KINDS}
        hosts.discard(None)
        return len(hosts)
    if counter == "clicks":
        return sum(1 for e in events if e.kind == "click")
    if counter == "inputs":
        return sum(1 for e in events if e.kind == "send_keys")
    if counter == "element_lookups":
        return sum(1 for e in events if e.kind == "find_element")
    if counter == "element_interactions":
        return sum(1 for e in events if e.kind in ("click", "send_keys"))
    if counter == "tests_run":
        return sum(1 for r in report.results if r.status in ("passed", "failed", "error"))
    if counter == "sessions_completed":
        return 1
    return 0  # tests_fixed, profile_customizations: computed from history, not events


@dataclass(frozen=True)
class AchievementProgress:
    """Mutable-counter state against one achievement under one scope key."""

    achievement_id: str
    scope_key: str
    counter: int = 0
    milestones_reached: int = 0

    def to_dict(self) -> dict:
        return {
            "achievement_id": self.achievement_id,
            "scope_key": self.scope_key,
            "counter": self.counter,
            "milestones_reached": self.milestones_reached,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AchievementProgress":
        return cls(
            achievement_id=d["achievement_id"],
            scope_key=d["scope_key"],
            counter=int(d.get("counter", 0)),
            milestones_reached=int(d.get("milestones_reached", 0)),
        )


@dataclass(frozen=True)
class Profile:
    """Tester identity: name, cosmetics, XP, level and showcase."""

    profile_id: str
    username: str
    level: int = 1
    xp: int = 0
    icon_id: str = ""
    title_id: str = ""
    showcase: tuple[str, ...] = ()
    unlocked_icons: frozenset[str] = frozenset()
    unlocked_titles: frozenset[str] = frozenset()
    customization_count: int = 0

    def __post_init__(self):
        if not self.username:
            raise ModelError("username must be non-empty")
        if not 1 <= self.level <= 10:
            raise ModelError(f"level must be 1..10, got {self.level}")
        if self.xp < 0:
            raise ModelError("xp must be non-negative")
        if len(self.showcase) > 5:
            raise ModelError("showcase holds at most 5 achievements")

    def to_dict(self) -> dict:
        return {
            "profile_id": self.profile_id,
            "username": self.username,
            "level": self.level,
            "xp": self.xp,
            "icon_id": self.icon_id,
            "title_id": self.title_id,
            "showcase": list(self.showcase),
            "unlocked_icons": sorted(self.unlocked_icons),
            "unlocked_titles": sorted(self.unlocked_titles),
            "customization_count": self.customization_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Profile":
        return cls(
            profile_id=d["profile_id"],
            username=d["username"],
            level=int(d["level"]),
            xp=int(d["xp"]),
            icon_id=d.get("icon_id", ""),
            title_id=d.get("title_id", ""),
            showcase=tuple(d.get("showcase", [])),
            unlocked_icons=frozenset(d.get("unlocked_icons", [])),
            unlocked_titles=frozenset(d.get("unlocked_titles", [])),
            customization_count=int(d.get("customization_count", 0)),
        )


@dataclass(frozen=True)
class DailyTask:
    """A date-keyed, reduced-threshold instance of a global achievement."""

    date: str
    achievement_id: str
    threshold: int
    counter: int = 0
    completed: bool = False
    xp_reward: int = 0

    def __post_init__(self):
        if (self.counter >= self.threshold) != self.completed:
            raise ModelError("daily task completed flag inconsistent with counter")

    def to_dict(self) -> dict:
        return {
            "date": self.date,
            "achievement_id": self.achievement_id,
            "threshold": self.threshold,
            "counter": self.counter,
            "completed": self.completed,
            "xp_reward": self.xp_reward,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DailyTask":
        return cls(
            date=d["date"],
            achievement_id=d["achievement_id"],
            threshold=int(d["threshold"]),
            counter=int(d.get("counter", 0)),
            completed=bool(d.get("completed", False)),
            xp_reward=int(d.get("xp_reward", 0)),
        )


@dataclass(frozen=True)
class EngineState:
    """Aggregate persistent state: profile, progress rows, test history."""

    profile: Profile
    schema_version: int = 1
    progress: dict[tuple[str, str], AchievementProgress] = field(default_factory=dict)
    test_history: dict[tuple[str, str], str] = field(default_factory=dict)
    ingested_sessions: frozenset[str] = frozenset()
    daily: Optional[DailyTask] = None

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "profile": self.profile.to_dict(),
            "progress": [self.progress[k].to_dict() for k in sorted(self.progress)],
            "test_history": [
                {"project_id": p, "test_id": t, "status": self.test_history[(p, t)]}
                for p, t in sorted(self.test_history)
            ],
            "ingested_sessions": sorted(self.ingested_sessions),
            "daily": self.daily.to_dict() if self.daily else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EngineState":
        progress = {}
        for row in d.get("progress", []):
            p = AchievementProgress.from_dict(row)
            progress[(p.achievement_id, p.scope_key)] = p
        history = {
            (h["project_id"], h["test_id"]): h["status"] for h in d.get("test_history", [])
        }
        daily = d.get("daily")
        return cls(
            schema_version=int(d.get("schema_version", 1)),
            profile=Profile.from_dict(d["profile"]),
            progress=progress,
            test_history=history,
            ingested_sessions=frozenset(d.get("ingested_sessions", [])),
            daily=DailyTask.from_dict(daily) if daily else None,
        )
