"""Achievement rules engine.

Consumes validated session reports and profile-customization actions and
produces a new engine state plus an outcome describing what changed:
counter deltas, crossed milestones, XP, level-ups, unlocks, daily-task
progress and fixed tests.  Every operation is pure -- the input state is
never mutated, so a failed ingest leaves the caller's state intact.

Ordering and tie-breaking are lexicographic by achievement id throughout,
so outcomes are reproducible.
"""
from __future__ import annotations

import datetime as _dt
import hashlib
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .catalog import AchievementDef, Catalog, LevelTable, UnlockCatalog
from .model import (
    COUNTER_KINDS,
    GLOBAL_SCOPE_KEY,
    AchievementProgress,
    DailyTask,
    EngineState,
    Profile,
    SessionReport,
    count_events,
)


class EngineError(Exception):
    """Engine-level failure."""


class CorruptStateError(EngineError):
    """Stored progress references something missing from the catalog."""


class NoDailyCandidatesError(EngineError):
    """No global achievement is eligible for daily-task selection."""


@dataclass(frozen=True)
class MilestoneCross:
    achievement_id: str
    scope_key: str
    milestone_index: int
    xp_awarded: int

    def to_dict(self) -> dict:
        return {
            "achievement_id": self.achievement_id,
            "scope_key": self.scope_key,
            "milestone_index": self.milestone_index,
            "xp_awarded": self.xp_awarded,
        }


@dataclass(frozen=True)
class DailyProgress:
    counter_after: int
    completed_now: bool
    xp_awarded: int

    def to_dict(self) -> dict:
        return {
            "counter_after": self.counter_after,
            "completed_now": self.completed_now,
            "xp_awarded": self.xp_awarded,
        }


@dataclass(frozen=True)
class IngestOutcome:
    """Everything a single ingest (or customization) changed."""

    session_id: str
    level_before: int
    level_after: int
    duplicate: bool = False
    counter_deltas: dict = field(default_factory=dict)
    milestones_crossed: tuple[MilestoneCross, ...] = ()
    daily_progress: Optional[DailyProgress] = None
    daily_skipped: bool = False
    xp_total_awarded: int = 0
    newly_unlocked_icons: tuple[str, ...] = ()
    newly_unlocked_titles: tuple[str, ...] = ()
    fixed_tests: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "duplicate": self.duplicate,
            "counter_deltas": {k: self.counter_deltas.get(k, 0) for k in COUNTER_KINDS},
            "milestones_crossed": [m.to_dict() for m in self.milestones_crossed],
            "daily_progress": self.daily_progress.to_dict() if self.daily_progress else None,
            "daily_skipped": self.daily_skipped,
            "xp_total_awarded": self.xp_total_awarded,
            "level_before": self.level_before,
            "level_after": self.level_after,
            "newly_unlocked_icons": list(self.newly_unlocked_icons),
            "newly_unlocked_titles": list(self.newly_unlocked_titles),
            "fixed_tests": list(self.fixed_tests),
        }


def level_for_xp(xp: int, table: LevelTable) -> int:
    """Level held at a given cumulative XP; monotone, 1..10."""
    return table.level_for(xp)


def award_xp(profile: Profile, xp: int, table: LevelTable) -> tuple[Profile, list[int]]:
    """Add XP and advance the level; XP accumulates without cap at level 10."""
    new_xp = profile.xp + xp
    new_level = level_for_xp(new_xp, table)
    new_level = max(new_level, profile.level)  # level never decreases
    level_ups = list(range(profile.level + 1, new_level + 1))
    return replace(profile, xp=new_xp, level=new_level), level_ups


def resolve_unlocks(
    old_level: int, new_level: int, unlocks: UnlockCatalog
) -> tuple[list[str], list[str]]:
    """Icons and titles granted by moving from old_level to new_level."""
    if not 1 <= old_level <= new_level <= 10:
        raise EngineError(f"bad level transition {old_level} -> {new_level}")
    icons: list[str] = []
    titles: list[str] = []
    for lvl in range(old_level + 1, new_level + 1):
        i, t = unlocks.at_level(lvl)
        icons.extend(i)
        titles.extend(t)
    return icons, titles


def apply_progress(
    progress: AchievementProgress, delta: int, adef: AchievementDef
) -> tuple[AchievementProgress, list[int]]:
    """Advance one progress row; returns the milestone indices just crossed.

    Counters keep growing past the final milestone.
    """
    if delta < 1:
        raise EngineError("delta must be >= 1")
    old = progress.counter
    new = old + delta
    crossed = [i for i, m in enumerate(adef.milestones) if old < m <= new]
    return (
        replace(progress, counter=new, milestones_reached=progress.milestones_reached + len(crossed)),
        crossed,
    )


def detect_fixed_tests(
    history: dict[tuple[str, str], str], report: SessionReport
) -> tuple[list[str], dict[tuple[str, str], str]]:
    """Tests that went failed/error -> passed, plus the updated history.

    Skipped is neutral in both directions.
    """
    fixed = []
    for r in report.results:
        prev = history.get((report.project_id, r.test_id))
        if prev in ("failed", "error") and r.status == "passed":
            fixed.append(r.test_id)
    new_history = dict(history)
    for r in report.results:
        new_history[(report.project_id, r.test_id)] = r.status
    return sorted(fixed), new_history


def select_daily_task(
    date: str | _dt.date, profile_id: str, defs: Iterable[AchievementDef]
) -> DailyTask:
    """Deterministically pick today's task from the eligible global defs.

    The pick is seeded by SHA-256 over "<date>/<profile_id>", so the same
    day and profile always yield the same task.
    """
    date_str = date.isoformat() if isinstance(date, _dt.date) else date
    eligible = sorted(
        (d for d in defs if d.scope == "global" and d.daily_threshold is not None),
        key=lambda d: d.id,
    )
    if not eligible:
        raise NoDailyCandidatesError("no daily candidates")
    digest = hashlib.sha256(f"{date_str}/{profile_id}".encode("utf-8")).digest()
    index = int.from_bytes(digest[:8], "big") % len(eligible)
    chosen = eligible[index]
    return DailyTask(
        date=date_str,
        achievement_id=chosen.id,
        threshold=chosen.daily_threshold,
        counter=0,
        completed=False,
        xp_reward=chosen.xp_per_milestone[0],
    )


def _check_state_refs(state: EngineState, catalog: Catalog) -> None:
    known = catalog.defs_by_id
    for aid, _scope in state.progress:
        if aid not in known:
            raise CorruptStateError(f"corrupt state: progress references unknown achievement {aid!r}")
    if state.daily and state.daily.achievement_id not in known:
        raise CorruptStateError(
            f"corrupt state: daily task references unknown achievement {state.daily.achievement_id!r}"
        )


def _advance_daily(
    daily: Optional[DailyTask],
    catalog: Catalog,
    profile_id: str,
    today: Optional[_dt.date],
    deltas: dict[str, int],
) -> tuple[Optional[DailyTask], Optional[DailyProgress], bool]:
    """Refresh the daily task for today and apply this ingest's deltas.

    A stale task is discarded at date change (no roll-over).  Returns the
    new task, the progress record when its counter moved, and whether the
    step was skipped for lack of a clock date.
    """
    if today is None:
        return daily, None, True
    today_str = today.isoformat()
    if daily is None or daily.date != today_str:
        try:
            daily = select_daily_task(today_str, profile_id, catalog.achievements)
        except NoDailyCandidatesError:
            return None, None, False
    adef = catalog.defs_by_id[daily.achievement_id]
    delta = deltas.get(adef.counter, 0)
    if delta <= 0:
        return daily, None, False
    was_completed = daily.completed
    new_counter = daily.counter + delta
    completed = new_counter >= daily.threshold
    daily = replace(daily, counter=new_counter, completed=completed)
    completed_now = completed and not was_completed
    progress = DailyProgress(
        counter_after=new_counter,
        completed_now=completed_now,
        xp_awarded=daily.xp_reward if completed_now else 0,
    )
    return daily, progress, False


def _apply_deltas(
    state: EngineState,
    catalog: Catalog,
    deltas: dict[str, int],
    scope_project: Optional[str],
    today: Optional[_dt.date],
    session_id: str,
    fixed_tests: list[str],
) -> tuple[EngineState, IngestOutcome]:
    """Shared milestone/XP/unlock machinery for ingests and customizations."""
    _check_state_refs(state, catalog)
    progress = dict(state.progress)
    crossed_all: list[MilestoneCross] = []
    for adef in sorted(catalog.achievements, key=lambda a: a.id):
        delta = deltas.get(adef.counter, 0)
        if delta <= 0:
            continue
        if adef.scope == "global":
            scope_key = GLOBAL_SCOPE_KEY
        elif scope_project is not None:
            scope_key = scope_project
        else:
            continue  # project-scoped def with no project context
        row = progress.get((adef.id, scope_key)) or AchievementProgress(adef.id, scope_key)
        row, crossed = apply_progress(row, delta, adef)
        progress[(adef.id, scope_key)] = row
        crossed_all.extend(
            MilestoneCross(adef.id, scope_key, i, adef.xp_per_milestone[i]) for i in crossed
        )

    daily, daily_progress, daily_skipped = _advance_daily(
        state.daily, catalog, state.profile.profile_id, today, deltas
    )

    xp_total = sum(m.xp_awarded for m in crossed_all)
    if daily_progress:
        xp_total += daily_progress.xp_awarded

    profile = state.profile
    level_before = profile.level
    profile, _ = award_xp(profile, xp_total, catalog.level_table)
    new_icons, new_titles = resolve_unlocks(level_before, profile.level, catalog.unlocks)
    if new_icons or new_titles:
        profile = replace(
            profile,
            unlocked_icons=profile.unlocked_icons | set(new_icons),
            unlocked_titles=profile.unlocked_titles | set(new_titles),
        )

    new_state = replace(state, profile=profile, progress=progress, daily=daily)
    outcome = IngestOutcome(
        session_id=session_id,
        level_before=level_before,
        level_after=profile.level,
        counter_deltas=dict(deltas),
        milestones_crossed=tuple(crossed_all),
        daily_progress=daily_progress,
        daily_skipped=daily_skipped,
        xp_total_awarded=xp_total,
        newly_unlocked_icons=tuple(new_icons),
        newly_unlocked_titles=tuple(new_titles),
        fixed_tests=tuple(fixed_tests),
    )
    return new_state, outcome


def ingest_report(
    state: EngineState,
    catalog: Catalog,
    report: SessionReport,
    today: Optional[_dt.date] = None,
) -> tuple[EngineState, IngestOutcome]:
    """Apply one validated session report; idempotent per session_id.

    A duplicate session id yields the input state unchanged and an
    all-zero outcome flagged ``duplicate``.
    """
    if report.session_id in state.ingested_sessions:
        return state, IngestOutcome(
            session_id=report.session_id,
            duplicate=True,
            level_before=state.profile.level,
            level_after=state.profile.level,
            counter_deltas={k: 0 for k in COUNTER_KINDS},
        )

    deltas = {k: count_events(report, k) for k in COUNTER_KINDS}
    fixed, new_history = detect_fixed_tests(state.test_history, report)
    deltas["tests_fixed"] = len(fixed)

    new_state, outcome = _apply_deltas(
        state, catalog, deltas, report.project_id, today, report.session_id, fixed
    )
    new_state = replace(
        new_state,
        test_history=new_history,
        ingested_sessions=new_state.ingested_sessions | {report.session_id},
    )
    return new_state, outcome


def record_profile_customization(
    state: EngineState,
    catalog: Catalog,
    today: Optional[_dt.date] = None,
) -> tuple[EngineState, IngestOutcome]:
    """Count one profile edit through the same milestone/XP machinery."""
    deltas = {k: 0 for k in COUNTER_KINDS}
    deltas["profile_customizations"] = 1
    state = replace(
        state, profile=replace(state.profile, customization_count=state.profile.customization_count + 1)
    )
    return _apply_deltas(state, catalog, deltas, None, today, "", [])
