"""Durable engine-state storage.

One JSON document per profile, written with a temp-file-then-rename so an
interrupted save leaves either the old or the new complete file.  The
serialized form is canonical (sorted keys, fixed layout): identical states
produce identical bytes, and a save of an unchanged state leaves the file
untouched.
"""
from __future__ import annotations

import json
import logging
import os
import time
from pathlib import Path
from typing import Optional

from .catalog import Catalog
from .model import EngineState, ModelError, Profile

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

DEFAULT_USERNAME = "tester"
DEFAULT_PROFILE_ID = "tester"


class StoreError(Exception):
    """Persistence failure."""


class UnsupportedVersionError(StoreError):
    """State file uses a schema this build does not understand."""


def fresh_state(
    catalog: Catalog,
    profile_id: str = DEFAULT_PROFILE_ID,
    username: str = DEFAULT_USERNAME,
) -> EngineState:
    """Default state for a brand-new tester: level 1, level-1 cosmetics."""
    icons, titles = catalog.unlocks.at_level(1)
    profile = Profile(
        profile_id=profile_id,
        username=username,
        level=1,
        xp=0,
        icon_id=icons[0],
        title_id=titles[0],
        unlocked_icons=frozenset(icons),
        unlocked_titles=frozenset(titles),
    )
    return EngineState(profile=profile)


def canonical_state_json(state: EngineState) -> str:
    """Deterministic serialization of a state (no envelope)."""
    return json.dumps(state.to_dict(), sort_keys=True, indent=2) + "\n"


def _document_json(state: EngineState, saved_at_ms: int) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "saved_at": saved_at_ms,
        "state": state.to_dict(),
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def save_state(path: str | Path, state: EngineState, saved_at_ms: Optional[int] = None) -> None:
    """Atomically persist a state document.

    Skips the write entirely when the on-disk state already equals the new
    one, so repeated saves of the same state are byte-identical no-ops.
    """
    p = Path(path)
    new_state_dict = state.to_dict()
    if p.exists():
        try:
            existing = json.loads(p.read_text(encoding="utf-8"))
            if existing.get("state") == new_state_dict:
                return
        except (json.JSONDecodeError, OSError):
            pass  # unreadable previous file: overwrite it
    if saved_at_ms is None:
        saved_at_ms = int(time.time() * 1000)
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_name(p.name + f".tmp.{os.getpid()}")
    try:
        with open(tmp, "w", encoding="utf-8") as f:
            f.write(_document_json(state, saved_at_ms))
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, p)
    except OSError:
        try:
            tmp.unlink(missing_ok=True)
        finally:
            pass
        raise


def _backup_corrupt(p: Path) -> Path:
    backup = p.with_name(f"{p.name}.{int(time.time())}.corrupt")
    os.replace(p, backup)
    return backup


def load_state(
    path: str | Path,
    catalog: Catalog,
    profile_id: str = DEFAULT_PROFILE_ID,
) -> EngineState:
    """Load a state document, or create a fresh default state.

    An unparseable or invariant-violating file is renamed aside with a
    ``.corrupt`` suffix and replaced by a fresh state; an unknown schema
    version raises without touching the file.
    """
    p = Path(path)
    if not p.exists():
        return fresh_state(catalog, profile_id=profile_id)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
        if not isinstance(doc, dict) or "state" not in doc:
            raise ValueError("not a state document")
    except (json.JSONDecodeError, ValueError, OSError) as exc:
        backup = _backup_corrupt(p)
        log.warning("corrupt state file %s: %s; backed up to %s and reset", p, exc, backup)
        return fresh_state(catalog, profile_id=profile_id)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise UnsupportedVersionError(f"unsupported version: {version!r}")
    try:
        state = EngineState.from_dict(doc["state"])
        _check_invariants(state, catalog)
    except (ModelError, KeyError, TypeError, ValueError) as exc:
        backup = _backup_corrupt(p)
        log.warning("corrupt state file %s: %s; backed up to %s and reset", p, exc, backup)
        return fresh_state(catalog, profile_id=profile_id)
    return state


def _check_invariants(state: EngineState, catalog: Catalog) -> None:
    defs = catalog.defs_by_id
    table = catalog.level_table.cumulative_xp
    profile = state.profile
    if profile.xp < table[profile.level - 1]:
        raise ModelError("profile xp below level requirement")
    if profile.level < 10 and profile.xp >= table[profile.level]:
        raise ModelError("profile xp above level bound")
    for (aid, _scope), row in state.progress.items():
        adef = defs.get(aid)
        if adef is None:
            raise ModelError(f"progress references unknown achievement {aid!r}")
        expected = sum(1 for m in adef.milestones if m <= row.counter)
        if row.milestones_reached != expected:
            raise ModelError(f"milestones_reached inconsistent for {aid!r}")
    if state.daily and state.daily.achievement_id not in defs:
        raise ModelError("daily task references unknown achievement")
