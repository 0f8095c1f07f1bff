"""Achievement catalog: definitions, level table and unlockable content.

The catalog is data, not code: a JSON document loaded at startup and fully
overridable.  The built-in default ships ten achievements (four
project-scoped, six global), a triangular ten-level XP curve and one or
more icons/titles per level.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .model import COUNTER_KINDS

CORE_DRIVES = (
    "accomplishment",
    "ownership",
    "social_influence",
    "unpredictability",
    "empowerment",
    "meaning",
    "scarcity",
    "avoidance",
)

MAX_LEVEL = 10


class CatalogError(ValueError):
    """Catalog document failed validation; message names the field."""


def _check(cond: bool, field: str, reason: str) -> None:
    if not cond:
        raise CatalogError(f"catalog invalid: {field}: {reason}")


@dataclass(frozen=True)
class AchievementDef:
    """A milestone-bearing rule over one counter kind."""

    id: str
    name: str
    description: str
    icon_ref: str
    scope: str
    counter: str
    milestones: tuple[int, ...]
    xp_per_milestone: tuple[int, ...]
    daily_threshold: Optional[int] = None
    core_drive: str = "accomplishment"

    def __post_init__(self):
        f = f"achievements[{self.id or '?'}]"
        _check(bool(self.id), f, "id must be non-empty")
        _check(self.scope in ("global", "project"), f, f"unknown scope {self.scope!r}")
        _check(self.counter in COUNTER_KINDS, f, f"unknown counter {self.counter!r}")
        _check(self.core_drive in CORE_DRIVES, f, f"unknown core drive {self.core_drive!r}")
        _check(1 <= len(self.milestones) <= 5, f, "1..5 milestones required")
        _check(all(m > 0 for m in self.milestones), f, "milestones must be positive")
        _check(
            all(a < b for a, b in zip(self.milestones, self.milestones[1:])),
            f, "milestones must be strictly increasing",
        )
        _check(
            len(self.xp_per_milestone) == len(self.milestones),
            f, "xp_per_milestone length must match milestones",
        )
        _check(all(x > 0 for x in self.xp_per_milestone), f, "xp values must be positive")
        if self.daily_threshold is not None:
            _check(self.daily_threshold > 0, f, "daily_threshold must be positive")
            ok = self.daily_threshold < self.milestones[0] or (
                self.scope == "global" and self.daily_threshold <= self.milestones[0]
            )
            _check(ok, f, "daily_threshold must be lower than the first milestone")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "icon_ref": self.icon_ref,
            "scope": self.scope,
            "counter": self.counter,
            "milestones": list(self.milestones),
            "xp_per_milestone": list(self.xp_per_milestone),
            "daily_threshold": self.daily_threshold,
            "core_drive": self.core_drive,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AchievementDef":
        return cls(
            id=d.get("id", ""),
            name=d.get("name", ""),
            description=d.get("description", ""),
            icon_ref=d.get("icon_ref", ""),
            scope=d.get("scope", ""),
            counter=d.get("counter", ""),
            milestones=tuple(d.get("milestones", [])),
            xp_per_milestone=tuple(d.get("xp_per_milestone", [])),
            daily_threshold=d.get("daily_threshold"),
            core_drive=d.get("core_drive", "accomplishment"),
        )


@dataclass(frozen=True)
class LevelTable:
    """Cumulative XP needed to hold each level 1..10."""

    cumulative_xp: tuple[int, ...]

    def __post_init__(self):
        _check(len(self.cumulative_xp) == MAX_LEVEL, "level_table", "exactly 10 entries required")
        _check(self.cumulative_xp[0] == 0, "level_table", "first entry must be 0")
        _check(
            all(a < b for a, b in zip(self.cumulative_xp, self.cumulative_xp[1:])),
            "level_table", "entries must be strictly increasing",
        )

    def level_for(self, xp: int) -> int:
        """Largest level whose cumulative requirement is <= xp, capped at 10."""
        level = 1
        for n in range(MAX_LEVEL, 0, -1):
            if xp >= self.cumulative_xp[n - 1]:
                level = n
                break
        return level

    def to_dict(self) -> dict:
        return {"cumulative_xp": list(self.cumulative_xp)}

    @classmethod
    def from_dict(cls, d: dict) -> "LevelTable":
        return cls(cumulative_xp=tuple(d.get("cumulative_xp", [])))


@dataclass(frozen=True)
class UnlockCatalog:
    """Icons and titles keyed by the level that unlocks them."""

    icons: dict[int, tuple[str, ...]]
    titles: dict[int, tuple[str, ...]]

    def __post_init__(self):
        for kind, table in (("icons", self.icons), ("titles", self.titles)):
            ids = [i for lvl in table for i in table[lvl]]
            _check(len(ids) == len(set(ids)), f"unlock_catalog.{kind}", "ids must be unique")
            _check(
                all(1 <= lvl <= MAX_LEVEL for lvl in table),
                f"unlock_catalog.{kind}", "levels must be 1..10",
            )
            for lvl in range(1, MAX_LEVEL + 1):
                reachable = [i for l2 in table if l2 <= lvl for i in table[l2]]
                _check(bool(reachable), f"unlock_catalog.{kind}",
                       f"no entry reachable at level {lvl}")
        overlap = {i for lvl in self.icons for i in self.icons[lvl]} & {
            t for lvl in self.titles for t in self.titles[lvl]
        }
        _check(not overlap, "unlock_catalog", f"icon/title id collision: {sorted(overlap)}")

    def at_level(self, level: int) -> tuple[list[str], list[str]]:
        """Icons and titles that unlock exactly at this level, in catalog order."""
        return list(self.icons.get(level, ())), list(self.titles.get(level, ()))

    def up_to_level(self, level: int) -> tuple[list[str], list[str]]:
        icons = [i for lvl in sorted(self.icons) if lvl <= level for i in self.icons[lvl]]
        titles = [t for lvl in sorted(self.titles) if lvl <= level for t in self.titles[lvl]]
        return icons, titles

    def required_levels(self) -> tuple[list[tuple[str, int]], list[tuple[str, int]]]:
        icons = [(i, lvl) for lvl in sorted(self.icons) for i in self.icons[lvl]]
        titles = [(t, lvl) for lvl in sorted(self.titles) for t in self.titles[lvl]]
        return icons, titles

    def to_dict(self) -> dict:
        return {
            "icons": {str(lvl): list(self.icons[lvl]) for lvl in sorted(self.icons)},
            "titles": {str(lvl): list(self.titles[lvl]) for lvl in sorted(self.titles)},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UnlockCatalog":
        return cls(
            icons={int(k): tuple(v) for k, v in d.get("icons", {}).items()},
            titles={int(k): tuple(v) for k, v in d.get("titles", {}).items()},
        )


@dataclass(frozen=True)
class Catalog:
    """Everything loaded at startup: defs, level curve and unlockables."""

    achievements: tuple[AchievementDef, ...]
    level_table: LevelTable
    unlocks: UnlockCatalog
    schema_version: int = 1

    def __post_init__(self):
        ids = [a.id for a in self.achievements]
        _check(len(ids) == len(set(ids)), "achievements", "ids must be unique")

    @property
    def defs_by_id(self) -> dict[str, AchievementDef]:
        return {a.id: a for a in self.achievements}

    def daily_candidates(self) -> list[AchievementDef]:
        """Global defs with a daily threshold, sorted by id."""
        return sorted(
            (a for a in self.achievements
             if a.scope == "global" and a.daily_threshold is not None),
            key=lambda a: a.id,
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "achievements": [a.to_dict() for a in self.achievements],
            "level_table": self.level_table.to_dict(),
            "unlock_catalog": self.unlocks.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Catalog":
        _check(isinstance(d, dict), "document", "must be a JSON object")
        _check("achievements" in d, "achievements", "missing")
        _check("level_table" in d, "level_table", "missing")
        _check("unlock_catalog" in d, "unlock_catalog", "missing")
        return cls(
            schema_version=int(d.get("schema_version", 1)),
            achievements=tuple(AchievementDef.from_dict(a) for a in d["achievements"]),
            level_table=LevelTable.from_dict(d["level_table"]),
            unlocks=UnlockCatalog.from_dict(d["unlock_catalog"]),
        )


DEFAULT_LEVEL_TABLE = LevelTable(
    cumulative_xp=(0, 100, 300, 600, 1000, 1500, 2100, 2800, 3600, 4500)
)

_XP_LADDER = (25, 50, 100)


def _xp_for(milestones: tuple[int, ...]) -> tuple[int, ...]:
    return _XP_LADDER[: len(milestones)]


def default_catalog() -> Catalog:
    """Built-in catalog: four project achievements, six global ones."""
    defs = [
        AchievementDef(
            id="explorer", name="Explorer", scope="project", counter="pages_visited",
            description="Visit distinct pages while testing this project.",
            icon_ref="ach-explorer", milestones=(5, 25, 100), xp_per_milestone=_xp_for((5, 25, 100)),
            core_drive="accomplishment",
        ),
        AchievementDef(
            id="clicker", name="Clicker", scope="project", counter="clicks",
            description="Click elements in this project's tests.",
            icon_ref="ach-clicker", milestones=(10, 50, 200), xp_per_milestone=_xp_for((10, 50, 200)),
            core_drive="accomplishment",
        ),
        AchievementDef(
            id="scribe", name="Scribe", scope="project", counter="inputs",
            description="Type into fields in this project's tests.",
            icon_ref="ach-scribe", milestones=(10, 50, 200), xp_per_milestone=_xp_for((10, 50, 200)),
            core_drive="accomplishment",
        ),
        AchievementDef(
            id="inspector", name="Inspector", scope="project", counter="element_lookups",
            description="Look up page elements in this project's tests.",
            icon_ref="ach-inspector", milestones=(20, 100, 500),
            xp_per_milestone=_xp_for((20, 100, 500)), core_drive="accomplishment",
        ),
        AchievementDef(
            id="globetrotter", name="Globetrotter", scope="global", counter="pages_visited",
            description="Visit distinct pages across all projects.",
            icon_ref="ach-globetrotter", milestones=(25, 250, 1000),
            xp_per_milestone=_xp_for((25, 250, 1000)), daily_threshold=5,
            core_drive="accomplishment",
        ),
        AchievementDef(
            id="power-clicker", name="Power-Clicker", scope="global", counter="clicks",
            description="Click elements across all projects.",
            icon_ref="ach-power-clicker", milestones=(100, 500, 2000),
            xp_per_milestone=_xp_for((100, 500, 2000)), daily_threshold=20,
            core_drive="accomplishment",
        ),
        AchievementDef(
            id="bug-squasher", name="Bug-Squasher", scope="global", counter="tests_fixed",
            description="Make previously failing tests pass.",
            icon_ref="ach-bug-squasher", milestones=(1, 5, 25),
            xp_per_milestone=_xp_for((1, 5, 25)), daily_threshold=1,
            core_drive="empowerment",
        ),
        AchievementDef(
            id="marathoner", name="Marathoner", scope="global", counter="tests_run",
            description="Run tests to completion, pass or fail.",
            icon_ref="ach-marathoner", milestones=(10, 100, 500),
            xp_per_milestone=_xp_for((10, 100, 500)), daily_threshold=5,
            core_drive="accomplishment",
        ),
        AchievementDef(
            id="identity", name="Identity", scope="global", counter="profile_customizations",
            description="Make your profile your own.",
            icon_ref="ach-identity", milestones=(1,), xp_per_milestone=(25,),
            core_drive="ownership",
        ),
        AchievementDef(
            id="voyager", name="Voyager", scope="global", counter="sites_visited",
            description="Test against distinct sites.",
            icon_ref="ach-voyager", milestones=(3, 10, 50),
            xp_per_milestone=_xp_for((3, 10, 50)), daily_threshold=2,
            core_drive="unpredictability",
        ),
    ]
    unlocks = UnlockCatalog(
        icons={
            1: ("icon-gear", "icon-terminal"),
            2: ("icon-compass",),
            3: ("icon-magnifier",),
            4: ("icon-rocket",),
            5: ("icon-shield",),
            6: ("icon-flask",),
            7: ("icon-comet",),
            8: ("icon-dragon",),
            9: ("icon-phoenix",),
            10: ("icon-crown",),
        },
        titles={
            1: ("title-novice",),
            2: ("title-apprentice",),
            3: ("title-pathfinder",),
            4: ("title-debugger",),
            5: ("title-specialist",),
            6: ("title-veteran",),
            7: ("title-virtuoso",),
            8: ("title-maestro",),
            9: ("title-grandmaster",),
            10: ("title-legend",),
        },
    )
    return Catalog(
        achievements=tuple(defs),
        level_table=DEFAULT_LEVEL_TABLE,
        unlocks=unlocks,
    )


def load_catalog(path: str | Path) -> Catalog:
    """Load and validate a catalog JSON document; errors abort startup."""
    p = Path(path)
    try:
        raw = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise CatalogError(f"catalog invalid: {p}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"catalog invalid: {p}: line {exc.lineno}: {exc.msg}") from exc
    return Catalog.from_dict(doc)
