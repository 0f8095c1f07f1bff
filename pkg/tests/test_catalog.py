import json

import pytest

from gipgut.catalog import (
    AchievementDef,
    Catalog,
    CatalogError,
    LevelTable,
    UnlockCatalog,
    default_catalog,
    load_catalog,
)


def test_default_catalog_is_valid():
    cat = default_catalog()
    assert len(cat.achievements) == 10
    assert len(cat.daily_candidates()) == 5
    assert cat.level_table.cumulative_xp == (0, 100, 300, 600, 1000, 1500, 2100, 2800, 3600, 4500)


def test_default_round_trips_through_json(tmp_path):
    cat = default_catalog()
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps(cat.to_dict()), encoding="utf-8")
    assert load_catalog(path) == cat


def test_missing_file(tmp_path):
    with pytest.raises(CatalogError):
        load_catalog(tmp_path / "nope.json")


def test_syntax_error_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "achievements": [,]\n}', encoding="utf-8")
    with pytest.raises(CatalogError, match="line 2"):
        load_catalog(path)


def test_milestones_must_increase():
    with pytest.raises(CatalogError, match="strictly increasing"):
        AchievementDef(
            id="x", name="X", description="", icon_ref="i", scope="global",
            counter="clicks", milestones=(10, 10), xp_per_milestone=(25, 50),
        )


def test_xp_length_must_match():
    with pytest.raises(CatalogError, match="xp_per_milestone"):
        AchievementDef(
            id="x", name="X", description="", icon_ref="i", scope="global",
            counter="clicks", milestones=(10, 50), xp_per_milestone=(25,),
        )


def test_daily_threshold_must_be_lower():
    with pytest.raises(CatalogError, match="daily_threshold"):
        AchievementDef(
            id="x", name="X", description="", icon_ref="i", scope="project",
            counter="clicks", milestones=(10,), xp_per_milestone=(25,), daily_threshold=10,
        )
    # equality is allowed only for global scope
    AchievementDef(
        id="x", name="X", description="", icon_ref="i", scope="global",
        counter="clicks", milestones=(10,), xp_per_milestone=(25,), daily_threshold=10,
    )


def test_duplicate_ids_rejected():
    base = default_catalog()
    with pytest.raises(CatalogError, match="unique"):
        Catalog(
            achievements=base.achievements + (base.achievements[0],),
            level_table=base.level_table,
            unlocks=base.unlocks,
        )


def test_level_table_shape():
    with pytest.raises(CatalogError):
        LevelTable(cumulative_xp=(0, 1, 2))
    with pytest.raises(CatalogError, match="first entry"):
        LevelTable(cumulative_xp=(1, 2, 3, 4, 5, 6, 7, 8, 9, 10))


def test_unlocks_every_level_reachable():
    with pytest.raises(CatalogError, match="reachable"):
        UnlockCatalog(icons={2: ("late",)}, titles={1: ("t",)})


def test_level_for_matches_scan():
    table = default_catalog().level_table
    for xp in range(0, 5000, 7):
        expected = max(n for n in range(1, 11) if table.cumulative_xp[n - 1] <= xp)
        assert table.level_for(xp) == expected
