"""Local ingest server.

A loopback HTTP service that accepts session reports from instrumented
test runs and serves profile, achievement, unlockable and daily-task
queries for the UI and CLI.  One tester per data directory; all mutations
are serialized through a single lock and persisted before the response is
sent, so a restart between any two requests changes nothing.
"""
from __future__ import annotations

import datetime as _dt
import os
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import engine, store
from .catalog import Catalog, default_catalog, load_catalog
from .model import (
    GLOBAL_SCOPE_KEY,
    AchievementProgress,
    ModelError,
    ReportValidationError,
    SessionReport,
    validate_report,
)

DEFAULT_ADDR = "127.0.0.1:8765"

ENV_ADDR = "GIPGUT_ADDR"
ENV_DATA_DIR = "GIPGUT_DATA_DIR"
ENV_CATALOG = "GIPGUT_CATALOG"
ENV_CLOCK = "GIPGUT_CLOCK"


class DomainRejection(Exception):
    """Request is well-formed but violates a profile/catalog rule (HTTP 422)."""

    def __init__(self, message: str, field_name: Optional[str] = None):
        super().__init__(message)
        self.field = field_name


@dataclass
class ServerConfig:
    bind_address: str = DEFAULT_ADDR
    data_dir: Path = field(default_factory=lambda: Path("."))
    catalog_path: Optional[Path] = None
    clock_mode: str = "system"  # "system" or a fixed ISO date
    ui_dir: Optional[Path] = None

    @classmethod
    def from_env(cls, **overrides) -> "ServerConfig":
        cfg = cls(
            bind_address=os.environ.get(ENV_ADDR, DEFAULT_ADDR),
            data_dir=Path(os.environ.get(ENV_DATA_DIR, ".")),
            catalog_path=Path(os.environ[ENV_CATALOG]) if os.environ.get(ENV_CATALOG) else None,
            clock_mode=os.environ.get(ENV_CLOCK, "system"),
        )
        for k, v in overrides.items():
            if v is not None:
                setattr(cfg, k, v)
        return cfg

    @property
    def host(self) -> str:
        return self.bind_address.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.bind_address.rsplit(":", 1)[1])


class GamificationService:
    """The exclusive writer around catalog, state and the state file."""

    def __init__(self, config: ServerConfig, catalog: Optional[Catalog] = None):
        self.config = config
        if catalog is not None:
            self.catalog = catalog
        elif config.catalog_path is not None:
            self.catalog = load_catalog(config.catalog_path)
        else:
            self.catalog = default_catalog()
        self.state_path = Path(config.data_dir) / "state.json"
        self.state = store.load_state(self.state_path, self.catalog)
        self._lock = threading.Lock()

    def today(self) -> Optional[_dt.date]:
        mode = self.config.clock_mode
        if mode == "system":
            return _dt.datetime.now(_dt.timezone.utc).date()
        try:
            return _dt.date.fromisoformat(mode)
        except ValueError:
            return None

    # -- mutations ---------------------------------------------------------

    def ingest(self, report: SessionReport) -> dict:
        report = validate_report(report)
        with self._lock:
            if report.profile_id != self.state.profile.profile_id:
                raise DomainRejection(
                    f"profile mismatch: server owns {self.state.profile.profile_id!r}",
                    "profile_id",
                )
            new_state, outcome = engine.ingest_report(
                self.state, self.catalog, report, today=self.today()
            )
            store.save_state(self.state_path, new_state)
            self.state = new_state
            return outcome.to_dict()

    def edit_profile(self, edits: dict) -> dict:
        allowed = {"username", "icon_id", "title_id", "showcase"}
        unknown = set(edits) - allowed
        if unknown:
            raise ReportValidationError(sorted(unknown)[0], "unknown profile field")
        with self._lock:
            profile = self.state.profile
            if "username" in edits:
                username = edits["username"]
                if not isinstance(username, str) or not username:
                    raise ReportValidationError("username", "must be a non-empty string")
                profile = replace(profile, username=username)
            if "icon_id" in edits:
                icon = edits["icon_id"]
                if icon not in profile.unlocked_icons:
                    raise DomainRejection("not unlocked", "icon_id")
                profile = replace(profile, icon_id=icon)
            if "title_id" in edits:
                title = edits["title_id"]
                if title not in profile.unlocked_titles:
                    raise DomainRejection("not unlocked", "title_id")
                profile = replace(profile, title_id=title)
            if "showcase" in edits:
                showcase = edits["showcase"]
                if not isinstance(showcase, list) or len(showcase) > 5:
                    raise DomainRejection("showcase holds at most 5 achievements", "showcase")
                for aid in showcase:
                    if not self._earned(aid):
                        raise DomainRejection(f"achievement not earned: {aid}", "showcase")
                profile = replace(profile, showcase=tuple(showcase))
            state = replace(self.state, profile=profile)
            state, outcome = engine.record_profile_customization(
                state, self.catalog, today=self.today()
            )
            store.save_state(self.state_path, state)
            self.state = state
            return {"profile": state.profile.to_dict(), "outcome": outcome.to_dict()}

    def _earned(self, achievement_id: str) -> bool:
        return any(
            row.milestones_reached >= 1
            for (aid, _), row in self.state.progress.items()
            if aid == achievement_id
        )

    # -- queries -----------------------------------------------------------

    def profile_view(self) -> dict:
        with self._lock:
            return self.state.profile.to_dict()

    def achievements_view(self, project_id: Optional[str] = None) -> list[dict]:
        with self._lock:
            out = []
            for adef in sorted(self.catalog.achievements, key=lambda a: a.id):
                entry: dict[str, Any] = {"def": adef.to_dict()}
                if adef.scope == "global":
                    row = self.state.progress.get((adef.id, GLOBAL_SCOPE_KEY))
                    entry["global_progress"] = (
                        row or AchievementProgress(adef.id, GLOBAL_SCOPE_KEY)
                    ).to_dict()
                    entry["project_progress"] = None
                else:
                    entry["global_progress"] = None
                    if project_id is not None:
                        row = self.state.progress.get((adef.id, project_id))
                        entry["project_progress"] = (
                            row or AchievementProgress(adef.id, project_id)
                        ).to_dict()
                    else:
                        entry["project_progress"] = None
                out.append(entry)
            return out

    def daily_view(self) -> dict:
        with self._lock:
            today = self.today()
            if today is None:
                raise engine.NoDailyCandidatesError("no daily candidates")
            today_str = today.isoformat()
            daily = self.state.daily
            if daily is None or daily.date != today_str:
                daily = engine.select_daily_task(
                    today_str, self.state.profile.profile_id, self.catalog.achievements
                )
                state = replace(self.state, daily=daily)
                store.save_state(self.state_path, state)
                self.state = state
            return self.state.daily.to_dict()

    def unlockables_view(self) -> dict:
        with self._lock:
            level = self.state.profile.level
            icons, titles = self.catalog.unlocks.required_levels()
            return {
                "icons": [
                    {"id": i, "required_level": lvl, "unlocked": lvl <= level}
                    for i, lvl in icons
                ],
                "titles": [
                    {"id": t, "required_level": lvl, "unlocked": lvl <= level}
                    for t, lvl in titles
                ],
            }


def _error(status: int, message: str, field_name: Optional[str] = None) -> JSONResponse:
    body: dict[str, Any] = {"error": message}
    if field_name:
        body["field"] = field_name
    return JSONResponse(status_code=status, content=body)


def create_app(config: Optional[ServerConfig] = None, catalog: Optional[Catalog] = None) -> FastAPI:
    config = config or ServerConfig.from_env()
    service = GamificationService(config, catalog=catalog)
    app = FastAPI(title="gipgut", docs_url=None, redoc_url=None)
    app.state.service = service

    @app.exception_handler(ReportValidationError)
    async def _on_validation(_req, exc: ReportValidationError):
        return _error(400, str(exc), exc.field)

    @app.exception_handler(ModelError)
    async def _on_model(_req, exc: ModelError):
        return _error(400, str(exc))

    @app.exception_handler(DomainRejection)
    async def _on_rejection(_req, exc: DomainRejection):
        status = 409 if exc.field == "profile_id" else 422
        return _error(status, str(exc), exc.field)

    @app.exception_handler(engine.NoDailyCandidatesError)
    async def _on_no_daily(_req, exc):
        return _error(404, "no daily candidates")

    @app.post("/api/v1/sessions")
    async def post_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "body is not valid JSON")
        report = SessionReport.from_dict(body)
        return service.ingest(report)

    @app.get("/api/v1/profile")
    async def get_profile():
        return service.profile_view()

    @app.put("/api/v1/profile")
    async def put_profile(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "body is not valid JSON")
        if not isinstance(body, dict):
            return _error(400, "body must be a JSON object")
        return service.edit_profile(body)

    @app.get("/api/v1/achievements")
    async def get_achievements(project_id: Optional[str] = Query(default=None)):
        return service.achievements_view(project_id)

    @app.get("/api/v1/daily-task")
    async def get_daily():
        return service.daily_view()

    @app.get("/api/v1/unlockables")
    async def get_unlockables():
        return service.unlockables_view()

    ui_dir = config.ui_dir
    if ui_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        if candidate.is_dir():
            ui_dir = candidate
    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
