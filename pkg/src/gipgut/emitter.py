"""WebDriver instrumentation and report delivery.

Wraps a live WebDriver-style object so that navigation, clicks, key input
and element lookups are recorded as events, then ships the whole session
as one report when the driver quits (or on an explicit flush).  The
wrapper is transparent: every call is delegated unchanged, and any failure
inside the instrumentation degrades to a dropped or ``other`` event rather
than altering the test's behavior.

Reports that cannot be delivered are spooled to disk and retried on the
next flush; the server's session dedup makes retries safe.
"""
from __future__ import annotations

import json
import logging
import os
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import httpx

from .model import Locator, SessionReport, TestEvent, TestResult, select_locator, validate_report

log = logging.getLogger(__name__)

ENV_URL = "GIPGUT_URL"
ENV_PROJECT = "GIPGUT_PROJECT"
ENV_PROFILE = "GIPGUT_PROFILE"
ENV_SPOOL = "GIPGUT_SPOOL"

DEFAULT_SERVER_URL = "http://127.0.0.1:8765"

# Computes the absolute XPath of an element in the live page; used when the
# driver supports execute_script (real Selenium does).
ABS_XPATH_JS = """
function absXPath(el) {
  if (el === document.body) return '/html/body';
  var ix = 0, siblings = el.parentNode ? el.parentNode.childNodes : [];
  for (var i = 0; i < siblings.length; i++) {
    var sib = siblings[i];
    if (sib === el) return absXPath(el.parentNode) + '/' + el.tagName.toLowerCase()
      + '[' + (ix + 1) + ']';
    if (sib.nodeType === 1 && sib.tagName === el.tagName) ix++;
  }
  return '/html';
}
return absXPath(arguments[0]);
""".strip()


class AlreadyInstrumentedError(RuntimeError):
    """The driver is already wrapped."""


@dataclass
class EmitterConfig:
    project_id: str
    profile_id: str
    server_url: str = DEFAULT_SERVER_URL
    spool_dir: Path = field(default_factory=lambda: Path(".gipgut-spool"))
    flush_mode: str = "on_quit"  # or "explicit"

    def __post_init__(self):
        if not self.project_id or not self.profile_id:
            raise ValueError("project_id and profile_id must be non-empty")
        self.spool_dir = Path(self.spool_dir)

    @classmethod
    def from_env(cls, **overrides) -> "EmitterConfig":
        kwargs = dict(
            server_url=os.environ.get(ENV_URL, DEFAULT_SERVER_URL),
            project_id=os.environ.get(ENV_PROJECT, ""),
            profile_id=os.environ.get(ENV_PROFILE, ""),
        )
        if os.environ.get(ENV_SPOOL):
            kwargs["spool_dir"] = Path(os.environ[ENV_SPOOL])
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)


def _now_ms() -> int:
    return int(time.time() * 1000)


class _Recorder:
    """Collects events/results for one driver session and delivers them."""

    def __init__(self, config: EmitterConfig):
        self.config = config
        self.events: list[TestEvent] = []
        self.results: list[TestResult] = []
        self.started_at = _now_ms()
        self.current_test_id = ""

    def record(self, kind: str, url: Optional[str] = None,
               locator: Optional[Locator] = None, detail: Optional[str] = None) -> None:
        try:
            self.events.append(
                TestEvent(kind=kind, timestamp=_now_ms(), test_id=self.current_test_id,
                          url=url, locator=locator, detail=detail)
            )
        except Exception:  # instrumentation must never break the test
            log.warning("dropped %s event", kind, exc_info=True)

    def build_report(self) -> SessionReport:
        return validate_report(SessionReport(
            session_id=str(uuid.uuid4()),
            project_id=self.config.project_id,
            profile_id=self.config.profile_id,
            started_at=self.started_at,
            finished_at=max(_now_ms(), self.started_at),
            events=tuple(self.events),
            results=tuple(self.results),
        ))


class InstrumentedElement:
    """Proxy around a WebElement that records clicks and key input."""

    def __init__(self, element: Any, driver: "InstrumentedDriver"):
        object.__setattr__(self, "_element", element)
        object.__setattr__(self, "_driver", driver)

    def click(self):
        self._driver._record_interaction("click", self._element)
        return self._element.click()

    def send_keys(self, *args, **kwargs):
        self._driver._record_interaction("send_keys", self._element)
        return self._element.send_keys(*args, **kwargs)

    def __getattr__(self, name):
        return getattr(self._element, name)

    def __setattr__(self, name, value):
        setattr(self._element, name, value)


class InstrumentedDriver:
    """Call-compatible proxy around a WebDriver that records events."""

    def __init__(self, driver: Any, config: EmitterConfig):
        if isinstance(driver, InstrumentedDriver):
            raise AlreadyInstrumentedError("already instrumented")
        object.__setattr__(self, "_driver", driver)
        object.__setattr__(self, "_recorder", _Recorder(config))
        object.__setattr__(self, "_config", config)

    # -- instrumented calls ------------------------------------------------

    def get(self, url: str):
        result = self._driver.get(url)
        self._recorder.record("navigate", url=url)
        return result

    def find_element(self, *args, **kwargs):
        element = self._driver.find_element(*args, **kwargs)
        try:
            self._recorder.record("find_element", locator=self._locator_for(element))
        except Exception:
            self._recorder.record("other", detail="find_element (locator unavailable)")
        return InstrumentedElement(element, self)

    def find_elements(self, *args, **kwargs):
        elements = self._driver.find_elements(*args, **kwargs)
        return [InstrumentedElement(e, self) for e in elements]

    def quit(self):
        result = self._driver.quit()
        if self._config.flush_mode == "on_quit":
            try:
                self.flush()
            except Exception:
                log.warning("flush on quit failed", exc_info=True)
        return result

    def __getattr__(self, name):
        return getattr(self._driver, name)

    def __setattr__(self, name, value):
        setattr(self._driver, name, value)

    # -- test boundaries ---------------------------------------------------

    def begin_test(self, test_id: str) -> None:
        """Tag subsequent events with this test; records a start event."""
        self._recorder.current_test_id = test_id
        self._recorder.record("test_start")

    def mark_test(self, test_id: str, status: str) -> None:
        """Record a test's terminal status; closes the current test scope."""
        if not test_id:
            raise ValueError("test_id must be non-empty")
        if self._recorder.current_test_id != test_id:
            self._recorder.current_test_id = test_id
            self._recorder.record("test_start")
        self._recorder.record("test_end")
        self._recorder.results.append(TestResult(test_id=test_id, status=status))
        self._recorder.current_test_id = ""

    def run_test(self, test_id: str, fn, *args, **kwargs):
        """Run a callable as one test, mapping exceptions to a status.

        AssertionError counts as failed, any other exception as error; the
        exception still propagates so the host framework sees it.
        """
        self.begin_test(test_id)
        try:
            result = fn(*args, **kwargs)
        except AssertionError:
            self.mark_test(test_id, "failed")
            raise
        except Exception:
            self.mark_test(test_id, "error")
            raise
        self.mark_test(test_id, "passed")
        return result

    # -- locator extraction ------------------------------------------------

    def _locator_for(self, element: Any) -> Locator:
        id_attr = element.get_attribute("id")
        name_attr = element.get_attribute("name")
        xpath = self._absolute_xpath(element)
        return select_locator(id=id_attr, name=name_attr, xpath=xpath)

    def _absolute_xpath(self, element: Any) -> Optional[str]:
        try:
            return self._driver.execute_script(ABS_XPATH_JS, element)
        except Exception:
            return None

    def _record_interaction(self, kind: str, element: Any) -> None:
        try:
            self._recorder.record(kind, locator=self._locator_for(element))
        except Exception:
            self._recorder.record("other", detail=f"{kind} (locator unavailable)")

    # -- delivery ----------------------------------------------------------

    def flush(self) -> dict:
        """Deliver spooled reports, then this session's report.

        Returns {"delivered": n, "spooled": n, "rejected": n}.  Never
        raises on delivery failure; undeliverable reports are spooled.
        """
        outcome = {"delivered": 0, "spooled": 0, "rejected": 0}
        _deliver_spool(self._config, outcome)
        if self._recorder.events or self._recorder.results:
            report = self._recorder.build_report()
            _deliver_report(self._config, report.to_dict(), outcome)
            self._recorder.events = []
            self._recorder.results = []
            self._recorder.started_at = _now_ms()
        return outcome


def wrap(driver: Any, config: EmitterConfig) -> InstrumentedDriver:
    """Instrument a WebDriver; wrapping twice is an error."""
    return InstrumentedDriver(driver, config)


def _spool_path(config: EmitterConfig, session_id: str) -> Path:
    return config.spool_dir / f"{session_id}.json"


def _deliver_report(config: EmitterConfig, body: dict, outcome: dict) -> None:
    try:
        resp = httpx.post(f"{config.server_url}/api/v1/sessions", json=body, timeout=10)
    except httpx.HTTPError:
        config.spool_dir.mkdir(parents=True, exist_ok=True)
        _spool_path(config, body["session_id"]).write_text(
            json.dumps(body, indent=2, sort_keys=True), encoding="utf-8"
        )
        outcome["spooled"] += 1
        log.warning("server unreachable; spooled session %s", body["session_id"])
        return
    if resp.status_code == 200:
        outcome["delivered"] += 1
    else:
        rejected = config.spool_dir / "rejected"
        rejected.mkdir(parents=True, exist_ok=True)
        (rejected / f"{body['session_id']}.json").write_text(
            json.dumps(body, indent=2, sort_keys=True), encoding="utf-8"
        )
        outcome["rejected"] += 1
        log.warning("server rejected session %s: %s", body["session_id"], resp.text)


def _deliver_spool(config: EmitterConfig, outcome: dict) -> None:
    if not config.spool_dir.is_dir():
        return
    for path in sorted(config.spool_dir.glob("*.json")):
        try:
            body = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            continue
        before = dict(outcome)
        _deliver_report(config, body, outcome)
        if outcome["spooled"] > before["spooled"]:
            return  # still unreachable; leave the rest for next time
        path.unlink(missing_ok=True)
