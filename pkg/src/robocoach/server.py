"""REST + WebSocket surface over the engine, gateway, and regimen store.

One process hosts everything: the simulated robot, the session registry, and
the HTTP app.  REST carries commands and queries; the WebSocket stream carries
real-time state (session events and telemetry).  Nothing a WS client sends
mutates state, and no REST handler waits on real-time delivery.

Time does not pass on its own: something must call ``SessionService.drive``.
Tests drive it synchronously; ``serve`` runs a wall-clock driver thread.
"""

from __future__ import annotations

import logging
import os
import queue
import threading
import time
import uuid
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Iterable

import anyio
from fastapi import Body, FastAPI, Query, Request, WebSocket, WebSocketDisconnect
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import catalog as cat
from . import regimen as reg
from .chat import BuiltinRuleBased, ChatContext, ChatPhase, ExternalService, ResponderClient
from .engine import PatientProfile, SessionEngine, SessionState, UtterancePolicy
from .errors import (
    AlreadyRunning,
    IllegalTransition,
    InvalidCommand,
    InvalidRegimen,
    NotFound,
    ParseError,
    RobocoachError,
)
from .events import EventLogWriter, SessionEvent
from .gateway import TOPIC_HOT_DEVICE, RobotCommand, SimConfig, SimulatedRobot

log = logging.getLogger(__name__)

DEFAULT_PORT = 8642
DEFAULT_BIND = "127.0.0.1"
WS_BUFFER_ENVELOPES = 1024
# Sent to a consumer that cannot keep up with the broadcast stream.
WS_CLOSE_SLOW_CONSUMER = 1013

_OVERFLOW = object()

_ACTIVE_STATES = frozenset(
    {SessionState.PRE_CHAT, SessionState.RUNNING, SessionState.PAUSED, SessionState.POST_CHAT}
)


# -- broadcast fan-out ---------------------------------------------------------

@dataclass
class _Conn:
    session_id: str
    max_buffer: int
    q: "queue.Queue" = dc_field(default_factory=queue.Queue)
    dropped: bool = False

    def offer(self, topic: str, payload: dict) -> None:
        if self.dropped:
            return
        if self.q.qsize() >= self.max_buffer:
            self.dropped = True
            self.q.put(_OVERFLOW)
            return
        self.q.put((topic, payload))


class BroadcastHub:
    """Synchronous fan-out of events and telemetry to WS connections."""

    def __init__(self, max_buffer: int = WS_BUFFER_ENVELOPES):
        self.max_buffer = max_buffer
        self._lock = threading.Lock()
        self._conns: list[_Conn] = []

    def connect(self, session_id: str) -> _Conn:
        conn = _Conn(session_id=session_id, max_buffer=self.max_buffer)
        with self._lock:
            self._conns.append(conn)
        return conn

    def disconnect(self, conn: _Conn) -> None:
        with self._lock:
            if conn in self._conns:
                self._conns.remove(conn)

    def publish_event(self, session_id: str, event: SessionEvent) -> None:
        with self._lock:
            conns = [c for c in self._conns if c.session_id == session_id]
        for c in conns:
            c.offer("SessionEvent", event.to_dict())

    def publish_telemetry(self, topic: str, message: dict) -> None:
        with self._lock:
            conns = list(self._conns)
        for c in conns:
            c.offer(topic, message)


# -- the service ----------------------------------------------------------------

@dataclass
class SessionRuntime:
    session_id: str
    regimen: reg.Regimen
    engine: SessionEngine
    log_path: str
    chat_context: ChatContext | None = None


class SessionService:
    """Owns the robot, the regimen store, and all session runtimes."""

    def __init__(
        self,
        data_dir: str | Path,
        sim_config: SimConfig | None = None,
        catalog_path: str | Path | None = None,
        responder: ResponderClient | None = None,
        ws_buffer: int = WS_BUFFER_ENVELOPES,
        session_log_dir: str | Path | None = None,
    ):
        self.data_dir = Path(data_dir)
        self.catalog = cat.load_catalog(catalog_path)
        self.store = reg.RegimenStore(self.data_dir / "regimens")
        self.robot = SimulatedRobot(
            config=sim_config,
            exercise_positions={e.id: e.position for e in self.catalog.exercises},
        )
        self.responder = responder or BuiltinRuleBased()
        self.hub = BroadcastHub(ws_buffer)
        log_dir = session_log_dir or os.environ.get("SESSION_LOG_DIR") or self.data_dir / "logs"
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, SessionRuntime] = {}
        self._lock = threading.Lock()
        self.robot.bus.tap(self._on_telemetry)
        self._seed_default_regimen()

    def _seed_default_regimen(self) -> None:
        try:
            self.store.load("default_hiit")
        except NotFound:
            self.store.save(reg.default_hiit_regimen(self.catalog))
        except RobocoachError:
            pass  # an unreadable stored copy is not worth failing boot over

    def _on_telemetry(self, topic: str, message: dict) -> None:
        self.hub.publish_telemetry(topic, message)
        if topic == TOPIC_HOT_DEVICE:
            for runtime in list(self.sessions.values()):
                runtime.engine.on_hot_device(message.get("joint", "unknown"))

    # -- sessions -----------------------------------------------------------------

    def create_session(self, regimen_id: str, profile_doc: dict | None, seed: int) -> SessionRuntime:
        regimen = self.store.load(regimen_id)
        profile = PatientProfile.from_dict(profile_doc or {})
        timeline = reg.compile_timeline(
            regimen, self.catalog, floor_profile=self.robot.config.floor_profile
        )
        session_id = uuid.uuid4().hex[:12]
        log_path = self.log_dir / f"{session_id}.jsonl"
        engine = SessionEngine(
            timeline,
            self.catalog,
            self.robot,
            profile=profile,
            policy=UtterancePolicy(rng_seed=seed),
            log_writer=EventLogWriter(log_path),
        )
        engine.add_listener(lambda ev, sid=session_id: self.hub.publish_event(sid, ev))
        runtime = SessionRuntime(
            session_id=session_id, regimen=regimen, engine=engine, log_path=str(log_path)
        )
        with self._lock:
            self.sessions[session_id] = runtime
        return runtime

    def runtime(self, session_id: str) -> SessionRuntime:
        with self._lock:
            runtime = self.sessions.get(session_id)
        if runtime is None:
            raise NotFound(f"no session with id {session_id!r}")
        return runtime

    def runtime_or_none(self, session_id: str | None) -> SessionRuntime | None:
        if session_id is None:
            return None
        with self._lock:
            return self.sessions.get(session_id)

    def start(self, session_id: str) -> SessionRuntime:
        runtime = self.runtime(session_id)
        with self._lock:
            for other in self.sessions.values():
                if other.session_id != session_id and other.engine.state in _ACTIVE_STATES:
                    raise AlreadyRunning(
                        f"session {other.session_id} is {other.engine.state.value}; "
                        "the robot coaches one session at a time"
                    )
        runtime.engine.start()
        return runtime

    def chat(self, session_id: str, text: str) -> dict:
        runtime = self.runtime(session_id)
        engine = runtime.engine
        state = engine.state
        if state in (SessionState.IDLE, SessionState.COMPLETED):
            phase = ChatPhase.PRE_TRAINING if state is SessionState.IDLE else ChatPhase.POST_TRAINING
            engine.enter_chat()
            runtime.chat_context = ChatContext(session_phase=phase)
        elif state not in (SessionState.PRE_CHAT, SessionState.POST_CHAT):
            raise IllegalTransition(f"cannot chat while session is {state.value}")
        if runtime.chat_context is None:
            phase = (
                ChatPhase.PRE_TRAINING
                if engine.state is SessionState.PRE_CHAT
                else ChatPhase.POST_TRAINING
            )
            runtime.chat_context = ChatContext(session_phase=phase)
        reply = self.responder.respond(text, runtime.chat_context)
        engine.chat_utterance(reply.text, degraded=reply.degraded)
        return {
            "reply": reply.text,
            "degraded": reply.degraded,
            "source": reply.source,
            "state": engine.state.value,
        }

    # -- time ---------------------------------------------------------------------

    def drive(self, dt_s: float, tick_s: float = 0.25) -> None:
        """Advance every session clock and the simulator by dt_s."""
        remaining = float(dt_s)
        while remaining > 1e-9:
            step = min(tick_s, remaining)
            with self._lock:
                runtimes = list(self.sessions.values())
            for runtime in runtimes:
                runtime.engine.tick(step)
            self.robot.sim_step(step)
            remaining -= step

    def snapshot_payload(self, runtime: SessionRuntime) -> dict:
        frame = self.robot.last_frame()
        return {
            "session_id": runtime.session_id,
            "regimen_id": runtime.regimen.id,
            "snapshot": runtime.engine.snapshot().to_dict(),
            "timeline": runtime.engine.timeline.to_dict(),
            "telemetry": frame.to_dict() if frame is not None else None,
        }


class RealTimeDriver:
    """Wall-clock pump for `serve`: one drive(tick) per elapsed tick."""

    def __init__(self, service: SessionService, tick_s: float = 0.25):
        self.service = service
        self.tick_s = tick_s
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, name="session-driver", daemon=True)

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=2.0)

    def _run(self) -> None:
        next_at = time.monotonic()
        while not self._stop.is_set():
            next_at += self.tick_s
            delay = next_at - time.monotonic()
            if delay > 0:
                self._stop.wait(delay)
            if self._stop.is_set():
                return
            try:
                self.service.drive(self.tick_s)
            except Exception:
                log.exception("driver tick failed")


# -- request plumbing --------------------------------------------------------------

def _error_body(code: str, message: str, http_status: int, violations: list | None = None) -> dict:
    body = {"code": code, "message": message, "http_status": http_status}
    if violations is not None:
        body["violations"] = violations
    return body


def _require(doc: dict, key: str):
    if not isinstance(doc, dict) or key not in doc:
        raise ParseError(f"request body needs field {key!r}")
    return doc[key]


def _regimen_from_request(doc: dict, regimen_id: str, created_at: str | None = None) -> reg.Regimen:
    if not isinstance(doc, dict):
        raise ParseError("request body must be a JSON object")
    filled = dict(doc)
    filled.setdefault("schema_version", reg.REGIMEN_SCHEMA_VERSION)
    filled.setdefault("short_break_s", 30.0)
    filled.setdefault("long_break_s", 30.0)
    filled.setdefault("station_size", 4)
    filled.setdefault("include_warmup_game", False)
    filled["id"] = regimen_id
    filled.pop("created_at", None)
    filled.pop("updated_at", None)
    regimen = reg.regimen_from_doc(filled)
    now = reg._now_iso()
    return reg.replace_timestamps(regimen, created_at or now, now)


def create_app(
    data_dir: str | Path | None = None,
    sim_config: SimConfig | None = None,
    catalog_path: str | Path | None = None,
    responder: ResponderClient | None = None,
    ws_buffer: int = WS_BUFFER_ENVELOPES,
    session_log_dir: str | Path | None = None,
    run_driver: bool = False,
    console_dir: str | Path | None = None,
) -> FastAPI:
    if data_dir is None:
        data_dir = os.environ.get("ROBOCOACH_DATA_DIR", "~/.local/share/robocoach")
    service = SessionService(
        data_dir=Path(data_dir).expanduser(),
        sim_config=sim_config,
        catalog_path=catalog_path,
        responder=responder,
        ws_buffer=ws_buffer,
        session_log_dir=session_log_dir,
    )
    app = FastAPI(title="robocoach", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.service = service
    app.state.driver = None

    if run_driver:
        @app.on_event("startup")
        def _start_driver() -> None:
            app.state.driver = RealTimeDriver(service)
            app.state.driver.start()

        @app.on_event("shutdown")
        def _stop_driver() -> None:
            if app.state.driver is not None:
                app.state.driver.stop()

    @app.exception_handler(RobocoachError)
    async def _domain_error(_request: Request, exc: RobocoachError):
        violations = None
        if isinstance(exc, InvalidRegimen) and exc.violations:
            violations = [v.to_dict() for v in exc.violations]
        return JSONResponse(
            status_code=exc.http_status,
            content=_error_body(exc.code, exc.message, exc.http_status, violations),
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        message = f"{first.get('msg', 'invalid request')} ({where})" if where else "invalid request"
        return JSONResponse(status_code=422, content=_error_body("validation_error", message, 422))

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(_request: Request, exc: StarletteHTTPException):
        code = "not_found" if exc.status_code == 404 else "http_error"
        return JSONResponse(
            status_code=exc.status_code,
            content=_error_body(code, str(exc.detail), exc.status_code),
        )

    # -- catalog -----------------------------------------------------------------

    @app.get("/api/catalog")
    def get_catalog(setting: str = Query(...)):
        """Final exercises available in a setting."""
        parsed = cat.parse_setting(setting)
        specs = cat.list_exercises(
            service.catalog, parsed, status=cat.FeasibilityStatus.FINAL
        )
        return [s.to_dict() for s in specs]

    # -- regimens ----------------------------------------------------------------

    @app.get("/api/regimens")
    def list_regimens():
        """Stored regimens, most recently updated first."""
        return [s.to_dict() for s in service.store.list()]

    @app.post("/api/regimens", status_code=201)
    def create_regimen_endpoint(doc: dict = Body(...)):
        """Create a regimen; 422 with the full violation list if invalid."""
        regimen = _regimen_from_request(doc, regimen_id=uuid.uuid4().hex[:12])
        violations = reg.validate(
            regimen, service.catalog, floor_profile=service.robot.config.floor_profile
        )
        if violations:
            raise InvalidRegimen("regimen failed validation", violations)
        service.store.save(regimen)
        return regimen.to_doc()

    @app.get("/api/regimens/{regimen_id}")
    def get_regimen(regimen_id: str):
        """Fetch one regimen document."""
        return service.store.load(regimen_id).to_doc()

    @app.put("/api/regimens/{regimen_id}")
    def put_regimen(regimen_id: str, doc: dict = Body(...)):
        """Replace a regimen; validation as on create."""
        existing = service.store.load(regimen_id)
        regimen = _regimen_from_request(doc, regimen_id, created_at=existing.created_at)
        violations = reg.validate(
            regimen, service.catalog, floor_profile=service.robot.config.floor_profile
        )
        if violations:
            raise InvalidRegimen("regimen failed validation", violations)
        service.store.save(regimen)
        return regimen.to_doc()

    @app.delete("/api/regimens/{regimen_id}", status_code=204)
    def delete_regimen(regimen_id: str):
        """Delete a stored regimen."""
        service.store.delete(regimen_id)
        return Response(status_code=204)

    # -- sessions ----------------------------------------------------------------

    @app.post("/api/sessions", status_code=201)
    def create_session(doc: dict = Body(...)):
        """Create a session for a stored regimen; starts in Idle."""
        regimen_id = _require(doc, "regimen_id")
        profile = doc.get("profile")
        seed = doc.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ParseError("seed must be an integer")
        runtime = service.create_session(regimen_id, profile, seed)
        return {
            "session_id": runtime.session_id,
            "state": runtime.engine.state.value,
            "regimen_id": regimen_id,
        }

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        """Current snapshot, timeline, and last telemetry for a session."""
        return service.snapshot_payload(service.runtime(session_id))

    @app.post("/api/sessions/{session_id}/start")
    def start_session(session_id: str):
        """Start the session (also closes a pre-training chat)."""
        runtime = service.start(session_id)
        return {"state": runtime.engine.state.value}

    @app.post("/api/sessions/{session_id}/pause")
    def pause_session(session_id: str):
        """Pause a running session."""
        runtime = service.runtime(session_id)
        runtime.engine.pause()
        return {"state": runtime.engine.state.value}

    @app.post("/api/sessions/{session_id}/resume")
    def resume_session(session_id: str):
        """Resume a paused session at the identical offset."""
        runtime = service.runtime(session_id)
        runtime.engine.resume()
        return {"state": runtime.engine.state.value}

    @app.post("/api/sessions/{session_id}/stop")
    def stop_session(session_id: str):
        """Stop the session; the robot takes a safe rest posture."""
        runtime = service.runtime(session_id)
        runtime.engine.stop()
        return {"state": runtime.engine.state.value}

    @app.post("/api/sessions/{session_id}/reset")
    def reset_session(session_id: str):
        """Return a stopped session to Idle for a fresh start."""
        runtime = service.runtime(session_id)
        runtime.engine.reset()
        return {"state": runtime.engine.state.value}

    @app.post("/api/sessions/{session_id}/answer")
    def answer_question(session_id: str, doc: dict = Body(...)):
        """Answer the pending understanding question with yes or no."""
        runtime = service.runtime(session_id)
        answer = _require(doc, "answer")
        if not isinstance(answer, str):
            raise ParseError("answer must be a string")
        runtime.engine.answer_understanding(answer)
        return {
            "state": runtime.engine.state.value,
            "pending_question": runtime.engine.pending_question,
        }

    @app.post("/api/sessions/{session_id}/chat")
    def chat_endpoint(session_id: str, doc: dict = Body(...)):
        """Send patient text to the robot's chat; enters chat from Idle/Completed."""
        text = _require(doc, "text")
        if not isinstance(text, str):
            raise ParseError("text must be a string")
        return service.chat(session_id, text)

    @app.post("/api/sessions/{session_id}/chat/exit")
    def chat_exit(session_id: str, doc: dict | None = Body(None)):
        """Leave the chat state (pre-chat hands off into Running)."""
        runtime = service.runtime(session_id)
        runtime.engine.exit_chat()
        return {"state": runtime.engine.state.value}

    @app.post("/api/sessions/{session_id}/button-round")
    def button_round(session_id: str, doc: dict | None = Body(None)):
        """Run one warm-up button round; presses are [[color, t_offset_s], ...]."""
        runtime = service.runtime(session_id)
        doc = doc or {}
        presses = doc.get("presses", [])
        if not isinstance(presses, list) or not all(
            isinstance(p, (list, tuple)) and len(p) == 2 for p in presses
        ):
            raise ParseError("presses must be a list of [color, t_offset_s] pairs")
        ev = runtime.engine.run_button_round(
            target_color=doc.get("target_color"),
            presses=[(str(c), float(t)) for c, t in presses],
            timeout_s=doc.get("timeout_s"),
        )
        return dict(ev.payload)

    @app.get("/api/sessions/{session_id}/events")
    def get_events(session_id: str, since_seq: int = Query(0, ge=0)):
        """Event page for polling; returns events with seq > since_seq."""
        runtime = service.runtime(session_id)
        events = runtime.engine.events_since(since_seq)
        return {
            "events": [e.to_dict() for e in events],
            "last_seq": events[-1].seq if events else since_seq,
        }

    # -- robot and ingest ----------------------------------------------------------

    @app.post("/api/robot/volume")
    def set_volume(doc: dict = Body(...)):
        """Set speech volume (0-100); out of range is a 400."""
        level = _require(doc, "level")
        if not isinstance(level, int) or isinstance(level, bool) or not 0 <= level <= 100:
            raise InvalidCommand(f"volume level must be an integer in [0, 100], got {level!r}")
        service.robot.send(RobotCommand.set_volume(level))
        return {"level": level}

    @app.post("/api/ingest/vitals", status_code=202)
    def ingest_vitals(doc: dict = Body(...)):
        """Accept one heart-rate sample; alerting is the engine's decision."""
        bpm = _require(doc, "bpm")
        if isinstance(bpm, bool) or not isinstance(bpm, (int, float)):
            raise ParseError("bpm must be a number")
        with service._lock:
            runtimes = list(service.sessions.values())
        for runtime in runtimes:
            runtime.engine.on_vitals(float(bpm))
        # the console shows a live readout, not just alerts
        service.hub.publish_telemetry("Vitals", {"bpm": float(bpm)})
        return {"accepted": True}

    # -- websocket -------------------------------------------------------------------

    @app.websocket("/ws")
    async def ws_stream(websocket: WebSocket):
        session_id = websocket.query_params.get("session")
        runtime = service.runtime_or_none(session_id)
        if runtime is None:
            body = _error_body("not_found", f"no session with id {session_id!r}", 404)
            if "websocket.http.response" in websocket.scope.get("extensions", {}):
                await websocket.send_denial_response(JSONResponse(status_code=404, content=body))
            else:
                await websocket.close(code=4404, reason="unknown session")
            return
        await websocket.accept()
        conn = service.hub.connect(runtime.session_id)
        seq = 0

        async def send_envelope(topic: str, payload) -> None:
            nonlocal seq
            seq += 1
            await websocket.send_json(
                {"seq": seq, "topic": topic, "t_server": time.time(), "payload": payload}
            )

        try:
            await send_envelope("Snapshot", service.snapshot_payload(runtime))
            while True:
                try:
                    item = await anyio.to_thread.run_sync(lambda: conn.q.get(timeout=0.2))
                except queue.Empty:
                    continue
                if item is _OVERFLOW:
                    await websocket.close(
                        code=WS_CLOSE_SLOW_CONSUMER, reason="consumer too slow"
                    )
                    break
                topic, payload = item
                await send_envelope(topic, payload)
        except WebSocketDisconnect:
            pass
        finally:
            service.hub.disconnect(conn)

    console = Path(console_dir) if console_dir is not None else _default_console_dir()
    if console is not None and console.is_dir():
        app.mount("/console", StaticFiles(directory=console, html=True), name="console")

    return app


def _default_console_dir() -> Path | None:
    # Repo layout: frontend build lands in frontend/dist next to the package.
    here = Path(__file__).resolve()
    for base in here.parents:
        candidate = base / "frontend" / "dist"
        if candidate.is_dir():
            return candidate
    return None


# -- reference documentation ---------------------------------------------------------

_API_DOC_ROWS: tuple[tuple[str, str, str], ...] = (
    ("GET", "/api/catalog?setting=S", "Final exercises available in the setting"),
    ("GET", "/api/regimens", "Stored regimens, most recently updated first"),
    ("POST", "/api/regimens", "Create a regimen; 422 with full violation list if invalid"),
    ("GET", "/api/regimens/{id}", "Fetch one regimen document"),
    ("PUT", "/api/regimens/{id}", "Replace a regimen; validation as on create"),
    ("DELETE", "/api/regimens/{id}", "Delete a stored regimen (204)"),
    ("POST", "/api/sessions", "Create a session {regimen_id, profile?, seed?}; 201, state Idle"),
    ("GET", "/api/sessions/{id}", "Snapshot, timeline, and last telemetry"),
    ("POST", "/api/sessions/{id}/start", "Start (closes a pre-training chat); 409 if illegal"),
    ("POST", "/api/sessions/{id}/pause", "Pause a running session; 409 if illegal"),
    ("POST", "/api/sessions/{id}/resume", "Resume at the identical offset; 409 if illegal"),
    ("POST", "/api/sessions/{id}/stop", "Stop; robot takes a safe rest posture"),
    ("POST", "/api/sessions/{id}/reset", "Stopped -> Idle for a fresh start"),
    ("POST", "/api/sessions/{id}/answer", 'Answer the understanding question {"answer": "yes" or "no"}'),
    ("POST", "/api/sessions/{id}/chat", 'Patient text in, robot reply out {"text": ...}'),
    ("POST", "/api/sessions/{id}/chat/exit", "Leave chat (pre-chat hands off into Running)"),
    ("POST", "/api/sessions/{id}/button-round", "One warm-up button round"),
    ("GET", "/api/sessions/{id}/events?since_seq=n", "Event page: events with seq > n"),
    ("POST", "/api/robot/volume", 'Set speech volume {"level": 0..100}; 400 out of range'),
    ("POST", "/api/ingest/vitals", 'Heart-rate sample {"t": s, "bpm": n}; always 202'),
)

_ERROR_CODE_ROWS: tuple[tuple[str, str, str], ...] = (
    ("validation_error", "422", "Request body or query malformed"),
    ("parse_error", "422", "Document or value unparseable"),
    ("invalid_setting", "422", "Unknown setting token"),
    ("invalid_regimen", "422", "Regimen failed validation; body carries violations[]"),
    ("excluded_exercise", "422", "Regimen references a non-Final exercise"),
    ("illegal_transition", "409", "Session command not allowed in the current state"),
    ("no_pending_question", "409", "Answer sent while no question is pending"),
    ("not_found", "404", "Unknown regimen or session id"),
    ("unknown_exercise", "404", "Exercise id not in the catalog"),
    ("invalid_command", "400", "Robot command out of range (e.g. volume)"),
    ("robot_disconnected", "503", "Robot gateway is not connected"),
    ("storage_error", "500", "Regimen store I/O failure"),
)


def generate_api_doc() -> str:
    """The committed docs/api.md is generated from this function; a test keeps
    the two in sync."""
    lines = [
        "# Service API",
        "",
        f"REST for commands and queries, WebSocket for real-time state. "
        f"Default bind `{DEFAULT_BIND}:{DEFAULT_PORT}` "
        "(override with `--port` and the `BIND_ADDR` environment variable). "
        "All request and response bodies are JSON.",
        "",
        "## REST endpoints",
        "",
        "| Method | Path | Purpose |",
        "| --- | --- | --- |",
    ]
    for method, path, purpose in _API_DOC_ROWS:
        lines.append(f"| {method} | `{path}` | {purpose} |")
    lines += [
        "",
        "## WebSocket `/ws?session={id}`",
        "",
        "- Unknown session: the handshake is denied with a 404 response.",
        "- First message is always a `Snapshot` envelope carrying the session",
        "  snapshot, the compiled timeline, and the last telemetry frame.",
        "- Afterwards every session event (topic `SessionEvent`) and every",
        "  telemetry message (topic = its telemetry topic string, e.g.",
        '  `"BatteryLevel"`) is forwarded in order. Ingested heart-rate samples',
        '  fan out under topic `Vitals` as `{"bpm": n}`.',
        "- Envelope shape: `{seq, topic, t_server, payload}`; `seq` is",
        "  per-connection, gap-free, starting at 1.",
        f"- A consumer that falls more than {WS_BUFFER_ENVELOPES} envelopes behind is",
        f"  disconnected with close code {WS_CLOSE_SLOW_CONSUMER} rather than silently dropped.",
        "",
        "## Error shape",
        "",
        "Every 4xx/5xx body is `{code, message, http_status}` (plus `violations[]`",
        "for regimen validation failures):",
        "",
        "| Code | Status | Meaning |",
        "| --- | --- | --- |",
    ]
    for code, status, meaning in _ERROR_CODE_ROWS:
        lines.append(f"| `{code}` | {status} | {meaning} |")
    lines.append("")
    return "\n".join(lines)
