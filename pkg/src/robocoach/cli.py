"""Headless operations: validate regimens, run accelerated sessions, dump the
catalog, serve the API.

Exit codes are part of the contract and shared by every subcommand:
0 success, 2 domain violation, 3 input/parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import socket
import sys
import uuid
from pathlib import Path

from . import catalog as cat
from . import pose as pose_mod
from . import regimen as reg
from .engine import PatientProfile, SessionEngine, SessionState, UtterancePolicy
from .errors import ParseError, RobocoachError
from .events import EventLogWriter, build_report, read_event_log
from .gateway import SimConfig, SimulatedRobot

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_INPUT = 3

_FLOOR_TOKENS = {"even": cat.FloorProfile.EVEN, "uneven": cat.FloorProfile.UNEVEN}


def _fail(exc: RobocoachError) -> int:
    print(f"error: {exc.message}", file=sys.stderr)
    return EXIT_INPUT if isinstance(exc, ParseError) else EXIT_DOMAIN


# -- serve ----------------------------------------------------------------------


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    sim_config = None
    if args.sim_config:
        try:
            doc = json.loads(Path(args.sim_config).read_text(encoding="utf-8"))
            sim_config = SimConfig.from_dict(doc)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read sim config: {exc}", file=sys.stderr)
            return EXIT_INPUT
        except RobocoachError as exc:
            return _fail(exc)

    host = os.environ.get("BIND_ADDR", "127.0.0.1")
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host, args.port))
    except OSError as exc:
        print(f"error: cannot bind {host}:{args.port}: {exc}", file=sys.stderr)
        sock.close()
        return 1
    bound_port = sock.getsockname()[1]
    print(f"serving on http://{host}:{bound_port}", flush=True)

    app = create_app(data_dir=args.data_dir, sim_config=sim_config, run_driver=True)
    config = uvicorn.Config(app, log_level="warning")
    server = uvicorn.Server(config)
    try:
        server.run(sockets=[sock])
    except KeyboardInterrupt:
        pass
    finally:
        sock.close()
    return EXIT_OK


# -- validate --------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    catalog = cat.load_catalog()
    try:
        regimen = reg.load_regimen_file(args.file)
    except RobocoachError as exc:
        return _fail(exc)
    floor = _FLOOR_TOKENS[args.floor] if args.floor else None
    violations = reg.validate(regimen, catalog, floor_profile=floor)
    if violations:
        for v in violations:
            print(f"{v.kind}: {v.message}")
        return EXIT_DOMAIN
    if args.dump_timeline:
        timeline = reg.compile_timeline(regimen, catalog, floor_profile=floor)
        print(json.dumps(timeline.to_dict(), indent=2, sort_keys=True))
    else:
        print("OK")
    return EXIT_OK


# -- run -------------------------------------------------------------------------


def _load_vitals_trace(path: str) -> list[tuple[float, float]]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read vitals trace: {exc}") from None
    out: list[tuple[float, float]] = []
    prev_t = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            t, bpm = float(doc["t"]), float(doc["bpm"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            raise ParseError(f"vitals trace line {lineno}: expected {{\"t\", \"bpm\"}}") from None
        if prev_t is not None and t <= prev_t:
            raise ParseError(f"vitals trace line {lineno}: timestamps must increase")
        prev_t = t
        out.append((t, bpm))
    return out


def _pick_pose_model(regimen: reg.Regimen) -> pose_mod.PoseModel:
    models = pose_mod.load_pose_models()
    by_exercise = {m.exercise_id: m for m in models.values()}
    for entry in regimen.entries:
        model = by_exercise.get(entry.exercise_id)
        if model is not None:
            return model
    raise ParseError(
        "no pose model covers any exercise in this regimen; "
        f"models exist for {sorted(by_exercise)}"
    )


class _TraceFeeder:
    """Streams a keypoint trace into the engine, aligned to the start of the
    first Performance phase of the model's exercise.

    Trace timestamps are relative to that phase start, so the same file counts
    the same reps regardless of how long the demonstrations before it take.
    """

    def __init__(self, engine: SessionEngine, model: pose_mod.PoseModel, frames):
        self.engine = engine
        self.model = model
        self.frames = list(frames)
        self.i = 0
        self.offset_s: float | None = None
        engine.add_listener(self._on_event)

    def _on_event(self, ev) -> None:
        if self.offset_s is not None or ev.kind.value != "PhaseStarted":
            return
        if ev.payload.get("kind") == "Performance" and ev.payload.get(
            "exercise_id"
        ) == self.model.exercise_id:
            self.offset_s = ev.t_session_s

    def pump(self, now_t: float) -> None:
        if self.offset_s is None:
            return
        while self.i < len(self.frames):
            frame = self.frames[self.i]
            aligned = self.offset_s + frame.t
            if aligned > now_t:
                return
            self.i += 1
            self.engine.on_pose_frame(
                pose_mod.KeypointFrame(t=aligned, joints=frame.joints)
            )


def cmd_run(args: argparse.Namespace) -> int:
    import time

    if args.speed < 1:
        print("error: --speed must be >= 1", file=sys.stderr)
        return EXIT_INPUT

    catalog = cat.load_catalog()
    try:
        regimen = reg.load_regimen_file(args.file)
    except RobocoachError as exc:
        return _fail(exc)
    violations = reg.validate(regimen, catalog)
    if violations:
        for v in violations:
            print(f"{v.kind}: {v.message}", file=sys.stderr)
        return EXIT_DOMAIN

    try:
        vitals = _load_vitals_trace(args.vitals_trace) if args.vitals_trace else []
        pose_frames = pose_mod.ingest_trace(args.pose_trace) if args.pose_trace else []
        pose_model = _pick_pose_model(regimen) if args.pose_trace else None
    except RobocoachError as exc:
        return _fail(exc)

    # Deterministic per (file, seed) so reruns overwrite their own log.
    session_id = uuid.uuid5(uuid.NAMESPACE_URL, f"run:{Path(args.file).name}:{args.seed}").hex[:12]
    log_dir = Path(os.environ.get("SESSION_LOG_DIR", "."))
    log_dir.mkdir(parents=True, exist_ok=True)
    log_path = log_dir / f"{session_id}.jsonl"

    timeline = reg.compile_timeline(regimen, catalog)
    robot = SimulatedRobot(
        config=SimConfig(), exercise_positions={e.id: e.position for e in catalog.exercises}
    )
    # A trace on the command line is the therapist's consent decision.
    profile = PatientProfile(
        setting=regimen.setting, camera_consent=args.pose_trace is not None
    )
    engine = SessionEngine(
        timeline,
        catalog,
        robot,
        profile=profile,
        policy=UtterancePolicy(rng_seed=args.seed),
        log_writer=EventLogWriter(log_path),
    )
    feeder = _TraceFeeder(engine, pose_model, pose_frames) if pose_model else None
    if pose_model is not None:
        engine.attach_pose(pose_model)

    tick_s = 0.25
    engine.start()
    vitals_i = 0
    deadline = time.monotonic()
    while engine.state not in (SessionState.COMPLETED, SessionState.STOPPED):
        if engine.pending_question:
            answer = "yes"
            if args.interactive:
                raw = input("Did you understand the exercise? [yes/no] ").strip().lower()
                answer = raw if raw in ("yes", "no") else "yes"
            engine.answer_understanding(answer)
            continue
        engine.tick(tick_s)
        robot.sim_step(tick_s)
        now_t = engine.snapshot().t_session_s
        while vitals_i < len(vitals) and vitals[vitals_i][0] <= now_t:
            engine.on_vitals(vitals[vitals_i][1])
            vitals_i += 1
        if feeder is not None:
            feeder.pump(now_t)
        deadline += tick_s / args.speed
        delay = deadline - time.monotonic()
        if delay > 0:
            time.sleep(delay)

    events = read_event_log(log_path)
    report = build_report(session_id, events, str(log_path))
    doc = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if args.report:
        Path(args.report).write_text(doc + "\n", encoding="utf-8")
        log.info("report written to %s", args.report)
    print(doc)
    return EXIT_OK


# -- catalog -----------------------------------------------------------------------


def cmd_catalog(args: argparse.Namespace) -> int:
    catalog = cat.load_catalog()
    try:
        setting = cat.parse_setting(args.setting)
    except RobocoachError as exc:
        return _fail(exc)
    if args.counts:
        counted = cat.counts(catalog, setting)
        parts = [f"{c.value}={n}" for c, n in sorted(counted.by_category.items())]
        parts.append(f"total={counted.total}")
        print(" ".join(parts))
        return EXIT_OK
    for spec in cat.list_exercises(catalog, setting, status=cat.FeasibilityStatus.FINAL):
        print(f"{spec.id}\t{spec.category.value}\t{spec.position.value}")
    return EXIT_OK


# -- entry -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robocoach")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="serve the REST/WS API with a simulated robot")
    p.add_argument("--port", type=int, default=8642)
    p.add_argument("--data-dir", default=None)
    p.add_argument("--sim-config", default=None)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("validate", help="validate a regimen file")
    p.add_argument("file")
    p.add_argument("--floor", choices=sorted(_FLOOR_TOKENS))
    p.add_argument("--dump-timeline", action="store_true")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("run", help="run a session headless at accelerated speed")
    p.add_argument("file")
    p.add_argument("--speed", type=float, required=True)
    p.add_argument("--pose-trace", default=None)
    p.add_argument("--vitals-trace", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None)
    p.add_argument("--interactive", action="store_true")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("catalog", help="list the final exercises for a setting")
    p.add_argument("--setting", required=True)
    p.add_argument("--counts", action="store_true")
    p.set_defaults(fn=cmd_catalog)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING)
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except RobocoachError as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
