"""Session events: the append-only record of everything a session did.

Events are the single source of truth for reporting and for the live feed;
the engine state shown anywhere must be reproducible by folding the log.
Serialization is pinned (sorted keys, compact separators) so two runs with
the same seed produce byte-identical logs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, Mapping

from .errors import ParseError


class EventKind(str, Enum):
    PHASE_STARTED = "PhaseStarted"
    PHASE_ENDED = "PhaseEnded"
    UTTERANCE_SPOKEN = "UtteranceSpoken"
    TIME_ANNOUNCEMENT = "TimeAnnouncement"
    VITALS_ALERT = "VitalsAlert"
    REP_COUNTED = "RepCounted"
    ENCOURAGEMENT_TRIGGERED = "EncouragementTriggered"
    BUTTON_ROUND = "ButtonRound"
    UNDERSTANDING_ASKED = "UnderstandingAsked"
    UNDERSTANDING_ANSWERED = "UnderstandingAnswered"
    STATE_CHANGED = "StateChanged"
    HEADING_CORRECTED = "HeadingCorrected"
    HOT_DEVICE_ALERT = "HotDeviceAlert"


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    t_session_s: float
    kind: EventKind
    payload: Mapping = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "payload": dict(self.payload),
            "seq": self.seq,
            "t_session_s": self.t_session_s,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> "SessionEvent":
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad event line: {exc}") from None
        if not isinstance(doc, dict) or set(doc) != {"kind", "payload", "seq", "t_session_s"}:
            raise ParseError(f"bad event line shape: {sorted(doc) if isinstance(doc, dict) else type(doc).__name__}")
        try:
            kind = EventKind(doc["kind"])
        except ValueError:
            raise ParseError(f"unknown event kind {doc['kind']!r}") from None
        if not isinstance(doc["seq"], int) or isinstance(doc["seq"], bool):
            raise ParseError("event seq must be an integer")
        if not isinstance(doc["payload"], dict):
            raise ParseError("event payload must be an object")
        return cls(
            seq=doc["seq"],
            t_session_s=float(doc["t_session_s"]),
            kind=kind,
            payload=doc["payload"],
        )


class EventLogWriter:
    """Append-only JSONL sink; one event per line, flushed as written."""

    def __init__(self, path: str | os.PathLike):
        self.path = os.fspath(path)
        self._fh: IO[str] | None = open(self.path, "w", encoding="utf-8")

    def append(self, event: SessionEvent) -> None:
        if self._fh is None:
            raise ParseError("event log writer is closed")
        self._fh.write(event.to_json_line() + "\n")
        self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "EventLogWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_event_log(path: str | os.PathLike, check_seq: bool = True) -> list[SessionEvent]:
    events: list[SessionEvent] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                events.append(SessionEvent.from_json_line(line))
            except ParseError as exc:
                raise ParseError(f"{os.fspath(path)}:{lineno}: {exc}") from None
    if check_seq:
        for i, ev in enumerate(events, start=1):
            if ev.seq != i:
                raise ParseError(f"event seq gap: expected {i}, got {ev.seq}")
    return events


@dataclass(frozen=True)
class SessionSnapshot:
    """Reduced view of a session, derivable from the engine or its log."""

    state: str = "Idle"
    phase_index: int | None = None
    t_session_s: float = 0.0
    phases_completed: int = 0
    reps_by_exercise: Mapping[str, int] = field(default_factory=dict)
    alerts: Mapping[str, int] = field(default_factory=lambda: {"hot_device": 0, "too_hard": 0, "too_slow": 0})
    pending_question: bool = False

    def to_dict(self) -> dict:
        return {
            "state": self.state,
            "phase_index": self.phase_index,
            "t_session_s": self.t_session_s,
            "phases_completed": self.phases_completed,
            "reps_by_exercise": dict(self.reps_by_exercise),
            "alerts": dict(self.alerts),
            "pending_question": self.pending_question,
        }


_ALERT_KEYS = {"TooHard": "too_hard", "TooSlow": "too_slow"}


def _sum_reps(per_phase: Mapping[int, tuple[str, int]]) -> dict[str, int]:
    out: dict[str, int] = {}
    for exercise_id, count in per_phase.values():
        out[exercise_id] = out.get(exercise_id, 0) + count
    return out


class _Reducer:
    """Folds events into live session state.

    A StateChanged back to Idle (reset, or leaving the post-session chat)
    wipes the live counters exactly as the engine does, so snapshots stay
    comparable at any prefix of the log.  The wiped segment's totals are
    retained separately for whole-log reporting.
    """

    def __init__(self) -> None:
        self.state = "Idle"
        self.phase_index: int | None = None
        self.t = 0.0
        self.ended: set[int] = set()
        self.per_phase: dict[int, tuple[str, int]] = {}
        self.alerts = {"hot_device": 0, "too_hard": 0, "too_slow": 0}
        self.pending = False
        self.total_active_s = 0.0
        self.total_phases = 0
        self.total_reps: dict[str, int] = {}
        self.total_alerts = {"hot_device": 0, "too_hard": 0, "too_slow": 0}

    def apply(self, ev: SessionEvent) -> None:
        self.t = ev.t_session_s
        if ev.kind is EventKind.STATE_CHANGED:
            self.state = ev.payload["to"]
            if self.state == "Idle":
                self._fold_segment()
        elif ev.kind is EventKind.PHASE_STARTED:
            self.phase_index = ev.payload["index"]
        elif ev.kind is EventKind.PHASE_ENDED:
            self.ended.add(ev.payload["index"])
        elif ev.kind is EventKind.REP_COUNTED:
            self.per_phase[ev.payload["phase_index"]] = (
                ev.payload["exercise_id"],
                ev.payload["count"],
            )
        elif ev.kind is EventKind.VITALS_ALERT:
            self.alerts[_ALERT_KEYS[ev.payload["kind"]]] += 1
        elif ev.kind is EventKind.HOT_DEVICE_ALERT:
            self.alerts["hot_device"] += 1
        elif ev.kind is EventKind.UNDERSTANDING_ASKED:
            self.pending = True
        elif ev.kind is EventKind.UNDERSTANDING_ANSWERED:
            self.pending = False

    def _fold_segment(self) -> None:
        self.total_active_s += self.t
        self.total_phases += len(self.ended)
        for exercise_id, count in _sum_reps(self.per_phase).items():
            self.total_reps[exercise_id] = self.total_reps.get(exercise_id, 0) + count
        for key, n in self.alerts.items():
            self.total_alerts[key] += n
        self.phase_index = None
        self.t = 0.0
        self.ended = set()
        self.per_phase = {}
        self.alerts = {"hot_device": 0, "too_hard": 0, "too_slow": 0}
        self.pending = False

    def snapshot(self) -> SessionSnapshot:
        return SessionSnapshot(
            state=self.state,
            phase_index=self.phase_index,
            t_session_s=self.t,
            phases_completed=len(self.ended),
            reps_by_exercise=_sum_reps(self.per_phase),
            alerts=dict(self.alerts),
            pending_question=self.pending,
        )


def replay(events: Iterable[SessionEvent]) -> SessionSnapshot:
    """Fold an event sequence into the snapshot the engine would report."""
    r = _Reducer()
    for ev in events:
        r.apply(ev)
    return r.snapshot()


@dataclass(frozen=True)
class RunReport:
    session_id: str
    total_active_s: float
    phases_completed: int
    reps_by_exercise: Mapping[str, int]
    alerts: Mapping[str, int]
    event_log_path: str | None = None

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "total_active_s": self.total_active_s,
            "phases_completed": self.phases_completed,
            "reps_by_exercise": dict(self.reps_by_exercise),
            "alerts": dict(self.alerts),
            "event_log_path": self.event_log_path,
        }


def build_report(
    session_id: str,
    events: Iterable[SessionEvent],
    event_log_path: str | os.PathLike | None = None,
) -> RunReport:
    """Aggregate the whole log, including any segments before a reset."""
    r = _Reducer()
    for ev in events:
        r.apply(ev)
    reps = dict(r.total_reps)
    for exercise_id, count in _sum_reps(r.per_phase).items():
        reps[exercise_id] = reps.get(exercise_id, 0) + count
    alerts = {k: r.total_alerts[k] + r.alerts[k] for k in r.alerts}
    return RunReport(
        session_id=session_id,
        total_active_s=r.total_active_s + r.t,
        phases_completed=r.total_phases + len(r.ended),
        reps_by_exercise=reps,
        alerts=alerts,
        event_log_path=os.fspath(event_log_path) if event_log_path is not None else None,
    )
