"""Session engine: the deterministic state machine that runs a timeline.

The engine owns a virtual clock.  Nothing here sleeps or reads wall time;
callers deliver time through ``tick`` and all other inputs (vitals, reps,
button presses, therapist commands) through methods that serialize on one
lock, so the engine behaves as a single actor.  Every observable effect is
a SessionEvent appended to the session log and, mirrored, a command to the
robot gateway.  Given the same seed, timeline, and input trace, two runs
produce byte-identical logs.
"""

from __future__ import annotations

import logging
import random
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

from . import pose as pose_mod
from .catalog import Catalog, Setting
from .errors import (
    AlreadyRunning,
    ConsentRequired,
    EmptyPool,
    IllegalTransition,
    InvalidTimeline,
    NoPendingQuestion,
    ParseError,
)
from .events import EventKind, EventLogWriter, SessionEvent, SessionSnapshot, _sum_reps
from .gateway import BUTTON_COLORS, RobotCommand, RobotGateway
from .regimen import PhaseKind, SessionTimeline

log = logging.getLogger(__name__)

_EPS = 1e-9

UNDERSTANDING_QUESTION = "Did you understand the exercise?"
ENCOURAGEMENT_PHRASE = "You can do one repetition"
TIME_ANNOUNCEMENT_PHRASE = "There are 10 seconds left"

MOTIVATIONAL_PHRASES = (
    "Great that we can do some exercises together!",
    "Keep it up!",
    "You're on your way to becoming a legend!",
)
CAUTION_PHRASES = ("Be careful!",)
CALM_DOWN_PHRASES = (
    "Let's slow down a little and catch our breath.",
    "Take it a bit easier, nice and steady.",
)
SPEED_UP_PHRASES = (
    "You can pick up the pace a little!",
    "Let's go a bit faster, you have got this!",
)


class SessionState(str, Enum):
    IDLE = "Idle"
    PRE_CHAT = "PreChat"
    RUNNING = "Running"
    PAUSED = "Paused"
    STOPPED = "Stopped"
    COMPLETED = "Completed"
    POST_CHAT = "PostChat"


# Every legal arc; anything else is IllegalTransition.
TRANSITIONS: dict[SessionState, frozenset[SessionState]] = {
    SessionState.IDLE: frozenset({SessionState.PRE_CHAT, SessionState.RUNNING}),
    SessionState.PRE_CHAT: frozenset({SessionState.RUNNING}),
    SessionState.RUNNING: frozenset(
        {SessionState.PAUSED, SessionState.STOPPED, SessionState.COMPLETED}
    ),
    SessionState.PAUSED: frozenset({SessionState.RUNNING, SessionState.STOPPED}),
    SessionState.COMPLETED: frozenset({SessionState.POST_CHAT}),
    SessionState.POST_CHAT: frozenset({SessionState.IDLE}),
    SessionState.STOPPED: frozenset({SessionState.IDLE}),
}


@dataclass(frozen=True)
class PatientProfile:
    setting: Setting = Setting.INST
    post_abdominal_surgery: bool = False
    hr_low_bpm: int | None = None
    hr_high_bpm: int | None = None
    camera_consent: bool = False

    def __post_init__(self) -> None:
        for name in ("hr_low_bpm", "hr_high_bpm"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ParseError(f"{name} must be positive, got {v}")
        if (
            self.hr_low_bpm is not None
            and self.hr_high_bpm is not None
            and self.hr_low_bpm >= self.hr_high_bpm
        ):
            raise ParseError(
                f"hr_low_bpm ({self.hr_low_bpm}) must be below hr_high_bpm ({self.hr_high_bpm})"
            )

    @classmethod
    def from_dict(cls, doc: dict) -> "PatientProfile":
        known = {"setting", "post_abdominal_surgery", "hr_low_bpm", "hr_high_bpm", "camera_consent"}
        unknown = set(doc) - known
        if unknown:
            raise ParseError(f"unknown profile fields: {sorted(unknown)}")
        kwargs = dict(doc)
        if "setting" in kwargs:
            kwargs["setting"] = Setting(kwargs["setting"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "setting": self.setting.value,
            "post_abdominal_surgery": self.post_abdominal_surgery,
            "hr_low_bpm": self.hr_low_bpm,
            "hr_high_bpm": self.hr_high_bpm,
            "camera_consent": self.camera_consent,
        }


class UtterancePolicy:
    """Seeded phrase pools.  Phrases never evaluate performance; the caution
    pool joins the motivational rotation only for post-surgery patients."""

    def __init__(
        self,
        motivational: Sequence[str] = MOTIVATIONAL_PHRASES,
        caution: Sequence[str] = CAUTION_PHRASES,
        calm_down: Sequence[str] = CALM_DOWN_PHRASES,
        speed_up: Sequence[str] = SPEED_UP_PHRASES,
        interval_s: float = 25.0,
        rng_seed: int = 0,
    ):
        if interval_s <= 0:
            raise ParseError(f"interval_s must be positive, got {interval_s}")
        self.pools: dict[str, tuple[str, ...]] = {
            "motivational": tuple(motivational),
            "caution": tuple(caution),
            "calm_down": tuple(calm_down),
            "speed_up": tuple(speed_up),
        }
        self.interval_s = float(interval_s)
        self.rng_seed = rng_seed
        self._rng = random.Random(rng_seed)
        self._last: dict[str, str] = {}

    def pool_for(self, kind: str, profile: PatientProfile) -> tuple[str, ...]:
        if kind == "motivational" and profile.post_abdominal_surgery:
            return self.pools["motivational"] + self.pools["caution"]
        if kind not in self.pools:
            raise EmptyPool(f"no utterance pool named {kind!r}")
        return self.pools[kind]

    def next_utterance(self, kind: str, profile: PatientProfile) -> str:
        pool = self.pool_for(kind, profile)
        if not pool:
            raise EmptyPool(f"utterance pool {kind!r} is empty")
        last = self._last.get(kind)
        candidates = [p for p in pool if p != last] if len(pool) > 1 else list(pool)
        choice = self._rng.choice(candidates)
        self._last[kind] = choice
        return choice

    def choose_color(self, colors: Sequence[str]) -> str:
        return self._rng.choice(list(colors))


def next_utterance(policy: UtterancePolicy, kind: str, profile: PatientProfile) -> str:
    return policy.next_utterance(kind, profile)


@dataclass(frozen=True)
class EngineConfig:
    tick_s: float = 0.25
    announce_remaining_s: float = 10.0
    announce_min_duration_s: float = 20.0
    engagement_window_s: float = 20.0
    demo_replay_cap: int = 1
    button_timeout_s: float = 5.0


class _VitalsMonitor:
    """Threshold crossing with hysteresis: after an alert the trigger re-arms
    only once the sample returns to the threshold's safe side."""

    def __init__(self, low: int | None, high: int | None):
        self.low = low
        self.high = high
        self._armed_high = True
        self._armed_low = True

    def sample(self, bpm: float) -> list[str]:
        out: list[str] = []
        if self.high is not None:
            if self._armed_high and bpm > self.high:
                out.append("TooHard")
                self._armed_high = False
            elif bpm <= self.high:
                self._armed_high = True
        if self.low is not None:
            if self._armed_low and bpm < self.low:
                out.append("TooSlow")
                self._armed_low = False
            elif bpm >= self.low:
                self._armed_low = True
        return out


class SessionEngine:
    """Executes one SessionTimeline against a robot gateway."""

    def __init__(
        self,
        timeline: SessionTimeline,
        catalog: Catalog,
        gateway: RobotGateway,
        profile: PatientProfile | None = None,
        policy: UtterancePolicy | None = None,
        config: EngineConfig | None = None,
        log_writer: EventLogWriter | None = None,
    ):
        if not timeline.phases:
            raise InvalidTimeline("timeline has no phases")
        self.timeline = timeline
        self.catalog = catalog
        self.gateway = gateway
        self.profile = profile or PatientProfile()
        self.policy = policy or UtterancePolicy()
        self.config = config or EngineConfig()
        self._log_writer = log_writer
        self._listeners: list[Callable[[SessionEvent], None]] = []
        self._lock = threading.RLock()

        self.events: list[SessionEvent] = []
        self._seq = 0
        self._state = SessionState.IDLE
        self._pose_model: pose_mod.PoseModel | None = None
        self._pose_counter: pose_mod.RepCounterState | None = None
        self.warmup_rounds: list[dict] = []
        self._clear_run_state()

    # -- plumbing ---------------------------------------------------------------

    def add_listener(self, fn: Callable[[SessionEvent], None]) -> None:
        with self._lock:
            self._listeners.append(fn)

    def events_since(self, seq: int = 0) -> list[SessionEvent]:
        """Events with seq strictly greater than seq, oldest first."""
        with self._lock:
            # seq is dense and 1-based, so the slice point is just seq itself
            return list(self.events[seq:])

    def _emit(self, kind: EventKind, payload: dict) -> SessionEvent:
        self._seq += 1
        ev = SessionEvent(seq=self._seq, t_session_s=self._t, kind=kind, payload=payload)
        self.events.append(ev)
        if self._log_writer is not None:
            self._log_writer.append(ev)
        for fn in self._listeners:
            fn(ev)
        return ev

    def _clear_run_state(self) -> None:
        self._t = 0.0
        self._phase_index: int | None = None
        self._elapsed = 0.0
        self._phase_start_t = 0.0
        self._pending_q: int | None = None
        self._replays: dict[int, int] = {}
        self._ended: set[int] = set()
        self._per_phase_reps: dict[int, tuple[str, int]] = {}
        self._alerts = {"hot_device": 0, "too_hard": 0, "too_slow": 0}
        self._announced = False
        self._encouraged = False
        self._next_cadence_k = 1
        self._last_activity_t = 0.0
        self._vitals = _VitalsMonitor(self.profile.hr_low_bpm, self.profile.hr_high_bpm)
        self.warmup_rounds = []
        if self._pose_model is not None:
            self._pose_counter = pose_mod.new_counter(0.0)

    def _set_state(self, new: SessionState) -> None:
        if new not in TRANSITIONS[self._state]:
            raise IllegalTransition(f"cannot go {self._state.value} -> {new.value}")
        old = self._state
        self._state = new
        self._emit(EventKind.STATE_CHANGED, {"from": old.value, "to": new.value})
        if new is SessionState.IDLE:
            self._clear_run_state()

    # -- introspection ----------------------------------------------------------

    @property
    def state(self) -> SessionState:
        with self._lock:
            return self._state

    @property
    def pending_question(self) -> bool:
        with self._lock:
            return self._pending_q is not None

    def snapshot(self) -> SessionSnapshot:
        with self._lock:
            return SessionSnapshot(
                state=self._state.value,
                phase_index=self._phase_index,
                t_session_s=self._t,
                phases_completed=len(self._ended),
                reps_by_exercise=_sum_reps(self._per_phase_reps),
                alerts=dict(self._alerts),
                pending_question=self._pending_q is not None,
            )

    # -- lifecycle --------------------------------------------------------------

    def start(self) -> list[SessionEvent]:
        with self._lock:
            if self._state in (SessionState.RUNNING, SessionState.PAUSED):
                raise AlreadyRunning(f"session already {self._state.value}")
            if self._state not in (SessionState.IDLE, SessionState.PRE_CHAT):
                raise IllegalTransition(f"cannot start from {self._state.value}")
            return self._collect(self._start_locked)

    def _start_locked(self) -> None:
        self._set_state(SessionState.RUNNING)
        self._phase_index = 0
        self._start_phase(0)

    def pause(self) -> list[SessionEvent]:
        with self._lock:
            if self._state is not SessionState.RUNNING:
                raise IllegalTransition(f"cannot pause from {self._state.value}")
            def go() -> None:
                self._set_state(SessionState.PAUSED)
                self.gateway.send(RobotCommand.rest())
            return self._collect(go)

    def resume(self) -> list[SessionEvent]:
        with self._lock:
            if self._state is not SessionState.PAUSED:
                raise IllegalTransition(f"cannot resume from {self._state.value}")
            def go() -> None:
                self._set_state(SessionState.RUNNING)
                self._reissue_phase_command()
            return self._collect(go)

    def stop(self) -> list[SessionEvent]:
        with self._lock:
            if self._state not in (SessionState.RUNNING, SessionState.PAUSED):
                raise IllegalTransition(f"cannot stop from {self._state.value}")
            def go() -> None:
                self._set_state(SessionState.STOPPED)
                self.gateway.send(RobotCommand.rest())
            return self._collect(go)

    def reset(self) -> list[SessionEvent]:
        with self._lock:
            if self._state is not SessionState.STOPPED:
                raise IllegalTransition(f"cannot reset from {self._state.value}")
            return self._collect(lambda: self._set_state(SessionState.IDLE))

    def enter_chat(self) -> list[SessionEvent]:
        with self._lock:
            if self._state is SessionState.IDLE:
                return self._collect(lambda: self._set_state(SessionState.PRE_CHAT))
            if self._state is SessionState.COMPLETED:
                return self._collect(lambda: self._set_state(SessionState.POST_CHAT))
            raise IllegalTransition(f"cannot enter chat from {self._state.value}")

    def exit_chat(self) -> list[SessionEvent]:
        with self._lock:
            if self._state is SessionState.PRE_CHAT:
                return self._collect(self._start_locked)
            if self._state is SessionState.POST_CHAT:
                return self._collect(lambda: self._set_state(SessionState.IDLE))
            raise IllegalTransition(f"cannot exit chat from {self._state.value}")

    def _collect(self, fn: Callable[[], None]) -> list[SessionEvent]:
        mark = len(self.events)
        fn()
        return self.events[mark:]

    # -- the clock --------------------------------------------------------------

    def tick(self, dt_s: float | None = None) -> list[SessionEvent]:
        with self._lock:
            if self._state is not SessionState.RUNNING:
                return []
            dt = self.config.tick_s if dt_s is None else float(dt_s)
            if dt < 0:
                raise ParseError(f"tick needs dt_s >= 0, got {dt_s}")
            return self._collect(lambda: self._advance_clock(dt))

    def _advance_clock(self, dt: float) -> None:
        remaining = dt
        while (
            remaining > _EPS
            and self._state is SessionState.RUNNING
            and self._pending_q is None
        ):
            phase = self.timeline.phases[self._phase_index]
            next_t = min(self._trigger_targets(phase))
            step = min(remaining, next_t - self._elapsed)
            self._elapsed += step
            self._t += step
            remaining -= step
            self._fire_triggers(phase)

    def _trigger_targets(self, phase) -> list[float]:
        targets = [phase.duration_s]
        if phase.kind in (PhaseKind.PERFORMANCE, PhaseKind.WARMUP_GAME):
            tk = self._next_cadence_k * self.policy.interval_s
            if tk < phase.duration_s - _EPS and tk > self._elapsed + _EPS:
                targets.append(tk)
        if (
            phase.kind is PhaseKind.PERFORMANCE
            and phase.duration_s >= self.config.announce_min_duration_s
            and not self._announced
        ):
            ta = phase.duration_s - self.config.announce_remaining_s
            if ta > self._elapsed + _EPS:
                targets.append(ta)
        if self._encouragement_armed(phase):
            td = (
                self._last_activity_t
                + self.config.engagement_window_s
                + self.config.tick_s
                - self._phase_start_t
            )
            if td > self._elapsed + _EPS:
                targets.append(td)
        return [t for t in targets if t > self._elapsed + _EPS]

    def _encouragement_armed(self, phase) -> bool:
        return (
            phase.kind is PhaseKind.PERFORMANCE
            and self._pose_model is not None
            and self.profile.camera_consent
            and not self._encouraged
        )

    def _fire_triggers(self, phase) -> None:
        # Order at a shared instant: cadence, announcement, encouragement, end.
        if phase.kind in (PhaseKind.PERFORMANCE, PhaseKind.WARMUP_GAME):
            tk = self._next_cadence_k * self.policy.interval_s
            if tk < phase.duration_s - _EPS and self._elapsed >= tk - _EPS:
                self._next_cadence_k += 1
                text = self.policy.next_utterance("motivational", self.profile)
                self.gateway.send(RobotCommand.speak(text))
                self._emit(
                    EventKind.UTTERANCE_SPOKEN,
                    {"index": self._phase_index, "source": "motivational", "text": text},
                )
        if (
            phase.kind is PhaseKind.PERFORMANCE
            and phase.duration_s >= self.config.announce_min_duration_s
            and not self._announced
            and self._elapsed >= phase.duration_s - self.config.announce_remaining_s - _EPS
        ):
            self._announced = True
            self.gateway.send(RobotCommand.speak(TIME_ANNOUNCEMENT_PHRASE))
            self._emit(
                EventKind.TIME_ANNOUNCEMENT,
                {
                    "index": self._phase_index,
                    "remaining_s": self.config.announce_remaining_s,
                    "text": TIME_ANNOUNCEMENT_PHRASE,
                },
            )
        if self._encouragement_armed(phase):
            gap = self._t - self._last_activity_t
            if gap > self.config.engagement_window_s + _EPS:
                self._encouraged = True
                self.gateway.send(RobotCommand.speak(ENCOURAGEMENT_PHRASE))
                self._emit(
                    EventKind.ENCOURAGEMENT_TRIGGERED,
                    {"index": self._phase_index, "text": ENCOURAGEMENT_PHRASE},
                )
        if self._elapsed >= phase.duration_s - _EPS:
            self._end_phase()

    # -- phase machinery ----------------------------------------------------------

    def _spec(self, exercise_id: str):
        return self.catalog.get(exercise_id)

    def _start_phase(self, index: int, replay_demo: bool = False) -> None:
        phase = self.timeline.phases[index]
        self._elapsed = 0.0
        self._phase_start_t = self._t
        self._announced = False
        self._encouraged = False
        self._next_cadence_k = 1
        payload: dict = {
            "duration_s": phase.duration_s,
            "index": index,
            "kind": phase.kind.value,
        }
        if phase.exercise_id is not None:
            payload["exercise_id"] = phase.exercise_id
        if replay_demo:
            payload["replay"] = True
        self._emit(EventKind.PHASE_STARTED, payload)
        if phase.kind is PhaseKind.DEMONSTRATION:
            text = self._spec(phase.exercise_id).demo_text
            self.gateway.send(RobotCommand.speak(text))
            self._emit(
                EventKind.UTTERANCE_SPOKEN, {"index": index, "source": "demo", "text": text}
            )
            self.gateway.send(RobotCommand.demonstrate(phase.exercise_id))
        elif phase.kind is PhaseKind.PERFORMANCE:
            self._last_activity_t = self._t
            self.gateway.send(RobotCommand.co_perform(phase.exercise_id, phase.duration_s))
        elif phase.kind is PhaseKind.WARMUP_GAME:
            text = "Let's warm up with a little button game!"
            self.gateway.send(RobotCommand.speak(text))
            self._emit(
                EventKind.UTTERANCE_SPOKEN, {"index": index, "source": "warmup", "text": text}
            )
            self.gateway.send(RobotCommand.blink())
        else:
            self.gateway.send(RobotCommand.rest())

    def _reissue_phase_command(self) -> None:
        if self._pending_q is not None:
            return
        phase = self.timeline.phases[self._phase_index]
        if phase.kind is PhaseKind.PERFORMANCE:
            left = phase.duration_s - self._elapsed
            if left > _EPS:
                self.gateway.send(RobotCommand.co_perform(phase.exercise_id, left))
        elif phase.kind is PhaseKind.DEMONSTRATION:
            self.gateway.send(RobotCommand.demonstrate(phase.exercise_id))

    def _end_phase(self) -> None:
        index = self._phase_index
        phase = self.timeline.phases[index]
        payload: dict = {"index": index, "kind": phase.kind.value}
        if phase.exercise_id is not None:
            payload["exercise_id"] = phase.exercise_id
        self._emit(EventKind.PHASE_ENDED, payload)
        self._ended.add(index)
        if (
            phase.kind is PhaseKind.PERFORMANCE
            and self._spec(phase.exercise_id).requires_standup_correction
        ):
            self.gateway.send(RobotCommand.stand_up())
            self.gateway.send(RobotCommand.correct_heading())
            self._emit(
                EventKind.HEADING_CORRECTED,
                {"exercise_id": phase.exercise_id, "index": index},
            )
        if phase.kind is PhaseKind.DEMONSTRATION:
            self._pending_q = index
            self.gateway.send(RobotCommand.speak(UNDERSTANDING_QUESTION))
            self._emit(
                EventKind.UNDERSTANDING_ASKED,
                {"index": index, "text": UNDERSTANDING_QUESTION},
            )
            return
        self._advance_from(index)

    def _advance_from(self, index: int) -> None:
        if index + 1 >= len(self.timeline.phases):
            self.gateway.send(RobotCommand.rest())
            self._set_state(SessionState.COMPLETED)
            return
        self._phase_index = index + 1
        self._start_phase(self._phase_index)

    # -- inbound signals ----------------------------------------------------------

    def answer_understanding(self, answer: str) -> list[SessionEvent]:
        with self._lock:
            if answer not in ("yes", "no"):
                raise ParseError(f"answer must be 'yes' or 'no', got {answer!r}")
            if self._pending_q is None:
                raise NoPendingQuestion("no understanding question is pending")
            return self._collect(lambda: self._answer_locked(answer))

    def _answer_locked(self, answer: str) -> None:
        index = self._pending_q
        self._pending_q = None
        self._emit(EventKind.UNDERSTANDING_ANSWERED, {"answer": answer, "index": index})
        if answer == "no" and self._replays.get(index, 0) < self.config.demo_replay_cap:
            self._replays[index] = self._replays.get(index, 0) + 1
            self._start_phase(index, replay_demo=True)
        else:
            self._advance_from(index)

    def on_vitals(self, bpm: float) -> list[SessionEvent]:
        with self._lock:
            if self._state is not SessionState.RUNNING:
                return []
            def go() -> None:
                for kind in self._vitals.sample(bpm):
                    pool = "calm_down" if kind == "TooHard" else "speed_up"
                    self._alerts["too_hard" if kind == "TooHard" else "too_slow"] += 1
                    text = self.policy.next_utterance(pool, self.profile)
                    self.gateway.send(RobotCommand.speak(text))
                    self._emit(
                        EventKind.VITALS_ALERT, {"bpm": bpm, "kind": kind, "text": text}
                    )
            return self._collect(go)

    def on_rep(self, exercise_id: str, t: float | None = None) -> list[SessionEvent]:
        with self._lock:
            if self._state is not SessionState.RUNNING or self._phase_index is None:
                log.debug("rep for %s ignored: session not running", exercise_id)
                return []
            phase = self.timeline.phases[self._phase_index]
            if phase.kind is not PhaseKind.PERFORMANCE or phase.exercise_id != exercise_id:
                log.debug(
                    "rep for %s ignored outside its Performance phase (at %s)",
                    exercise_id,
                    phase.kind.value,
                )
                return []
            def go() -> None:
                _, count = self._per_phase_reps.get(self._phase_index, (exercise_id, 0))
                count += 1
                self._per_phase_reps[self._phase_index] = (exercise_id, count)
                self._last_activity_t = self._t
                self._emit(
                    EventKind.REP_COUNTED,
                    {
                        "count": count,
                        "exercise_id": exercise_id,
                        "phase_index": self._phase_index,
                    },
                )
            return self._collect(go)

    def attach_pose(self, model: pose_mod.PoseModel) -> None:
        with self._lock:
            if not self.profile.camera_consent:
                raise ConsentRequired("camera-based pose tracking needs patient consent")
            self._pose_model = model
            self._pose_counter = pose_mod.new_counter(0.0)

    def on_pose_frame(self, frame: pose_mod.KeypointFrame) -> list[SessionEvent]:
        with self._lock:
            if self._pose_model is None:
                return []
            label = pose_mod.classify(self._pose_model, frame)
            self._pose_counter, counted = pose_mod.update(
                self._pose_model, self._pose_counter, label, frame.t
            )
            if counted:
                return self.on_rep(self._pose_model.exercise_id, frame.t)
            return []

    def chat_utterance(self, text: str, degraded: bool = False) -> list[SessionEvent]:
        """Voice a chat reply and record it; only meaningful while chatting."""
        with self._lock:
            if self._state not in (SessionState.PRE_CHAT, SessionState.POST_CHAT):
                raise IllegalTransition(f"no chat is active in {self._state.value}")
            def go() -> None:
                self.gateway.send(RobotCommand.speak(text))
                payload = {"source": "chat", "text": text}
                if degraded:
                    payload["degraded"] = True
                self._emit(EventKind.UTTERANCE_SPOKEN, payload)
            return self._collect(go)

    def on_hot_device(self, joint: str) -> list[SessionEvent]:
        with self._lock:
            if self._state not in (SessionState.RUNNING, SessionState.PAUSED):
                return []
            def go() -> None:
                self._alerts["hot_device"] += 1
                self._emit(EventKind.HOT_DEVICE_ALERT, {"joint": joint})
            return self._collect(go)

    def run_button_round(
        self,
        target_color: str | None = None,
        presses: Iterable[tuple[str, float]] = (),
        timeout_s: float | None = None,
        colors: Sequence[str] = BUTTON_COLORS,
    ) -> SessionEvent:
        with self._lock:
            if (
                self._state is not SessionState.RUNNING
                or self.timeline.phases[self._phase_index].kind is not PhaseKind.WARMUP_GAME
            ):
                raise IllegalTransition("button rounds run only during the warm-up game")
            timeout = self.config.button_timeout_s if timeout_s is None else float(timeout_s)
            frame = self.gateway.last_frame()
            connected = frame.buttons_connected if frame is not None else {}
            disconnected = sorted(c for c in colors if not connected.get(c, True))
            if disconnected:
                return self._emit(
                    EventKind.BUTTON_ROUND,
                    {
                        "disconnected": disconnected,
                        "index": self._phase_index,
                        "skipped": True,
                    },
                )
            target = target_color or self.policy.choose_color(colors)
            prompt = f"Press the {target} button!"
            self.gateway.send(RobotCommand.speak(prompt))
            self._emit(
                EventKind.UTTERANCE_SPOKEN,
                {"index": self._phase_index, "source": "button_game", "text": prompt},
            )
            score = 0
            reaction_s: float | None = None
            for color, t_offset in presses:
                if t_offset > timeout:
                    break
                if color == target:
                    score = 1
                    reaction_s = t_offset
                break  # only the first press within the window counts
            payload = {
                "index": self._phase_index,
                "reaction_s": reaction_s,
                "score": score,
                "target_color": target,
            }
            ev = self._emit(EventKind.BUTTON_ROUND, payload)
            self.warmup_rounds.append(dict(payload))
            return ev
