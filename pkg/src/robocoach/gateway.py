"""Robot gateway: command channel plus telemetry pub/sub.

The gateway is the seam between session logic and the physical robot.  Two
backends live here: a simulator with simple linear dynamics (battery drain,
joint heating, heading drift on stand-up) that the whole test suite runs
against, and a thin wire stub for driving a real robot over a socket with
length-prefixed JSON frames.

Topic names are part of the wire contract and must not be reworded.
"""

from __future__ import annotations

import json
import queue
import socket
import struct
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping

from .catalog import FloorProfile, Position
from .errors import (
    Disconnected,
    InvalidCommand,
    NotOnFloor,
    NotStanding,
    ParseError,
    RobocoachError,
    UnknownTopic,
)

TOPIC_HOT_DEVICE = "HotDeviceDetected"
TOPIC_BATTERY = "BatteryLevel"
TOPIC_JOINT_TEMPS = "JointTemperatures"
TOPIC_HEADING = "Heading"
TOPIC_BUTTONS = "ButtonLinkStatus"

TOPICS = frozenset(
    {TOPIC_HOT_DEVICE, TOPIC_BATTERY, TOPIC_JOINT_TEMPS, TOPIC_HEADING, TOPIC_BUTTONS}
)

BUTTON_COLORS = ("red", "green", "blue", "yellow")

JOINT_NAMES = (
    "HeadYaw",
    "LShoulderPitch", "RShoulderPitch",
    "LElbowRoll", "RElbowRoll",
    "LHipPitch", "RHipPitch",
    "LKneePitch", "RKneePitch",
    "LAnklePitch", "RAnklePitch",
)


class CommandKind(str, Enum):
    SPEAK = "Speak"
    DEMONSTRATE_EXERCISE = "DemonstrateExercise"
    CO_PERFORM = "CoPerform"
    REST_POSTURE = "RestPosture"
    STAND_UP_FROM_FLOOR = "StandUpFromFloor"
    CORRECT_HEADING = "CorrectHeading"
    SET_VOLUME = "SetVolume"
    BLINK = "Blink"


@dataclass(frozen=True)
class RobotCommand:
    kind: CommandKind
    text: str | None = None
    exercise_id: str | None = None
    duration_s: float | None = None
    level: int | None = None

    @classmethod
    def speak(cls, text: str, level: int | None = None) -> "RobotCommand":
        return cls(kind=CommandKind.SPEAK, text=text, level=level)

    @classmethod
    def demonstrate(cls, exercise_id: str) -> "RobotCommand":
        return cls(kind=CommandKind.DEMONSTRATE_EXERCISE, exercise_id=exercise_id)

    @classmethod
    def co_perform(cls, exercise_id: str, duration_s: float) -> "RobotCommand":
        return cls(kind=CommandKind.CO_PERFORM, exercise_id=exercise_id, duration_s=duration_s)

    @classmethod
    def rest(cls) -> "RobotCommand":
        return cls(kind=CommandKind.REST_POSTURE)

    @classmethod
    def stand_up(cls) -> "RobotCommand":
        return cls(kind=CommandKind.STAND_UP_FROM_FLOOR)

    @classmethod
    def correct_heading(cls) -> "RobotCommand":
        return cls(kind=CommandKind.CORRECT_HEADING)

    @classmethod
    def set_volume(cls, level: int) -> "RobotCommand":
        return cls(kind=CommandKind.SET_VOLUME, level=level)

    @classmethod
    def blink(cls) -> "RobotCommand":
        return cls(kind=CommandKind.BLINK)

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value}
        for key in ("text", "exercise_id", "duration_s", "level"):
            v = getattr(self, key)
            if v is not None:
                d[key] = v
        return d


def validate_command(cmd: RobotCommand) -> None:
    if cmd.kind is CommandKind.SPEAK and not (cmd.text or "").strip():
        raise InvalidCommand("Speak needs non-empty text")
    if cmd.kind in (CommandKind.DEMONSTRATE_EXERCISE, CommandKind.CO_PERFORM) and not cmd.exercise_id:
        raise InvalidCommand(f"{cmd.kind.value} needs an exercise_id")
    if cmd.kind is CommandKind.CO_PERFORM and (cmd.duration_s is None or cmd.duration_s <= 0):
        raise InvalidCommand("CoPerform needs a positive duration_s")
    if cmd.kind is CommandKind.SET_VOLUME or (cmd.kind is CommandKind.SPEAK and cmd.level is not None):
        if cmd.level is None or not (0 <= cmd.level <= 100):
            raise InvalidCommand(f"volume level must be within [0, 100], got {cmd.level}")


def wrap_heading(deg: float) -> float:
    """Normalize to (-180, 180]."""
    w = (deg + 180.0) % 360.0 - 180.0
    return 180.0 if w == -180.0 else w


@dataclass(frozen=True)
class TelemetryFrame:
    t_sim_s: float
    battery_pct: float
    joint_temp: Mapping[str, float]
    hot_devices: tuple[str, ...]
    heading_deg: float
    buttons_connected: Mapping[str, bool]

    def to_dict(self) -> dict:
        return {
            "t_sim_s": self.t_sim_s,
            "battery_pct": self.battery_pct,
            "joint_temp": dict(self.joint_temp),
            "hot_devices": list(self.hot_devices),
            "heading_deg": self.heading_deg,
            "buttons_connected": dict(self.buttons_connected),
        }


class Subscription:
    """One consumer's FIFO view of a topic."""

    def __init__(self, topic: str, unsubscribe: Callable[["Subscription"], None]):
        self.topic = topic
        self._q: queue.Queue = queue.Queue()
        self._unsubscribe = unsubscribe

    def get(self, timeout: float | None = None) -> dict:
        return self._q.get(timeout=timeout)

    def drain(self) -> list[dict]:
        out = []
        while True:
            try:
                out.append(self._q.get_nowait())
            except queue.Empty:
                return out

    def close(self) -> None:
        self._unsubscribe(self)


class TelemetryBus:
    """Per-topic fan-out with a retained last value for late subscribers."""

    def __init__(self, topics: Iterable[str] = TOPICS):
        self._topics = frozenset(topics)
        self._lock = threading.Lock()
        self._subs: dict[str, list[Subscription]] = {t: [] for t in self._topics}
        self._retained: dict[str, dict] = {}
        self._taps: list[Callable[[str, dict], None]] = []

    def _check(self, topic: str) -> None:
        if topic not in self._topics:
            raise UnknownTopic(f"unknown topic {topic!r}")

    def tap(self, fn: Callable[[str, dict], None]) -> None:
        """Register a synchronous observer of every publish (all topics)."""
        with self._lock:
            self._taps.append(fn)

    def publish(self, topic: str, message: dict) -> None:
        self._check(topic)
        with self._lock:
            self._retained[topic] = message
            for sub in self._subs[topic]:
                sub._q.put(message)
            taps = list(self._taps)
        for fn in taps:
            fn(topic, message)

    def subscribe(self, topic: str) -> Subscription:
        self._check(topic)
        with self._lock:
            sub = Subscription(topic, self._remove)
            retained = self._retained.get(topic)
            if retained is not None:
                sub._q.put(retained)
            self._subs[topic].append(sub)
            return sub

    def retained(self, topic: str) -> dict | None:
        self._check(topic)
        with self._lock:
            return self._retained.get(topic)

    def _remove(self, sub: Subscription) -> None:
        with self._lock:
            try:
                self._subs[sub.topic].remove(sub)
            except ValueError:
                pass


@dataclass
class SimConfig:
    floor_profile: FloorProfile = FloorProfile.EVEN
    battery_start_pct: float = 100.0
    # %/min by robot activity
    battery_drain_pct_per_min: dict = field(
        default_factory=lambda: {"idle": 0.1, "demonstrate": 1.0, "co_perform": 1.5}
    )
    ambient_temp_u: float = 30.0
    joint_heat_rate_u_per_min: float = 0.5
    joint_cool_rate_u_per_min: float = 1.0
    hot_threshold_u: float = 75.0
    standup_drift_deg: float = 12.0
    heading_tolerance_deg: float = 2.0
    start_volume: int = 50
    buttons_connected: dict = field(default_factory=lambda: {c: True for c in BUTTON_COLORS})

    @classmethod
    def from_dict(cls, doc: dict) -> "SimConfig":
        cfg = cls()
        for key, value in doc.items():
            if not hasattr(cfg, key):
                raise ParseError(f"unknown sim config key {key!r}")
            if key == "floor_profile":
                value = FloorProfile(value)
            setattr(cfg, key, value)
        return cfg


class Activity(str, Enum):
    IDLE = "Idle"
    DEMONSTRATING = "Demonstrating"
    CO_PERFORMING = "CoPerforming"


class Posture(str, Enum):
    STANDING = "Standing"
    FLOOR = "Floor"


class RobotGateway:
    """What session logic is allowed to assume about a robot backend."""

    def send(self, cmd: RobotCommand) -> None:
        raise NotImplementedError

    def subscribe(self, topic: str) -> Subscription:
        raise NotImplementedError

    def last_frame(self) -> TelemetryFrame | None:
        raise NotImplementedError


class SimulatedRobot(RobotGateway):
    """Desk-scale robot stand-in with deterministic linear dynamics.

    Commands are acknowledged at ``send`` and applied at the start of the
    next ``sim_step``.  The simulator publishes a topic only when the value
    behind it changed, so an idle robot is silent apart from the retained
    snapshots new subscribers receive.
    """

    def __init__(
        self,
        config: SimConfig | None = None,
        exercise_positions: Mapping[str, Position] | None = None,
    ):
        self.config = config or SimConfig()
        self.bus = TelemetryBus()
        self._positions = dict(exercise_positions or {})
        self._lock = threading.RLock()
        self._connected = True
        self._t = 0.0
        self._battery = float(self.config.battery_start_pct)
        self._temps = {j: float(self.config.ambient_temp_u) for j in JOINT_NAMES}
        self._hot = {j: False for j in JOINT_NAMES}
        self._heading = 0.0
        self._buttons = dict(self.config.buttons_connected)
        self._posture = Posture.STANDING
        self._activity = Activity.IDLE
        self._activity_remaining: float | None = None
        self._volume = int(self.config.start_volume)
        self._queue: list[RobotCommand] = []
        self.commands: list[RobotCommand] = []
        self.spoken: list[tuple[str, int]] = []
        self.rejected: list[tuple[RobotCommand, str]] = []
        self._last_frame = self._build_frame()
        self._publish_initial()

    # -- gateway interface ----------------------------------------------------

    def send(self, cmd: RobotCommand) -> None:
        with self._lock:
            if not self._connected:
                raise Disconnected("robot gateway is not connected")
            validate_command(cmd)
            self.commands.append(cmd)
            self._queue.append(cmd)

    def subscribe(self, topic: str) -> Subscription:
        return self.bus.subscribe(topic)

    def last_frame(self) -> TelemetryFrame:
        with self._lock:
            return self._last_frame

    # -- simulation -----------------------------------------------------------

    def sim_step(self, dt_s: float) -> TelemetryFrame:
        if dt_s < 0:
            raise InvalidCommand(f"sim_step needs dt_s >= 0, got {dt_s}")
        with self._lock:
            prev = self._last_frame
            for cmd in self._queue:
                try:
                    self._apply(cmd)
                except RobocoachError as exc:
                    # A real robot refuses and carries on; so does the sim.
                    self.rejected.append((cmd, str(exc)))
            self._queue.clear()
            self._advance(dt_s)
            self._t += dt_s
            frame = self._build_frame()
            self._last_frame = frame
            outbox = self._collect_changes(prev, frame)
        # Published outside the lock so bus observers may call back into
        # components that themselves command the gateway.
        self._publish(outbox)
        return frame

    def _apply(self, cmd: RobotCommand) -> None:
        if cmd.kind is CommandKind.SPEAK:
            self.spoken.append((cmd.text or "", cmd.level if cmd.level is not None else self._volume))
        elif cmd.kind is CommandKind.SET_VOLUME:
            self._volume = int(cmd.level or 0)
        elif cmd.kind is CommandKind.DEMONSTRATE_EXERCISE:
            self._activity = Activity.DEMONSTRATING
            self._activity_remaining = None
            if self._positions.get(cmd.exercise_id) is Position.FLOOR:
                self._posture = Posture.FLOOR
        elif cmd.kind is CommandKind.CO_PERFORM:
            self._activity = Activity.CO_PERFORMING
            self._activity_remaining = float(cmd.duration_s or 0.0)
            if self._positions.get(cmd.exercise_id) is Position.FLOOR:
                self._posture = Posture.FLOOR
        elif cmd.kind is CommandKind.REST_POSTURE:
            self._activity = Activity.IDLE
            self._activity_remaining = None
        elif cmd.kind is CommandKind.STAND_UP_FROM_FLOOR:
            self._stand_up_locked()
        elif cmd.kind is CommandKind.CORRECT_HEADING:
            self._correct_heading_locked()
        # Blink has no simulated effect beyond the command record.

    def _advance(self, dt_s: float) -> None:
        remaining = dt_s
        while remaining > 1e-12:
            seg = remaining
            if self._activity is Activity.CO_PERFORMING and self._activity_remaining is not None:
                seg = min(seg, self._activity_remaining)
            self._drain_battery(seg)
            self._heat_joints(seg)
            if self._activity is Activity.CO_PERFORMING and self._activity_remaining is not None:
                self._activity_remaining -= seg
                if self._activity_remaining <= 1e-12:
                    self._activity = Activity.IDLE
                    self._activity_remaining = None
            remaining -= seg

    def _drain_rate(self) -> float:
        key = {
            Activity.IDLE: "idle",
            Activity.DEMONSTRATING: "demonstrate",
            Activity.CO_PERFORMING: "co_perform",
        }[self._activity]
        return float(self.config.battery_drain_pct_per_min.get(key, 0.0))

    def _drain_battery(self, dt_s: float) -> None:
        self._battery = max(0.0, self._battery - self._drain_rate() * dt_s / 60.0)

    def _heat_joints(self, dt_s: float) -> None:
        moving = self._activity in (Activity.DEMONSTRATING, Activity.CO_PERFORMING)
        if moving:
            delta = self.config.joint_heat_rate_u_per_min * dt_s / 60.0
            for j in self._temps:
                self._temps[j] += delta
        else:
            delta = self.config.joint_cool_rate_u_per_min * dt_s / 60.0
            for j in self._temps:
                self._temps[j] = max(self.config.ambient_temp_u, self._temps[j] - delta)

    def _build_frame(self) -> TelemetryFrame:
        hot = tuple(j for j in JOINT_NAMES if self._temps[j] > self.config.hot_threshold_u)
        return TelemetryFrame(
            t_sim_s=self._t,
            battery_pct=self._battery,
            joint_temp=dict(self._temps),
            hot_devices=hot,
            heading_deg=self._heading,
            buttons_connected=dict(self._buttons),
        )

    def _publish_initial(self) -> None:
        f = self._last_frame
        self._publish(
            [
                (TOPIC_BATTERY, {"t_sim_s": f.t_sim_s, "battery_pct": f.battery_pct}),
                (
                    TOPIC_JOINT_TEMPS,
                    {
                        "t_sim_s": f.t_sim_s,
                        "joint_temp": dict(f.joint_temp),
                        "hot_devices": list(f.hot_devices),
                    },
                ),
                (TOPIC_HEADING, {"t_sim_s": f.t_sim_s, "heading_deg": f.heading_deg}),
                (TOPIC_BUTTONS, {"t_sim_s": f.t_sim_s, "buttons_connected": dict(f.buttons_connected)}),
            ]
        )

    def _publish(self, outbox: list[tuple[str, dict]]) -> None:
        for topic, message in outbox:
            self.bus.publish(topic, message)

    def _collect_changes(
        self, prev: TelemetryFrame, cur: TelemetryFrame
    ) -> list[tuple[str, dict]]:
        out: list[tuple[str, dict]] = []
        if cur.battery_pct != prev.battery_pct:
            out.append((TOPIC_BATTERY, {"t_sim_s": cur.t_sim_s, "battery_pct": cur.battery_pct}))
        if cur.joint_temp != prev.joint_temp or cur.hot_devices != prev.hot_devices:
            out.append(
                (
                    TOPIC_JOINT_TEMPS,
                    {
                        "t_sim_s": cur.t_sim_s,
                        "joint_temp": dict(cur.joint_temp),
                        "hot_devices": list(cur.hot_devices),
                    },
                )
            )
        if cur.heading_deg != prev.heading_deg:
            out.append((TOPIC_HEADING, {"t_sim_s": cur.t_sim_s, "heading_deg": cur.heading_deg}))
        if cur.buttons_connected != prev.buttons_connected:
            out.append(
                (
                    TOPIC_BUTTONS,
                    {"t_sim_s": cur.t_sim_s, "buttons_connected": dict(cur.buttons_connected)},
                )
            )
        # Rising edges only: one detection per hot excursion of a joint.
        for j in JOINT_NAMES:
            now_hot = self._temps[j] > self.config.hot_threshold_u
            if now_hot and not self._hot[j]:
                out.append(
                    (TOPIC_HOT_DEVICE, {"t_sim_s": cur.t_sim_s, "joint": j, "temp_u": self._temps[j]})
                )
            self._hot[j] = now_hot
        return out

    # -- direct simulator operations (same effects as the queued commands) -----

    def stand_up_from_floor(self) -> float:
        with self._lock:
            prev = self._last_frame
            self._stand_up_locked()
            self._last_frame = self._build_frame()
            outbox = self._collect_changes(prev, self._last_frame)
            heading = self._heading
        self._publish(outbox)
        return heading

    def _stand_up_locked(self) -> None:
        if self._posture is not Posture.FLOOR:
            raise NotOnFloor("robot is not on the floor")
        self._heading = wrap_heading(self._heading + self.config.standup_drift_deg)
        self._posture = Posture.STANDING
        self._activity = Activity.IDLE
        self._activity_remaining = None

    def correct_heading(self) -> float:
        with self._lock:
            prev = self._last_frame
            self._correct_heading_locked()
            self._last_frame = self._build_frame()
            outbox = self._collect_changes(prev, self._last_frame)
            heading = self._heading
        self._publish(outbox)
        return heading

    def _correct_heading_locked(self) -> None:
        if self._posture is not Posture.STANDING:
            raise NotStanding("heading correction requires a standing robot")
        # Walking correction back to the nominal facing direction.
        self._heading = 0.0

    def set_button_connected(self, color: str, connected: bool) -> None:
        with self._lock:
            if color not in self._buttons:
                raise InvalidCommand(f"unknown button color {color!r}")
            prev = self._last_frame
            self._buttons[color] = connected
            self._last_frame = self._build_frame()
            outbox = self._collect_changes(prev, self._last_frame)
        self._publish(outbox)

    def disconnect(self) -> None:
        with self._lock:
            self._connected = False

    def reconnect(self) -> None:
        with self._lock:
            self._connected = True

    # -- inspection helpers -----------------------------------------------------

    @property
    def battery_pct(self) -> float:
        with self._lock:
            return self._battery

    @property
    def heading_deg(self) -> float:
        with self._lock:
            return self._heading

    @property
    def posture(self) -> Posture:
        with self._lock:
            return self._posture

    @property
    def activity(self) -> Activity:
        with self._lock:
            return self._activity

    @property
    def volume(self) -> int:
        with self._lock:
            return self._volume

    @property
    def buttons_connected(self) -> dict[str, bool]:
        with self._lock:
            return dict(self._buttons)


# -- wire stub -------------------------------------------------------------------
#
# The remote backend speaks length-prefixed JSON over one duplex stream:
# a 4-byte big-endian payload length, then that many bytes of UTF-8 JSON.
# Commands go out as {"type": "command", "command": {...}}; telemetry comes
# back as {"type": "telemetry", "topic": "...", "message": {...}}.  This stub
# is not exercised by the simulator-based test rig beyond framing round-trips.

def encode_wire_frame(obj: dict) -> bytes:
    payload = json.dumps(obj, sort_keys=True).encode("utf-8")
    return struct.pack(">I", len(payload)) + payload


def read_wire_frame(read: Callable[[int], bytes]) -> dict | None:
    """Read one frame from a blocking byte reader; None on clean EOF."""
    header = _read_exact(read, 4)
    if header is None:
        return None
    (length,) = struct.unpack(">I", header)
    payload = _read_exact(read, length)
    if payload is None:
        raise ParseError("wire stream truncated mid-frame")
    try:
        return json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"bad wire frame: {exc}") from None


def _read_exact(read: Callable[[int], bytes], n: int) -> bytes | None:
    buf = b""
    while len(buf) < n:
        chunk = read(n - len(buf))
        if not chunk:
            return None if not buf else buf  # caller distinguishes EOF vs truncation
        buf += chunk
    return buf


class RemoteRobotGateway(RobotGateway):
    """Socket-backed gateway for a physical robot; framing per the module note."""

    def __init__(self, host: str, port: int, connect_timeout_s: float = 5.0):
        self.bus = TelemetryBus()
        self._sock = socket.create_connection((host, port), timeout=connect_timeout_s)
        self._sock.settimeout(None)
        self._connected = True
        self._lock = threading.Lock()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def send(self, cmd: RobotCommand) -> None:
        validate_command(cmd)
        with self._lock:
            if not self._connected:
                raise Disconnected("wire gateway is closed")
            self._sock.sendall(encode_wire_frame({"type": "command", "command": cmd.to_dict()}))

    def subscribe(self, topic: str) -> Subscription:
        return self.bus.subscribe(topic)

    def last_frame(self) -> TelemetryFrame | None:
        return None  # the wire protocol has no frame aggregate; consume topics

    def close(self) -> None:
        with self._lock:
            self._connected = False
            try:
                self._sock.close()
            except OSError:
                pass

    def _pump(self) -> None:
        try:
            while True:
                frame = read_wire_frame(self._sock.recv)
                if frame is None:
                    break
                if frame.get("type") == "telemetry" and frame.get("topic") in TOPICS:
                    self.bus.publish(frame["topic"], frame.get("message") or {})
        except (OSError, ParseError):
            pass
        with self._lock:
            self._connected = False
