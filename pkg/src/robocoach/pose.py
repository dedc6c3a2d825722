"""Pose pipeline: keypoint frames in, posture labels and repetitions out.

The classifier is deliberately simple: each model labels a frame by checking
threshold predicates over joint angles (or vertical offsets), and a repetition
is the transition from the model's start label into its work label.  Frames
the model cannot read (missing joints, low confidence, no predicate match)
are Indeterminate, represented as ``None``, and the counter holds its last
label across them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DegeneratePoints, NonMonotonicTime, ParseError

# 25-joint body naming convention used by the keypoint extractor.
BODY25_JOINTS = (
    "Nose", "Neck",
    "RShoulder", "RElbow", "RWrist",
    "LShoulder", "LElbow", "LWrist",
    "MidHip",
    "RHip", "RKnee", "RAnkle",
    "LHip", "LKnee", "LAnkle",
    "REye", "LEye", "REar", "LEar",
    "LBigToe", "LSmallToe", "LHeel",
    "RBigToe", "RSmallToe", "RHeel",
)

_BODY25_SET = frozenset(BODY25_JOINTS)

POSE_MODELS_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class KeypointFrame:
    """One observed skeleton: joint name -> (x, y, confidence)."""

    t: float
    joints: Mapping[str, tuple[float, float, float]]


def joint_angle(
    a: Sequence[float], b: Sequence[float], c: Sequence[float]
) -> float:
    """Interior angle at b, in degrees within [0, 180]."""
    bax, bay = a[0] - b[0], a[1] - b[1]
    bcx, bcy = c[0] - b[0], c[1] - b[1]
    na = math.hypot(bax, bay)
    nc = math.hypot(bcx, bcy)
    if na < 1e-12 or nc < 1e-12:
        raise DegeneratePoints("joint angle needs three distinct points")
    cos = (bax * bcx + bay * bcy) / (na * nc)
    return math.degrees(math.acos(max(-1.0, min(1.0, cos))))


@dataclass(frozen=True)
class Predicate:
    kind: str  # "angle" (three joints) or "ydiff" (two joints, y[a] - y[b])
    joints: tuple[str, ...]
    op: str  # "ge" or "le"
    value: float

    def holds(self, frame: KeypointFrame) -> bool:
        pts = [frame.joints[j] for j in self.joints]
        if self.kind == "angle":
            measured = joint_angle(pts[0], pts[1], pts[2])
        else:
            measured = pts[0][1] - pts[1][1]
        return measured >= self.value if self.op == "ge" else measured <= self.value


@dataclass(frozen=True)
class LabelRule:
    name: str
    predicates: tuple[Predicate, ...]


@dataclass(frozen=True)
class PoseModel:
    id: str
    exercise_id: str
    min_confidence: float
    start_label: str
    work_label: str
    labels: tuple[LabelRule, ...]

    @property
    def referenced_joints(self) -> frozenset[str]:
        return frozenset(j for rule in self.labels for p in rule.predicates for j in p.joints)


def _model_from_doc(doc: dict) -> PoseModel:
    labels = []
    for rule in doc["labels"]:
        preds = []
        for p in rule["all"]:
            kind = p["kind"]
            joints = tuple(p["joints"])
            if kind == "angle" and len(joints) != 3:
                raise ParseError(f"angle predicate needs 3 joints, got {len(joints)}")
            if kind == "ydiff" and len(joints) != 2:
                raise ParseError(f"ydiff predicate needs 2 joints, got {len(joints)}")
            if kind not in ("angle", "ydiff"):
                raise ParseError(f"unknown predicate kind {kind!r}")
            if p["op"] not in ("ge", "le"):
                raise ParseError(f"unknown predicate op {p['op']!r}")
            unknown = set(joints) - _BODY25_SET
            if unknown:
                raise ParseError(f"predicate references unknown joints: {sorted(unknown)}")
            preds.append(Predicate(kind=kind, joints=joints, op=p["op"], value=float(p["value"])))
        labels.append(LabelRule(name=rule["name"], predicates=tuple(preds)))
    names = [r.name for r in labels]
    if len(names) < 2:
        raise ParseError(f"pose model {doc['id']!r} needs at least 2 labels")
    if len(set(names)) != len(names):
        raise ParseError(f"pose model {doc['id']!r} has duplicate labels")
    model = PoseModel(
        id=doc["id"],
        exercise_id=doc["exercise_id"],
        min_confidence=float(doc["min_confidence"]),
        start_label=doc["start_label"],
        work_label=doc["work_label"],
        labels=tuple(labels),
    )
    if model.start_label not in names or model.work_label not in names:
        raise ParseError(f"pose model {doc['id']!r}: start/work labels must be defined labels")
    return model


def load_pose_models(path: str | Path | None = None) -> dict[str, PoseModel]:
    """Pose models by id; with no path, the bundled ones."""
    if path is None:
        with resources.files("robocoach.data").joinpath("pose_models.json").open("rb") as fh:
            doc = json.load(fh)
    else:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ParseError(f"cannot read pose models: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"pose models file is not valid JSON: {exc}") from None
    if doc.get("schema_version") != POSE_MODELS_SCHEMA_VERSION:
        raise ParseError("unsupported pose models schema_version")
    models = {}
    for mdoc in doc["models"]:
        model = _model_from_doc(mdoc)
        if model.id in models:
            raise ParseError(f"duplicate pose model id {model.id!r}")
        models[model.id] = model
    return models


def classify(model: PoseModel, frame: KeypointFrame) -> str | None:
    """Label a frame, or None (Indeterminate) when the model cannot read it.

    A frame is only readable when every joint the model references is present
    with confidence at or above the model's floor.  At most one label can
    match a readable frame; anything else is Indeterminate.
    """
    for joint in model.referenced_joints:
        kp = frame.joints.get(joint)
        if kp is None or kp[2] < model.min_confidence:
            return None
    matched = None
    for rule in model.labels:
        if all(p.holds(frame) for p in rule.predicates):
            if matched is not None:
                return None
            matched = rule.name
    return matched


@dataclass(frozen=True)
class RepCounterState:
    last_label: str | None
    reps: int
    last_activity_t: float


def new_counter(t0: float = 0.0) -> RepCounterState:
    return RepCounterState(last_label=None, reps=0, last_activity_t=t0)


def update(
    model: PoseModel, state: RepCounterState, label: str | None, t: float
) -> tuple[RepCounterState, bool]:
    """Fold one label observation into the counter.

    Indeterminate holds the last label.  A repetition is emitted exactly on
    the start-label -> work-label transition; the first determinate label
    only initializes the counter.
    """
    if label is None:
        return state, False
    if state.last_label is None:
        return replace(state, last_label=label), False
    rep = state.last_label == model.start_label and label == model.work_label
    if rep:
        return RepCounterState(last_label=label, reps=state.reps + 1, last_activity_t=t), True
    if label != state.last_label:
        return replace(state, last_label=label), False
    return state, False


def engagement(state: RepCounterState, now_t: float, window_s: float = 20.0) -> bool:
    """False only when the window has strictly elapsed since the last rep."""
    return (now_t - state.last_activity_t) <= window_s


# -- trace files ---------------------------------------------------------------

def ingest_trace(path: str | Path) -> list[KeypointFrame]:
    """Read a line-delimited JSON keypoint trace.

    Each line is {"t": seconds, "joints": {name: [x, y, confidence]}}.
    Timestamps must strictly increase; joints must use the 25-joint naming
    convention with finite coordinates and confidence in [0, 1].
    """
    frames: list[KeypointFrame] = []
    prev_t: float | None = None
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read trace: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            t = float(doc["t"])
            joints = {}
            for name, xyc in doc["joints"].items():
                x, y, c = float(xyc[0]), float(xyc[1]), float(xyc[2])
                joints[name] = (x, y, c)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, IndexError) as exc:
            raise ParseError(f"trace line {lineno} is malformed: {exc}") from None
        for name, (x, y, c) in joints.items():
            if name not in _BODY25_SET:
                raise ParseError(f"trace line {lineno}: unknown joint {name!r}")
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ParseError(f"trace line {lineno}: non-finite coordinates for {name}")
            if not 0.0 <= c <= 1.0:
                raise ParseError(f"trace line {lineno}: confidence {c} outside [0, 1]")
        if not math.isfinite(t):
            raise ParseError(f"trace line {lineno}: non-finite timestamp")
        if prev_t is not None and t <= prev_t:
            raise NonMonotonicTime(
                f"trace line {lineno}: t={t:g} does not increase past {prev_t:g}"
            )
        prev_t = t
        frames.append(KeypointFrame(t=t, joints=joints))
    return frames


def write_trace(path: str | Path, frames: Iterable[KeypointFrame]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for f in frames:
            fh.write(
                json.dumps(
                    {"t": f.t, "joints": {k: list(v) for k, v in f.joints.items()}},
                    sort_keys=True,
                )
                + "\n"
            )


def _leg_frame(t: float, knee_angle_deg: float, confidence: float = 0.95) -> KeypointFrame:
    """A minimal right-leg skeleton with the requested interior knee angle."""
    knee = (0.5, 0.5)
    shank = 0.2
    ankle = (0.5, 0.5 + shank)
    # Hip placed so that the angle between (hip - knee) and (ankle - knee)
    # comes out at knee_angle_deg: rotate the upward thigh vector.
    theta = math.radians(180.0 - knee_angle_deg)
    hip = (0.5 + shank * math.sin(theta), 0.5 - shank * math.cos(theta))
    joints = {
        "RHip": (hip[0], hip[1], confidence),
        "RKnee": (knee[0], knee[1], confidence),
        "RAnkle": (ankle[0], ankle[1], confidence),
        "MidHip": (hip[0] - 0.02, hip[1], confidence),
        "Neck": (hip[0] - 0.02, hip[1] - 0.3, confidence),
    }
    return KeypointFrame(t=t, joints=joints)


def synthesize_squat_trace(
    cycles: int,
    start_t: float = 0.0,
    dt: float = 0.25,
    frames_per_posture: int = 3,
    standing_angle_deg: float = 172.0,
    squatting_angle_deg: float = 92.0,
) -> list[KeypointFrame]:
    """A synthetic squat trace with exactly ``cycles`` stand->squat descents.

    The trace starts standing and ends standing, so the squat counter sees
    precisely one start-to-work transition per cycle.
    """
    if cycles < 0:
        raise ValueError("cycles must be >= 0")
    frames: list[KeypointFrame] = []
    t = start_t

    def emit(angle: float) -> None:
        nonlocal t
        for _ in range(frames_per_posture):
            frames.append(_leg_frame(t, angle))
            t += dt

    emit(standing_angle_deg)
    for _ in range(cycles):
        emit(squatting_angle_deg)
        emit(standing_angle_deg)
    return frames
