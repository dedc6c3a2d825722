"""Regimens and their compilation into session timelines.

A regimen is the therapist-facing plan: an ordered list of exercises with
durations plus break policy.  Compilation turns it into the closed sequence of
phases the session engine walks through.  Persistence is a directory of JSON
documents, one per regimen.
"""

from __future__ import annotations

import json
import os
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from importlib import resources
from pathlib import Path

import jsonschema

from . import catalog as cat
from .errors import (
    EmptyRegimen,
    ExcludedExercise,
    InvalidRegimen,
    MissingExercise,
    NegativeDuration,
    NotFound,
    ParseError,
    StorageError,
)

REGIMEN_SCHEMA_VERSION = 1

DEFAULT_DEMO_DURATION_S = 20.0
DEFAULT_WARMUP_DURATION_S = 300.0


@dataclass(frozen=True)
class RegimenEntry:
    exercise_id: str
    duration_s: float


@dataclass(frozen=True)
class Regimen:
    id: str
    name: str
    setting: cat.Setting
    entries: tuple[RegimenEntry, ...]
    short_break_s: float
    long_break_s: float
    station_size: int
    include_warmup_game: bool
    created_at: str
    updated_at: str

    def to_doc(self) -> dict:
        return {
            "schema_version": REGIMEN_SCHEMA_VERSION,
            "id": self.id,
            "name": self.name,
            "setting": self.setting.value,
            "entries": [
                {"exercise_id": e.exercise_id, "duration_s": e.duration_s} for e in self.entries
            ],
            "short_break_s": self.short_break_s,
            "long_break_s": self.long_break_s,
            "station_size": self.station_size,
            "include_warmup_game": self.include_warmup_game,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    exercise_id: str | None = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "message": self.message}
        if self.exercise_id is not None:
            d["exercise_id"] = self.exercise_id
        return d


class PhaseKind(str, Enum):
    WARMUP_GAME = "WarmupGame"
    DEMONSTRATION = "Demonstration"
    PERFORMANCE = "Performance"
    SHORT_BREAK = "ShortBreak"
    LONG_BREAK = "LongBreak"


BREAK_KINDS = frozenset({PhaseKind.SHORT_BREAK, PhaseKind.LONG_BREAK})


@dataclass(frozen=True)
class Phase:
    kind: PhaseKind
    duration_s: float
    start_s: float
    exercise_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "duration_s": self.duration_s,
            "start_s": self.start_s,
            "exercise_id": self.exercise_id,
        }


@dataclass(frozen=True)
class SessionTimeline:
    regimen_id: str
    phases: tuple[Phase, ...]
    total_duration_s: float

    def to_dict(self) -> dict:
        return {
            "regimen_id": self.regimen_id,
            "phases": [p.to_dict() for p in self.phases],
            "total_duration_s": self.total_duration_s,
        }


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


def validate(
    regimen: Regimen,
    catalog: cat.Catalog,
    floor_profile: cat.FloorProfile | None = None,
) -> list[Violation]:
    """Check a regimen against a catalog and floor profile.

    Returns all violations rather than stopping at the first, so a therapist
    sees the whole picture in one pass.
    """
    if floor_profile is None:
        floor_profile = catalog.floor_profiles[regimen.setting]
    violations: list[Violation] = []

    if not regimen.entries:
        violations.append(Violation("EmptyRegimen", "regimen has no entries"))
    if regimen.station_size < 1:
        violations.append(
            Violation("StationSize", f"station_size must be >= 1, got {regimen.station_size}")
        )
    if regimen.long_break_s < regimen.short_break_s:
        violations.append(
            Violation(
                "BreakOrderViolation",
                f"long break ({regimen.long_break_s:g} s) is shorter than "
                f"short break ({regimen.short_break_s:g} s)",
            )
        )
    if regimen.short_break_s < 0 or regimen.long_break_s < 0:
        violations.append(Violation("NegativeBreak", "break durations must be >= 0"))

    for entry in regimen.entries:
        if entry.duration_s <= 0:
            violations.append(
                Violation(
                    "NonPositiveDuration",
                    f"'{entry.exercise_id}' has duration {entry.duration_s:g} s",
                    exercise_id=entry.exercise_id,
                )
            )
        if entry.exercise_id not in catalog:
            violations.append(
                Violation(
                    "UnknownExercise",
                    f"'{entry.exercise_id}' is not in the catalog",
                    exercise_id=entry.exercise_id,
                )
            )
            continue
        spec = catalog.get(entry.exercise_id)
        if not cat.is_allowed(catalog, entry.exercise_id, regimen.setting):
            violations.append(
                Violation(
                    "ExcludedExercise",
                    f"'{entry.exercise_id}' is excluded for {regimen.setting.value}: "
                    f"{cat.exclusion_reason_for(spec) if spec.setting is regimen.setting else f'belongs to {spec.setting.value}'}",
                    exercise_id=entry.exercise_id,
                )
            )
        elif spec.balance_sensitive and floor_profile is cat.FloorProfile.UNEVEN:
            violations.append(
                Violation(
                    "BalanceRisk",
                    f"'{entry.exercise_id}' is balance sensitive and the floor is uneven",
                    exercise_id=entry.exercise_id,
                )
            )
    return violations


def create_regimen(
    catalog: cat.Catalog,
    name: str,
    setting: cat.Setting,
    entries: list[RegimenEntry] | list[tuple[str, float]],
    short_break_s: float = 30.0,
    long_break_s: float = 30.0,
    station_size: int = 4,
    include_warmup_game: bool = False,
    regimen_id: str | None = None,
) -> Regimen:
    """Build a validated regimen; raises on the first hard violation."""
    norm = tuple(
        e if isinstance(e, RegimenEntry) else RegimenEntry(exercise_id=e[0], duration_s=float(e[1]))
        for e in entries
    )
    if not norm:
        raise EmptyRegimen("a regimen needs at least one exercise")
    for entry in norm:
        if entry.duration_s <= 0:
            raise NegativeDuration(
                f"'{entry.exercise_id}' has nonpositive duration {entry.duration_s:g} s"
            )
        spec = catalog.get(entry.exercise_id)
        if not cat.is_allowed(catalog, entry.exercise_id, setting):
            reason = (
                cat.exclusion_reason_for(spec)
                if spec.setting is setting
                else f"belongs to setting {spec.setting.value}"
            )
            raise ExcludedExercise(entry.exercise_id, reason)
    if station_size < 1:
        raise InvalidRegimen(f"station_size must be >= 1, got {station_size}")
    if short_break_s < 0 or long_break_s < 0:
        raise InvalidRegimen("break durations must be >= 0")
    if long_break_s < short_break_s:
        raise InvalidRegimen(
            f"long break ({long_break_s:g} s) must not be shorter than short break ({short_break_s:g} s)"
        )
    now = _now_iso()
    return Regimen(
        id=regimen_id or uuid.uuid4().hex,
        name=name,
        setting=setting,
        entries=norm,
        short_break_s=float(short_break_s),
        long_break_s=float(long_break_s),
        station_size=int(station_size),
        include_warmup_game=bool(include_warmup_game),
        created_at=now,
        updated_at=now,
    )


# Four stations of four strength exercises each.  The catalog clears 14
# strength exercises, so two of them (squat and boxing) fill the last slots a
# second time.
_HIIT_STATIONS = (
    ("boxing", "squat", "lunge", "russian_twist"),
    ("sit_up", "dead_bug", "jackknife", "leg_raise"),
    ("superman", "plank", "hip_raise", "hacker"),
    ("push_up_variations", "hand_push", "squat", "boxing"),
)
_HIIT_STRETCHES = ("side_stretch", "neck_stretch", "trunk_stretch", "calf_stretch")


def default_hiit_regimen(catalog: cat.Catalog) -> Regimen:
    """The stock interval-training circuit: 5 min warm-up game, four stations
    of four 60 s strength exercises with 30 s rests, then four 60 s stretches."""
    wanted = [ex for station in _HIIT_STATIONS for ex in station] + list(_HIIT_STRETCHES)
    for ex_id in dict.fromkeys(wanted):
        if ex_id not in catalog:
            raise MissingExercise(ex_id)
    entries = [RegimenEntry(ex_id, 60.0) for ex_id in wanted]
    return create_regimen(
        catalog,
        name="Default HIIT",
        setting=cat.Setting.INST,
        entries=entries,
        short_break_s=30.0,
        long_break_s=30.0,
        station_size=4,
        include_warmup_game=True,
        regimen_id="default_hiit",
    )


def compile_timeline(
    regimen: Regimen,
    catalog: cat.Catalog,
    demo_duration_s: float = DEFAULT_DEMO_DURATION_S,
    warmup_duration_s: float = DEFAULT_WARMUP_DURATION_S,
    floor_profile: cat.FloorProfile | None = None,
) -> SessionTimeline:
    """Compile a regimen into the contiguous phase sequence of one session.

    Every entry becomes Demonstration followed by Performance.  Breaks go
    between entries only (never trailing), upgraded to a long break after
    each complete station.  Breaks configured to zero seconds are omitted.
    """
    violations = validate(regimen, catalog, floor_profile)
    if violations:
        raise InvalidRegimen(
            "; ".join(v.message for v in violations), violations=violations
        )
    if demo_duration_s <= 0:
        raise InvalidRegimen(f"demo_duration_s must be > 0, got {demo_duration_s:g}")
    if warmup_duration_s <= 0:
        raise InvalidRegimen(f"warmup_duration_s must be > 0, got {warmup_duration_s:g}")

    phases: list[Phase] = []
    t = 0.0

    def push(kind: PhaseKind, duration: float, exercise_id: str | None = None) -> None:
        nonlocal t
        phases.append(Phase(kind=kind, duration_s=duration, start_s=t, exercise_id=exercise_id))
        t += duration

    if regimen.include_warmup_game:
        push(PhaseKind.WARMUP_GAME, warmup_duration_s)

    n = len(regimen.entries)
    for i, entry in enumerate(regimen.entries):
        push(PhaseKind.DEMONSTRATION, demo_duration_s, entry.exercise_id)
        push(PhaseKind.PERFORMANCE, entry.duration_s, entry.exercise_id)
        if i < n - 1:
            station_boundary = (i + 1) % regimen.station_size == 0
            duration = regimen.long_break_s if station_boundary else regimen.short_break_s
            if duration > 0:
                push(
                    PhaseKind.LONG_BREAK if station_boundary else PhaseKind.SHORT_BREAK,
                    duration,
                )

    return SessionTimeline(regimen_id=regimen.id, phases=tuple(phases), total_duration_s=t)


# -- document round-trip -------------------------------------------------------

def _load_regimen_schema() -> dict:
    with resources.files("robocoach.data").joinpath("regimen.schema.json").open("rb") as fh:
        return json.load(fh)


def regimen_from_doc(doc: dict) -> Regimen:
    try:
        jsonschema.validate(doc, _load_regimen_schema())
    except jsonschema.ValidationError as exc:
        raise ParseError(f"regimen document invalid: {exc.message}") from None
    if doc["schema_version"] != REGIMEN_SCHEMA_VERSION:
        raise ParseError(
            f"unsupported regimen schema_version {doc['schema_version']} "
            f"(expected {REGIMEN_SCHEMA_VERSION})"
        )
    return Regimen(
        id=doc["id"],
        name=doc["name"],
        setting=cat.parse_setting(doc["setting"]),
        entries=tuple(
            RegimenEntry(e["exercise_id"], float(e["duration_s"])) for e in doc["entries"]
        ),
        short_break_s=float(doc["short_break_s"]),
        long_break_s=float(doc["long_break_s"]),
        station_size=int(doc["station_size"]),
        include_warmup_game=bool(doc["include_warmup_game"]),
        created_at=doc.get("created_at", ""),
        updated_at=doc.get("updated_at", ""),
    )


def load_regimen_file(path: str | Path) -> Regimen:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read regimen file: {exc}") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"regimen file is not valid JSON: {exc}") from None
    return regimen_from_doc(doc)


# -- persistence ---------------------------------------------------------------

@dataclass(frozen=True)
class RegimenSummary:
    id: str
    name: str
    setting: cat.Setting
    entry_count: int
    updated_at: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "setting": self.setting.value,
            "entry_count": self.entry_count,
            "updated_at": self.updated_at,
        }


class RegimenStore:
    """Directory-backed regimen persistence, one JSON document per regimen."""

    def __init__(self, directory: str | Path):
        self._dir = Path(directory)
        try:
            self._dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create regimen store at {self._dir}: {exc}") from None

    def _path(self, regimen_id: str) -> Path:
        # Regimen ids are caller-supplied; keep them from escaping the store dir.
        if not regimen_id or "/" in regimen_id or "\\" in regimen_id or regimen_id.startswith("."):
            raise NotFound(f"no regimen with id {regimen_id!r}")
        return self._dir / f"{regimen_id}.json"

    def save(self, regimen: Regimen) -> str:
        path = self._path(regimen.id)
        tmp = path.with_suffix(".json.tmp")
        try:
            tmp.write_text(
                json.dumps(regimen.to_doc(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageError(f"cannot write regimen {regimen.id!r}: {exc}") from None
        return regimen.id

    def load(self, regimen_id: str) -> Regimen:
        path = self._path(regimen_id)
        if not path.exists():
            raise NotFound(f"no regimen with id {regimen_id!r}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise StorageError(f"cannot read regimen {regimen_id!r}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"stored regimen {regimen_id!r} is corrupt: {exc}") from None
        return regimen_from_doc(doc)

    def list(self) -> list[RegimenSummary]:
        """Summaries of all stored regimens, most recently updated first."""
        summaries = []
        for path in self._dir.glob("*.json"):
            try:
                r = regimen_from_doc(json.loads(path.read_text(encoding="utf-8")))
            except (ParseError, json.JSONDecodeError):
                continue
            summaries.append(
                RegimenSummary(
                    id=r.id,
                    name=r.name,
                    setting=r.setting,
                    entry_count=len(r.entries),
                    updated_at=r.updated_at,
                )
            )
        summaries.sort(key=lambda s: (s.updated_at, s.id), reverse=True)
        return summaries

    def delete(self, regimen_id: str) -> None:
        path = self._path(regimen_id)
        if not path.exists():
            raise NotFound(f"no regimen with id {regimen_id!r}")
        try:
            path.unlink()
        except OSError as exc:
            raise StorageError(f"cannot delete regimen {regimen_id!r}: {exc}") from None


def touch_updated(regimen: Regimen) -> Regimen:
    """Copy with a fresh updated_at stamp; used on edits, not on plain saves."""
    return replace(regimen, updated_at=_now_iso())


def replace_timestamps(regimen: Regimen, created_at: str, updated_at: str) -> Regimen:
    """Copy with both stamps set; lets an editor keep created_at across a PUT."""
    return replace(regimen, created_at=created_at, updated_at=updated_at)
