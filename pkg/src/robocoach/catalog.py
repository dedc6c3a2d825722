"""Exercise catalog: what the robot can coach, per deployment setting.

A catalog is an immutable snapshot loaded from a JSON document.  Each record
carries the feasibility status it earned in the review process; only ``Final``
exercises may appear in regimens.  Feasibility progress itself is modelled by
``feasibility_advance``, which returns a new catalog rather than mutating the
loaded one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Mapping

import jsonschema

from .errors import (
    DuplicateId,
    IllegalCategory,
    IllegalTransition,
    MissingReason,
    ParseError,
    UnknownExercise,
    UnknownSetting,
)

CATALOG_SCHEMA_VERSION = 1


class Setting(str, Enum):
    """Deployment setting a catalog entry belongs to."""

    INST = "InST"
    INPT = "InPT"
    OUTPT = "OutPT"


class ExerciseCategory(str, Enum):
    # InST
    STRENGTH = "Strength"
    STRETCHING = "Stretching"
    COORDINATION = "Coordination"
    # InPT
    ARM = "Arm"
    LEG = "Leg"
    FOOT = "Foot"
    BREATHING = "Breathing"
    # OutPT (Stretching is shared with InST)
    MOBILIZATION = "Mobilization"
    STRENGTHENING = "Strengthening"
    FOUR_FOOTED = "FourFooted"


CATEGORIES_BY_SETTING: Mapping[Setting, frozenset[ExerciseCategory]] = {
    Setting.INST: frozenset(
        {ExerciseCategory.STRENGTH, ExerciseCategory.STRETCHING, ExerciseCategory.COORDINATION}
    ),
    Setting.INPT: frozenset(
        {ExerciseCategory.ARM, ExerciseCategory.LEG, ExerciseCategory.FOOT, ExerciseCategory.BREATHING}
    ),
    Setting.OUTPT: frozenset(
        {
            ExerciseCategory.MOBILIZATION,
            ExerciseCategory.STRENGTHENING,
            ExerciseCategory.FOUR_FOOTED,
            ExerciseCategory.STRETCHING,
        }
    ),
}


class Position(str, Enum):
    STANDING = "Standing"
    LYING = "Lying"
    FLOOR = "Floor"
    FOUR_FOOTED = "FourFooted"


class FeasibilityStatus(str, Enum):
    SELECTED = "Selected"
    PASSED_FIRST_RUN = "PassedFirstRun"
    FAILED_FIRST_RUN = "FailedFirstRun"
    FINAL = "Final"
    EXCLUDED_FINAL = "ExcludedFinal"


# Verdict -> next status, per current status.  Anything absent is terminal.
_FEASIBILITY_TRANSITIONS: Mapping[FeasibilityStatus, Mapping[str, FeasibilityStatus]] = {
    FeasibilityStatus.SELECTED: {
        "pass": FeasibilityStatus.PASSED_FIRST_RUN,
        "fail": FeasibilityStatus.FAILED_FIRST_RUN,
    },
    FeasibilityStatus.PASSED_FIRST_RUN: {
        "pass": FeasibilityStatus.FINAL,
        "fail": FeasibilityStatus.EXCLUDED_FINAL,
    },
}

_FAILED_STATUSES = frozenset({FeasibilityStatus.FAILED_FIRST_RUN, FeasibilityStatus.EXCLUDED_FINAL})


class FloorProfile(str, Enum):
    EVEN = "Even"
    UNEVEN = "Uneven"


def parse_setting(token: str) -> Setting:
    try:
        return Setting(token)
    except ValueError:
        raise UnknownSetting(f"unknown setting {token!r}; expected one of InST, InPT, OutPT") from None


@dataclass(frozen=True)
class ExerciseSpec:
    id: str
    display_name: str
    setting: Setting
    category: ExerciseCategory
    position: Position
    default_duration_s: float
    demo_text: str
    balance_sensitive: bool
    status: FeasibilityStatus
    compensatory_cue: str | None = None
    exclusion_reason: str | None = None
    pose_model_id: str | None = None
    variants: tuple[str, ...] = ()

    @property
    def requires_standup_correction(self) -> bool:
        # Floor work means the robot has to get back on its feet afterwards,
        # which is where heading drift creeps in.
        return self.position is Position.FLOOR

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "display_name": self.display_name,
            "setting": self.setting.value,
            "category": self.category.value,
            "position": self.position.value,
            "default_duration_s": self.default_duration_s,
            "demo_text": self.demo_text,
            "balance_sensitive": self.balance_sensitive,
            "status": self.status.value,
        }
        if self.compensatory_cue is not None:
            d["compensatory_cue"] = self.compensatory_cue
        if self.exclusion_reason is not None:
            d["exclusion_reason"] = self.exclusion_reason
        if self.pose_model_id is not None:
            d["pose_model_id"] = self.pose_model_id
        if self.variants:
            d["variants"] = list(self.variants)
        return d


@dataclass(frozen=True)
class CategoryCounts:
    by_category: Mapping[ExerciseCategory, int]
    total: int


@dataclass(frozen=True)
class Catalog:
    schema_version: int
    floor_profiles: Mapping[Setting, FloorProfile]
    exercises: tuple[ExerciseSpec, ...]
    notes: str = ""

    @cached_property
    def _by_id(self) -> Mapping[str, ExerciseSpec]:
        return {e.id: e for e in self.exercises}

    def get(self, exercise_id: str) -> ExerciseSpec:
        try:
            return self._by_id[exercise_id]
        except KeyError:
            raise UnknownExercise(f"unknown exercise {exercise_id!r}") from None

    def __contains__(self, exercise_id: str) -> bool:
        return exercise_id in self._by_id


def _spec_from_doc(doc: dict) -> ExerciseSpec:
    setting = Setting(doc["setting"])
    category = ExerciseCategory(doc["category"])
    return ExerciseSpec(
        id=doc["id"],
        display_name=doc["display_name"],
        setting=setting,
        category=category,
        position=Position(doc["position"]),
        default_duration_s=float(doc["default_duration_s"]),
        demo_text=doc["demo_text"],
        balance_sensitive=bool(doc["balance_sensitive"]),
        status=FeasibilityStatus(doc["status"]),
        compensatory_cue=doc.get("compensatory_cue"),
        exclusion_reason=doc.get("exclusion_reason"),
        pose_model_id=doc.get("pose_model_id"),
        variants=tuple(doc.get("variants", ())),
    )


def _load_schema() -> dict:
    with resources.files("robocoach.data").joinpath("catalog.schema.json").open("rb") as fh:
        return json.load(fh)


def catalog_from_doc(doc: dict) -> Catalog:
    """Build a Catalog from an already-parsed JSON document.

    Enforces everything the file format cannot express on its own: id
    uniqueness, category legality per setting, exclusion reasons on failed
    records, and the rule that a catalog validated for an uneven floor must
    not clear balance-sensitive exercises.
    """
    try:
        jsonschema.validate(doc, _load_schema())
    except jsonschema.ValidationError as exc:
        raise ParseError(f"catalog document invalid: {exc.message}") from None

    if doc["schema_version"] != CATALOG_SCHEMA_VERSION:
        raise ParseError(
            f"unsupported catalog schema_version {doc['schema_version']} "
            f"(expected {CATALOG_SCHEMA_VERSION})"
        )

    floor_profiles = {
        parse_setting(k): FloorProfile(v) for k, v in doc.get("floor_profiles", {}).items()
    }
    for s in Setting:
        floor_profiles.setdefault(s, FloorProfile.EVEN)

    exercises = []
    seen: set[str] = set()
    for ex_doc in doc["exercises"]:
        spec = _spec_from_doc(ex_doc)
        if spec.id in seen:
            raise DuplicateId(f"duplicate exercise id {spec.id!r}")
        seen.add(spec.id)
        if spec.category not in CATEGORIES_BY_SETTING[spec.setting]:
            raise IllegalCategory(
                f"category {spec.category.value!r} is not defined for setting {spec.setting.value!r}"
            )
        if spec.status in _FAILED_STATUSES and not (spec.exclusion_reason or "").strip():
            raise MissingReason(f"excluded exercise {spec.id!r} has no exclusion_reason")
        if spec.default_duration_s <= 0:
            raise ParseError(f"exercise {spec.id!r} has nonpositive default_duration_s")
        if (
            spec.balance_sensitive
            and spec.status is FeasibilityStatus.FINAL
            and floor_profiles[spec.setting] is FloorProfile.UNEVEN
        ):
            raise ParseError(
                f"exercise {spec.id!r} is balance sensitive and cannot be Final "
                f"in a catalog cleared for an uneven {spec.setting.value} floor"
            )
        exercises.append(spec)

    return Catalog(
        schema_version=doc["schema_version"],
        floor_profiles=floor_profiles,
        exercises=tuple(exercises),
        notes=doc.get("notes", ""),
    )


def load_catalog(path: str | Path | None = None) -> Catalog:
    """Load a catalog file; with no path, load the bundled default."""
    if path is None:
        with resources.files("robocoach.data").joinpath("catalog.json").open("rb") as fh:
            doc = json.load(fh)
        return catalog_from_doc(doc)
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read catalog file: {exc}") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"catalog file is not valid JSON: {exc}") from None
    return catalog_from_doc(doc)


def list_exercises(
    catalog: Catalog,
    setting: Setting,
    category: ExerciseCategory | None = None,
    status: FeasibilityStatus | None = None,
) -> list[ExerciseSpec]:
    """Exercises for a setting in stable id order, optionally filtered."""
    out = [
        e
        for e in catalog.exercises
        if e.setting is setting
        and (category is None or e.category is category)
        and (status is None or e.status is status)
    ]
    out.sort(key=lambda e: e.id)
    return out


def counts(catalog: Catalog, setting: Setting) -> CategoryCounts:
    """Per-category counts of Final exercises for one setting."""
    by_category: dict[ExerciseCategory, int] = {}
    for e in catalog.exercises:
        if e.setting is setting and e.status is FeasibilityStatus.FINAL:
            by_category[e.category] = by_category.get(e.category, 0) + 1
    return CategoryCounts(by_category=by_category, total=sum(by_category.values()))


def is_allowed(catalog: Catalog, exercise_id: str, setting: Setting) -> bool:
    """True iff the exercise is Final for the given setting."""
    spec = catalog.get(exercise_id)
    return spec.setting is setting and spec.status is FeasibilityStatus.FINAL


def exclusion_reason_for(spec: ExerciseSpec) -> str:
    """Human-readable reason an exercise cannot be scheduled."""
    if spec.exclusion_reason:
        return spec.exclusion_reason
    if spec.status is not FeasibilityStatus.FINAL:
        return f"status {spec.status.value}, not cleared for sessions"
    return "allowed"


def feasibility_advance(
    catalog: Catalog, exercise_id: str, verdict: str, reason: str | None = None
) -> Catalog:
    """Advance one exercise through the review state machine.

    Returns a new catalog; the input is untouched.  ``verdict`` is "pass" or
    "fail"; fail verdicts must carry a non-empty reason.
    """
    if verdict not in ("pass", "fail"):
        raise IllegalTransition(f"verdict must be 'pass' or 'fail', got {verdict!r}")
    spec = catalog.get(exercise_id)
    targets = _FEASIBILITY_TRANSITIONS.get(spec.status)
    if not targets:
        raise IllegalTransition(
            f"{exercise_id!r} has terminal status {spec.status.value}; no further review possible"
        )
    new_status = targets[verdict]
    if verdict == "fail":
        if not (reason or "").strip():
            raise MissingReason(f"fail verdict for {exercise_id!r} requires a reason")
        new_spec = replace(spec, status=new_status, exclusion_reason=reason)
    else:
        new_spec = replace(spec, status=new_status)
    exercises = tuple(new_spec if e.id == exercise_id else e for e in catalog.exercises)
    return replace(catalog, exercises=exercises)


def final_exercises(catalog: Catalog, setting: Setting) -> list[ExerciseSpec]:
    return list_exercises(catalog, setting, status=FeasibilityStatus.FINAL)
