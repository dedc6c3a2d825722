import json
from pathlib import Path

import pytest

from robocoach import catalog as cat
from robocoach.errors import (
    DuplicateId,
    IllegalTransition,
    MissingReason,
    UnknownExercise,
    UnknownSetting,
)

FAILED_STATUSES = (cat.FeasibilityStatus.FAILED_FIRST_RUN, cat.FeasibilityStatus.EXCLUDED_FINAL)

DATA = Path(cat.__file__).parent / "data" / "catalog.json"


def test_record_count(catalog):
    assert len(catalog.exercises) == 79


def test_inst_counts(catalog):
    counted = cat.counts(catalog, cat.Setting.INST)
    assert counted.by_category[cat.ExerciseCategory.STRENGTH] == 14
    assert counted.by_category[cat.ExerciseCategory.STRETCHING] == 4
    assert counted.total == 18


def test_inpt_counts(catalog):
    counted = cat.counts(catalog, cat.Setting.INPT)
    assert counted.total == 13
    split = sorted(counted.by_category.values(), reverse=True)
    assert split == [6, 3, 3, 1]


def test_inst_has_no_final_coordination(catalog):
    finals = cat.list_exercises(
        catalog, cat.Setting.INST, category=cat.ExerciseCategory.COORDINATION
    )
    assert [e for e in finals if e.status is cat.FeasibilityStatus.FINAL] == []


def test_parse_setting_tokens():
    assert cat.parse_setting("InST") is cat.Setting.INST
    assert cat.parse_setting("InPT") is cat.Setting.INPT
    assert cat.parse_setting("OutPT") is cat.Setting.OUTPT
    with pytest.raises(UnknownSetting):
        cat.parse_setting("Clinic")


def test_list_exercises_sorted_and_filtered(catalog):
    specs = cat.list_exercises(catalog, cat.Setting.INST, status=cat.FeasibilityStatus.FINAL)
    assert [s.id for s in specs] == sorted(s.id for s in specs)
    assert all(s.setting is cat.Setting.INST for s in specs)
    assert all(s.status is cat.FeasibilityStatus.FINAL for s in specs)


def test_get_unknown_exercise(catalog):
    with pytest.raises(UnknownExercise):
        catalog.get("pogo_jumps")


def test_floor_position_requires_standup_correction(catalog):
    # Lying on the floor means the robot must stand up and re-orient after.
    for spec in catalog.exercises:
        if spec.position is cat.Position.FLOOR:
            assert spec.requires_standup_correction, spec.id


def test_data_file_matches_schema(catalog):
    import jsonschema

    doc = json.loads(DATA.read_text(encoding="utf-8"))
    schema = json.loads((DATA.parent / "catalog.schema.json").read_text(encoding="utf-8"))
    jsonschema.validate(doc, schema)


def test_catalog_rejects_duplicate_ids(catalog):
    doc = json.loads(DATA.read_text(encoding="utf-8"))
    doc["exercises"].append(dict(doc["exercises"][0]))
    with pytest.raises(DuplicateId):
        cat.catalog_from_doc(doc)


def test_excluded_records_carry_reasons(catalog):
    excluded = [e for e in catalog.exercises if e.status in FAILED_STATUSES]
    assert excluded, "the bundled catalog documents its exclusions"
    for spec in excluded:
        assert spec.exclusion_reason, spec.id


def _with_selected_record(catalog):
    """The bundled catalog is post-review, so fabricate one fresh candidate."""
    doc = json.loads(DATA.read_text(encoding="utf-8"))
    record = dict(doc["exercises"][0])
    record["id"] = "new_candidate"
    record["status"] = "Selected"
    record.pop("exclusion_reason", None)
    doc["exercises"].append(record)
    return cat.catalog_from_doc(doc)


def test_feasibility_two_pass_review(catalog):
    c0 = _with_selected_record(catalog)
    ex = "new_candidate"
    c1 = cat.feasibility_advance(c0, ex, "pass")
    assert c1.get(ex).status is cat.FeasibilityStatus.PASSED_FIRST_RUN
    c2 = cat.feasibility_advance(c1, ex, "pass")
    assert c2.get(ex).status is cat.FeasibilityStatus.FINAL
    # Final is terminal
    with pytest.raises(IllegalTransition):
        cat.feasibility_advance(c2, ex, "pass")
    # the input catalog is untouched
    assert c0.get(ex).status is cat.FeasibilityStatus.SELECTED


def test_feasibility_fail_requires_reason(catalog):
    c0 = _with_selected_record(catalog)
    ex = "new_candidate"
    with pytest.raises(MissingReason):
        cat.feasibility_advance(c0, ex, "fail")
    failed = cat.feasibility_advance(c0, ex, "fail", reason="robot fell over")
    assert failed.get(ex).status is cat.FeasibilityStatus.FAILED_FIRST_RUN
    assert failed.get(ex).exclusion_reason == "robot fell over"
    # second-run failure lands in the terminal excluded state
    second = cat.feasibility_advance(
        cat.feasibility_advance(c0, ex, "pass"), ex, "fail", reason="unsafe on retest"
    )
    assert second.get(ex).status is cat.FeasibilityStatus.EXCLUDED_FINAL


def test_only_final_is_allowed(catalog):
    for spec in catalog.exercises:
        allowed = cat.is_allowed(catalog, spec.id, spec.setting)
        assert allowed == (spec.status is cat.FeasibilityStatus.FINAL), spec.id
