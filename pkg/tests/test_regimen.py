import json
import random

import pytest

from robocoach import catalog as cat
from robocoach import regimen as reg
from robocoach.errors import (
    EmptyRegimen,
    ExcludedExercise,
    NegativeDuration,
    NotFound,
    ParseError,
)


def hiit(catalog):
    return reg.default_hiit_regimen(catalog)


# -- compilation golden values ---------------------------------------------------


def test_two_entry_timeline_golden(catalog):
    r = reg.create_regimen(
        catalog, "mini", cat.Setting.INST, [("boxing", 60.0), ("squat", 60.0)]
    )
    tl = reg.compile_timeline(r, catalog)
    kinds = [(p.kind.value, p.duration_s) for p in tl.phases]
    assert kinds == [
        ("Demonstration", 20.0),
        ("Performance", 60.0),
        ("ShortBreak", 30.0),
        ("Demonstration", 20.0),
        ("Performance", 60.0),
    ]
    assert tl.total_duration_s == 190.0


def test_default_hiit_totals(catalog):
    tl = reg.compile_timeline(hiit(catalog), catalog)
    assert len(tl.phases) == 60
    assert tl.total_duration_s == 2470.0


def test_timeline_contiguity(catalog):
    tl = reg.compile_timeline(hiit(catalog), catalog)
    t = 0.0
    for phase in tl.phases:
        assert phase.start_s == pytest.approx(t)
        t += phase.duration_s
    assert t == pytest.approx(tl.total_duration_s)


def test_break_placement_oracle(catalog):
    """Breaks sit between exercise blocks; long ones close each full station."""
    rng = random.Random(42)
    finals = [e.id for e in cat.final_exercises(catalog, cat.Setting.INST)]
    for _ in range(50):
        n = rng.randint(1, 12)
        station = rng.randint(1, 5)
        ids = [rng.choice(finals) for _ in range(n)]
        r = reg.create_regimen(
            catalog,
            "fuzz",
            cat.Setting.INST,
            [(i, float(rng.randint(10, 90))) for i in ids],
            short_break_s=15.0,
            long_break_s=45.0,
            station_size=station,
        )
        tl = reg.compile_timeline(r, catalog)
        breaks = [p for p in tl.phases if p.kind in reg.BREAK_KINDS]
        assert len(breaks) == n - 1
        expected_long = sum(1 for k in range(1, n) if k % station == 0)
        assert sum(1 for p in breaks if p.kind is reg.PhaseKind.LONG_BREAK) == expected_long
        # demo always directly precedes its performance
        for i, p in enumerate(tl.phases):
            if p.kind is reg.PhaseKind.DEMONSTRATION:
                nxt = tl.phases[i + 1]
                assert nxt.kind is reg.PhaseKind.PERFORMANCE
                assert nxt.exercise_id == p.exercise_id


def test_warmup_game_leads_when_included(catalog):
    tl = reg.compile_timeline(hiit(catalog), catalog)
    assert tl.phases[0].kind is reg.PhaseKind.WARMUP_GAME
    assert tl.phases[0].duration_s == 300.0


# -- validation -------------------------------------------------------------------


def test_create_rejects_empty(catalog):
    with pytest.raises(EmptyRegimen):
        reg.create_regimen(catalog, "none", cat.Setting.INST, [])


def test_create_rejects_nonpositive_duration(catalog):
    with pytest.raises(NegativeDuration):
        reg.create_regimen(catalog, "zero", cat.Setting.INST, [("boxing", 0.0)])


def test_create_rejects_wrong_setting(catalog):
    inpt_only = cat.final_exercises(catalog, cat.Setting.INPT)[0].id
    with pytest.raises(ExcludedExercise):
        reg.create_regimen(catalog, "misfiled", cat.Setting.INST, [(inpt_only, 30.0)])


def test_validate_reports_everything_at_once(catalog):
    r = reg.Regimen(
        id="x",
        name="broken",
        setting=cat.Setting.INST,
        entries=(
            reg.RegimenEntry("boxing", -5.0),
            reg.RegimenEntry("ghost_exercise", 30.0),
        ),
        short_break_s=40.0,
        long_break_s=10.0,
        station_size=0,
        include_warmup_game=False,
        created_at="",
        updated_at="",
    )
    kinds = {v.kind for v in reg.validate(r, catalog)}
    assert {"NonPositiveDuration", "UnknownExercise", "BreakOrderViolation", "StationSize"} <= kinds


def test_balance_risk_only_on_uneven_floor(catalog):
    sensitive = [e for e in cat.final_exercises(catalog, cat.Setting.INST) if e.balance_sensitive]
    assert sensitive, "catalog marks some standing exercises balance sensitive"
    r = reg.create_regimen(catalog, "balance", cat.Setting.INST, [(sensitive[0].id, 30.0)])
    assert reg.validate(r, catalog, floor_profile=cat.FloorProfile.EVEN) == []
    uneven = reg.validate(r, catalog, floor_profile=cat.FloorProfile.UNEVEN)
    assert [v.kind for v in uneven] == ["BalanceRisk"]


def test_excluded_exercise_violation_names_the_reason(catalog):
    excluded = [
        e
        for e in catalog.exercises
        if e.status
        in (cat.FeasibilityStatus.FAILED_FIRST_RUN, cat.FeasibilityStatus.EXCLUDED_FINAL)
    ][0]
    r = reg.Regimen(
        id="x",
        name="bad",
        setting=excluded.setting,
        entries=(reg.RegimenEntry(excluded.id, 30.0),),
        short_break_s=30.0,
        long_break_s=30.0,
        station_size=4,
        include_warmup_game=False,
        created_at="",
        updated_at="",
    )
    violations = reg.validate(r, catalog)
    assert [v.kind for v in violations] == ["ExcludedExercise"]
    assert "excluded" in violations[0].message.lower()


# -- documents and storage ----------------------------------------------------------


def test_doc_round_trip(catalog):
    r = hiit(catalog)
    doc = json.loads(json.dumps(r.to_doc()))
    back = reg.regimen_from_doc(doc)
    assert back == r


def test_doc_rejects_bad_schema_version(catalog):
    doc = hiit(catalog).to_doc()
    doc["schema_version"] = 99
    with pytest.raises(ParseError):
        reg.regimen_from_doc(doc)


def test_store_round_trip(catalog, tmp_path):
    store = reg.RegimenStore(tmp_path)
    r = hiit(catalog)
    store.save(r)
    assert store.load(r.id) == r
    summaries = store.list()
    assert [s.id for s in summaries] == [r.id]
    store.delete(r.id)
    with pytest.raises(NotFound):
        store.load(r.id)


def test_store_rejects_path_traversal(catalog, tmp_path):
    store = reg.RegimenStore(tmp_path)
    # A hostile id must not resolve to a file outside the store directory;
    # the store treats it like any other id that does not exist.
    with pytest.raises(NotFound):
        store.load("../../etc/passwd")


def test_store_list_skips_corrupt_files(catalog, tmp_path):
    store = reg.RegimenStore(tmp_path)
    store.save(hiit(catalog))
    (tmp_path / "junk.json").write_text("{nope", encoding="utf-8")
    assert len(store.list()) == 1


def test_touch_updated_changes_only_timestamp(catalog):
    r = hiit(catalog)
    touched = reg.touch_updated(r)
    assert touched.id == r.id and touched.entries == r.entries
    assert touched.created_at == r.created_at


def test_default_hiit_composition(catalog):
    r = hiit(catalog)
    assert r.id == "default_hiit"
    assert len(r.entries) == 20
    cats = [catalog.get(e.exercise_id).category for e in r.entries]
    assert cats[:16] == [cat.ExerciseCategory.STRENGTH] * 16
    assert cats[16:] == [cat.ExerciseCategory.STRETCHING] * 4
    assert all(e.duration_s == 60.0 for e in r.entries)
    assert r.include_warmup_game
