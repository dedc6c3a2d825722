import json
import subprocess
import sys

import pytest

from robocoach import catalog as cat
from robocoach import pose
from robocoach import regimen as reg


def cli(*args, env=None, timeout=120):
    import os

    merged = dict(os.environ)
    if env:
        merged.update(env)
    return subprocess.run(
        [sys.executable, "-m", "robocoach", *args],
        capture_output=True,
        text=True,
        timeout=timeout,
        env=merged,
    )


@pytest.fixture(scope="module")
def regimen_files(tmp_path_factory):
    base = tmp_path_factory.mktemp("regimens")
    catalog = cat.load_catalog()
    hiit = base / "hiit.json"
    hiit.write_text(json.dumps(reg.default_hiit_regimen(catalog).to_doc()), encoding="utf-8")
    squat = base / "squat.json"
    squat.write_text(
        json.dumps(
            reg.create_regimen(
                catalog, "squat only", cat.Setting.INST, [("squat", 60.0)]
            ).to_doc()
        ),
        encoding="utf-8",
    )
    bad = base / "bad.json"
    bad.write_text("{this is not json", encoding="utf-8")
    excluded = base / "excluded.json"
    doc = reg.default_hiit_regimen(catalog).to_doc()
    doc["entries"] = [{"exercise_id": "toe_curling", "duration_s": 30.0}]
    doc["setting"] = "InPT"
    excluded.write_text(json.dumps(doc), encoding="utf-8")
    return base


# -- catalog -----------------------------------------------------------------------


def test_catalog_counts_inst():
    proc = cli("catalog", "--setting", "InST", "--counts")
    assert proc.returncode == 0
    assert "total=18" in proc.stdout


def test_catalog_counts_inpt():
    proc = cli("catalog", "--setting", "InPT", "--counts")
    assert proc.returncode == 0
    assert "total=13" in proc.stdout


def test_catalog_listing_is_stable():
    a = cli("catalog", "--setting", "InST")
    b = cli("catalog", "--setting", "InST")
    assert a.returncode == 0
    assert a.stdout == b.stdout
    assert len(a.stdout.strip().splitlines()) == 18


def test_catalog_bad_setting_exit_2():
    proc = cli("catalog", "--setting", "Foo")
    assert proc.returncode == 2
    assert "unknown setting" in proc.stderr.lower()


# -- validate -----------------------------------------------------------------------


def test_validate_ok(regimen_files):
    proc = cli("validate", str(regimen_files / "hiit.json"))
    assert proc.returncode == 0
    assert proc.stdout.strip() == "OK"


def test_validate_excluded_exercise(regimen_files):
    proc = cli("validate", str(regimen_files / "excluded.json"))
    assert proc.returncode == 2
    lines = proc.stdout.strip().splitlines()
    assert len(lines) == 1
    assert "excluded" in lines[0].lower()
    assert "toe_curling" in lines[0]


def test_validate_garbage_exit_3(regimen_files):
    proc = cli("validate", str(regimen_files / "bad.json"))
    assert proc.returncode == 3


def test_validate_dump_timeline(regimen_files):
    proc = cli("validate", str(regimen_files / "hiit.json"), "--dump-timeline")
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert len(doc["phases"]) == 60
    assert doc["total_duration_s"] == 2470.0


# -- run ----------------------------------------------------------------------------


def test_run_writes_report(regimen_files, tmp_path):
    report_path = tmp_path / "report.json"
    proc = cli(
        "run",
        str(regimen_files / "squat.json"),
        "--speed",
        "100000",
        "--seed",
        "5",
        "--report",
        str(report_path),
        env={"SESSION_LOG_DIR": str(tmp_path)},
    )
    assert proc.returncode == 0, proc.stderr
    report = json.loads(report_path.read_text(encoding="utf-8"))
    assert report["phases_completed"] == 2
    assert report["total_active_s"] == pytest.approx(80.0)
    # stdout carries the same document
    assert json.loads(proc.stdout) == report


def test_run_pose_trace_counts_reps(regimen_files, tmp_path):
    trace = tmp_path / "squat10.jsonl"
    pose.write_trace(trace, pose.synthesize_squat_trace(10))
    proc = cli(
        "run",
        str(regimen_files / "squat.json"),
        "--speed",
        "100000",
        "--pose-trace",
        str(trace),
        env={"SESSION_LOG_DIR": str(tmp_path)},
    )
    assert proc.returncode == 0, proc.stderr
    report = json.loads(proc.stdout)
    assert report["reps_by_exercise"] == {"squat": 10}


def test_run_bad_trace_exit_3(regimen_files, tmp_path):
    trace = tmp_path / "bad_trace.jsonl"
    trace.write_text("definitely not json\n", encoding="utf-8")
    proc = cli(
        "run",
        str(regimen_files / "squat.json"),
        "--speed",
        "100000",
        "--pose-trace",
        str(trace),
        env={"SESSION_LOG_DIR": str(tmp_path)},
    )
    assert proc.returncode == 3


def test_run_bad_vitals_trace_exit_3(regimen_files, tmp_path):
    trace = tmp_path / "vitals.jsonl"
    trace.write_text('{"t": 1.0}\n', encoding="utf-8")
    proc = cli(
        "run",
        str(regimen_files / "squat.json"),
        "--speed",
        "100000",
        "--vitals-trace",
        str(trace),
        env={"SESSION_LOG_DIR": str(tmp_path)},
    )
    assert proc.returncode == 3


def test_run_vitals_trace_lands_in_report(regimen_files, tmp_path):
    trace = tmp_path / "vitals.jsonl"
    lines = [
        {"t": 25.0, "bpm": 150},
        {"t": 30.0, "bpm": 170},
        {"t": 35.0, "bpm": 150},
        {"t": 40.0, "bpm": 171},
    ]
    trace.write_text("".join(json.dumps(l) + "\n" for l in lines), encoding="utf-8")
    # thresholds come from the profile; the runner has none, so no alerts
    proc = cli(
        "run",
        str(regimen_files / "squat.json"),
        "--speed",
        "100000",
        "--vitals-trace",
        str(trace),
        env={"SESSION_LOG_DIR": str(tmp_path)},
    )
    assert proc.returncode == 0
    report = json.loads(proc.stdout)
    assert report["alerts"]["too_hard"] == 0


def test_run_rejects_invalid_regimen(regimen_files, tmp_path):
    proc = cli(
        "run",
        str(regimen_files / "excluded.json"),
        "--speed",
        "100000",
        env={"SESSION_LOG_DIR": str(tmp_path)},
    )
    assert proc.returncode == 2


def test_run_determinism(regimen_files, tmp_path):
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        proc = cli(
            "run",
            str(regimen_files / "squat.json"),
            "--speed",
            "100000",
            "--seed",
            "9",
            env={"SESSION_LOG_DIR": str(d)},
        )
        assert proc.returncode == 0
    logs = [next(d.glob("*.jsonl")).read_bytes() for d in dirs]
    assert logs[0] == logs[1]
