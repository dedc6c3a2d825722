"""Robot-assisted exercise coaching: catalog, regimens, session engine, API."""

from .catalog import (
    Catalog,
    CategoryCounts,
    ExerciseCategory,
    ExerciseSpec,
    FeasibilityStatus,
    FloorProfile,
    Position,
    Setting,
    load_catalog,
)
from .engine import (
    EngineConfig,
    PatientProfile,
    SessionEngine,
    SessionState,
    UtterancePolicy,
)
from .events import EventKind, SessionEvent, SessionSnapshot, build_report, replay
from .gateway import RobotCommand, SimConfig, SimulatedRobot, TelemetryBus
from .regimen import (
    Regimen,
    RegimenEntry,
    SessionTimeline,
    compile_timeline,
    create_regimen,
    default_hiit_regimen,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "CategoryCounts",
    "EngineConfig",
    "EventKind",
    "ExerciseCategory",
    "ExerciseSpec",
    "FeasibilityStatus",
    "FloorProfile",
    "PatientProfile",
    "Position",
    "Regimen",
    "RegimenEntry",
    "RobotCommand",
    "SessionEngine",
    "SessionEvent",
    "SessionSnapshot",
    "SessionState",
    "SessionTimeline",
    "Setting",
    "SimConfig",
    "SimulatedRobot",
    "TelemetryBus",
    "UtterancePolicy",
    "build_report",
    "compile_timeline",
    "create_regimen",
    "default_hiit_regimen",
    "load_catalog",
    "replay",
    "validate",
    "__version__",
]
