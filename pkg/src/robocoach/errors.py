"""Error types shared across the service.

Every error carries a stable machine-readable ``code`` so the API layer can
map it onto an ApiError body without guessing, plus the HTTP status the API
uses when the error crosses the wire.  The CLI maps the two base classes onto
its exit codes: InputError -> 3, DomainError -> 2.
"""

from __future__ import annotations


class RobocoachError(Exception):
    code = "error"
    http_status = 400

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


class InputError(RobocoachError):
    """Malformed input: unparseable documents, bad tokens, broken traces."""

    code = "invalid_input"
    http_status = 422


class ParseError(InputError):
    code = "parse_error"


class UnknownSetting(InputError):
    code = "invalid_setting"


class NonMonotonicTime(InputError):
    code = "non_monotonic_time"


class DomainError(RobocoachError):
    """Well-formed input that violates a domain rule."""

    code = "domain_violation"
    http_status = 422


# -- catalog ----------------------------------------------------------------

class DuplicateId(DomainError):
    code = "duplicate_id"


class IllegalCategory(DomainError):
    code = "illegal_category"


class UnknownExercise(DomainError):
    code = "unknown_exercise"
    http_status = 404


class MissingReason(DomainError):
    code = "missing_reason"


class IllegalTransition(DomainError):
    code = "illegal_transition"
    http_status = 409


# -- regimen ----------------------------------------------------------------

class EmptyRegimen(DomainError):
    code = "empty_regimen"


class ExcludedExercise(DomainError):
    code = "excluded_exercise"

    def __init__(self, exercise_id: str, reason: str):
        super().__init__(f"'{exercise_id}' is excluded: {reason}")
        self.exercise_id = exercise_id
        self.reason = reason


class NegativeDuration(DomainError):
    code = "nonpositive_duration"


class InvalidRegimen(DomainError):
    code = "invalid_regimen"

    def __init__(self, message: str = "", violations=()):
        super().__init__(message or "regimen failed validation")
        self.violations = list(violations)


class MissingExercise(DomainError):
    code = "missing_exercise"

    def __init__(self, exercise_id: str):
        super().__init__(f"catalog does not provide '{exercise_id}'")
        self.exercise_id = exercise_id


class NotFound(DomainError):
    code = "not_found"
    http_status = 404


class StorageError(RobocoachError):
    code = "storage_error"
    http_status = 500


# -- session engine ----------------------------------------------------------

class AlreadyRunning(IllegalTransition):
    """Start requested while a session is active.  On the wire this is just
    another illegal transition; the distinct type keeps call sites readable."""


class InvalidTimeline(DomainError):
    code = "invalid_timeline"


class NoPendingQuestion(DomainError):
    code = "no_pending_question"
    http_status = 409


class EmptyPool(DomainError):
    code = "empty_pool"


class ButtonsDisconnected(DomainError):
    code = "buttons_disconnected"


class ConsentRequired(DomainError):
    code = "consent_required"


# -- robot gateway -----------------------------------------------------------

class Disconnected(DomainError):
    code = "robot_disconnected"
    http_status = 503


class InvalidCommand(DomainError):
    code = "invalid_command"
    http_status = 400


class UnknownTopic(DomainError):
    code = "unknown_topic"


class NotOnFloor(DomainError):
    code = "not_on_floor"


class NotStanding(DomainError):
    code = "not_standing"


# -- pose pipeline -----------------------------------------------------------

class DegeneratePoints(DomainError):
    code = "degenerate_points"
