"""
Domain Exceptions
Typed errors raised by the domain, application and infrastructure layers
"""
from typing import Iterable, List, Optional


class IntelError(Exception):
    """Base class for all toolkit errors"""


class IntelValidationError(IntelError, ValueError):
    """Invalid input or violated precondition (CLI exit code 1)"""


class IntelRuntimeError(IntelError, RuntimeError):
    """Failure while running an otherwise valid request (CLI exit code 2)"""


class EmptySessionError(IntelValidationError):
    """A session or score list has no items"""


class MissingBasicListError(IntelValidationError):
    """A basic model list is missing for a session"""

    def __init__(self, session_id: str, model_id: str):
        self.session_id = session_id
        self.model_id = model_id
        super().__init__(f"Missing basic list for session {session_id!r}, model {model_id!r}")


class NoPositivesError(IntelValidationError):
    """A session has no positive interaction"""


class InsufficientTimespanError(IntelValidationError):
    """Sessions span too few days for a temporal split"""


class EmptySplitError(IntelValidationError):
    """A temporal split produced an empty partition"""


class NoPairsError(IntelValidationError):
    """No BPR pair could be formed"""


class PreconditionViolatedError(IntelValidationError):
    """A theorem precondition does not hold for an instance"""


class OutOfVocabularyError(IntelValidationError):
    """A category id lies outside the configured vocabulary"""


class NoInputBranchesError(IntelValidationError):
    """Both the score and the category branch were ablated"""


class ShapeMismatchError(IntelValidationError):
    """Arrays that must agree in shape do not"""


class TimestampParseError(IntelValidationError):
    """A raw log row carries an unparseable timestamp"""

    def __init__(self, row: int, value: object):
        self.row = row
        self.value = value
        super().__init__(f"Unparseable timestamp {value!r} at row {row}")


class FingerprintMismatchError(IntelValidationError):
    """Checkpoint was trained with a different model configuration"""


class MissingSessionRankingError(IntelValidationError):
    """Some evaluated sessions have no ranking"""

    def __init__(self, session_ids: Iterable[str]):
        self.session_ids: List[str] = sorted(session_ids)
        preview = ", ".join(self.session_ids[:10])
        more = "" if len(self.session_ids) <= 10 else f" (+{len(self.session_ids) - 10} more)"
        super().__init__(f"Missing rankings for sessions: {preview}{more}")


class ConfigValidationError(IntelValidationError):
    """Configuration values are invalid"""

    def __init__(self, fields: List[str], detail: Optional[str] = None):
        self.fields = list(fields)
        message = f"Invalid configuration fields: {', '.join(self.fields)}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class NonFiniteLossError(IntelRuntimeError):
    """A loss component evaluated to NaN or infinity"""

    def __init__(self, component: str):
        self.component = component
        super().__init__(f"Non-finite value in loss component {component!r}")


class TrainingDivergedError(IntelRuntimeError):
    """Training produced a non-finite loss; the last good checkpoint is kept"""

    def __init__(self, message: str, checkpoint_path: Optional[str] = None):
        self.checkpoint_path = checkpoint_path
        super().__init__(message)
