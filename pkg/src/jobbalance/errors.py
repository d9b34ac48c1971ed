"""Error types raised by the engine and mapped onto HTTP statuses by the server.

Each class carries a stable ``code`` string so clients can match on it without
parsing messages. ``AccessDenied`` is special: it wraps the policy decision
that produced the denial, including the reason enum value.
"""
from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .models import Decision


class EngineError(Exception):
    code = "EngineError"

    def __init__(self, message: str | None = None):
        super().__init__(message or self.code)
        self.message = message or self.code


class AccessDenied(EngineError):
    code = "AccessDenied"

    def __init__(self, decision: "Decision", message: str | None = None):
        self.decision = decision
        super().__init__(message or f"denied: {decision.reason.value}")


# Accounts and sessions.

class DuplicateUsernameError(EngineError):
    code = "DuplicateUsername"


class WeakPasswordError(EngineError):
    code = "WeakPassword"


class BadCredentialsError(EngineError):
    code = "BadCredentials"


class UnknownTokenError(EngineError):
    code = "UnknownToken"


class SessionExpiredError(EngineError):
    code = "SessionExpired"


class UnknownUserError(EngineError):
    code = "UnknownUser"


# Roles.

class EmptyRoleSetError(EngineError):
    code = "EmptyRoleSet"


class LastRoleError(EngineError):
    code = "LastRole"


class RoleNotHeldError(EngineError):
    code = "RoleNotHeld"


# Permission workflow.

class UnknownRequestError(EngineError):
    code = "UnknownRequest"


class NotSuperiorError(EngineError):
    code = "NotSuperior"


class AlreadyResolvedError(EngineError):
    code = "AlreadyResolved"


# Job board.

class UnknownJobError(EngineError):
    code = "UnknownJob"


class JobNotOpenError(EngineError):
    code = "JobNotOpen"


class JobNotAssignedError(EngineError):
    code = "JobNotAssigned"


class NotAssigneeError(EngineError):
    code = "NotAssignee"


class DuplicateClaimError(EngineError):
    code = "DuplicateClaim"


# Storage.

class StorageFailureError(EngineError):
    code = "StorageFailure"


class GapDetectedError(EngineError):
    code = "GapDetected"


class UnknownEventKindError(EngineError):
    code = "UnknownEventKind"


class BackupParseError(EngineError):
    code = "ParseError"


class UnsupportedVersionError(EngineError):
    code = "UnsupportedVersion"
