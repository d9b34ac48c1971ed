"""Core data types for accounts, sessions, jobs, claims, and decisions."""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime
from enum import Enum

from .roles import Role, effective_priority


class Action(Enum):
    CREATE_ACCOUNT = "CreateAccount"
    LOGIN = "Login"
    POST_JOB = "PostJob"
    LIST_JOBS = "ListJobs"
    CLAIM_JOB = "ClaimJob"
    RESOLVE_CLAIMS = "ResolveClaims"
    COMPLETE_JOB = "CompleteJob"
    ASSIGN_ROLE = "AssignRole"
    REVOKE_ROLE = "RevokeRole"
    REQUEST_PERMISSION = "RequestPermission"
    APPROVE_PERMISSION = "ApprovePermission"
    BACKUP = "Backup"
    RESTORE = "Restore"


class Outcome(Enum):
    PERMIT = "Permit"
    DENY = "Deny"


class Reason(Enum):
    NOT_ADMIN = "NotAdmin"
    WRONG_LEVEL = "WrongLevel"
    WINDOW_CLOSED = "WindowClosed"
    TRANSACTION_LIMIT = "TransactionLimit"
    NO_APPROVAL = "NoApproval"
    SESSION_EXPIRED = "SessionExpired"
    OK = "Ok"


@dataclass(frozen=True)
class Decision:
    """Outcome plus reason; a permit always carries reason Ok."""

    outcome: Outcome
    reason: Reason

    def __post_init__(self):
        if self.outcome is Outcome.PERMIT and self.reason is not Reason.OK:
            raise ValueError("a permit must carry reason Ok")
        if self.outcome is Outcome.DENY and self.reason is Reason.OK:
            raise ValueError("a denial needs a real reason")

    @classmethod
    def permit(cls) -> "Decision":
        return cls(Outcome.PERMIT, Reason.OK)

    @classmethod
    def deny(cls, reason: Reason) -> "Decision":
        return cls(Outcome.DENY, reason)

    @property
    def permitted(self) -> bool:
        return self.outcome is Outcome.PERMIT


@dataclass
class UserAccount:
    user_id: str
    username: str
    credential: str  # salted hash, never the raw password
    roles: set[Role]
    created_at: datetime
    tx_count: int = 0  # counted actions performed on tx_day
    tx_day: date | None = None

    @property
    def priority(self) -> int:
        return effective_priority(self.roles)


@dataclass(frozen=True)
class Session:
    """Ephemeral login state; never journaled or backed up with its token."""

    token: str
    user_id: str
    login_time: datetime
    expires_at: datetime

    def alive(self, now: datetime) -> bool:
        return now < self.expires_at


@dataclass(frozen=True)
class AvailabilityWindow:
    opens_at: datetime
    closes_at: datetime

    def __post_init__(self):
        if self.closes_at < self.opens_at:
            raise ValueError("window closes before it opens")

    def contains(self, now: datetime) -> bool:
        # Both endpoints are inside the window.
        return self.opens_at <= now <= self.closes_at


class JobState(Enum):
    OPEN = "Open"
    ASSIGNED = "Assigned"
    COMPLETED = "Completed"


@dataclass
class Job:
    job_id: str
    assigned_by: str  # poster's username, shown on the board
    assigned_on: datetime
    target_level: int  # role ordinal a claimant must match exactly
    job_type: str
    description: str
    window: AvailabilityWindow | None = None
    state: JobState = JobState.OPEN
    claimed_by: str | None = None  # winner's user id once Assigned

    def is_available(self, now: datetime) -> bool:
        """Absent window means always available."""
        return self.window is None or self.window.contains(now)


@dataclass(frozen=True)
class ClaimRequest:
    """A pending claim; login_time is copied from the claimant's session.

    ``sequence`` records admission order across the whole engine and breaks
    no ties itself; resolution orders by (priority, login_time, user_id).
    ``submitted_at`` is audit detail only.
    """

    job_id: str
    user_id: str
    login_time: datetime
    submitted_at: datetime
    sequence: int


class RequestStatus(Enum):
    PENDING = "Pending"
    APPROVED = "Approved"
    DENIED = "Denied"


@dataclass
class PermissionRequest:
    request_id: str
    requester: str  # user id
    action: Action
    requested_at: datetime
    status: RequestStatus = RequestStatus.PENDING
    approver: str | None = None  # user id of whoever approved
    spent: bool = False  # an approved grant permits exactly one use


@dataclass(frozen=True)
class TransactionPolicy:
    """Per-account daily ceiling on counted actions; day boundary is UTC."""

    max_per_day: int = 50
    counted: frozenset = field(
        default_factory=lambda: frozenset({Action.CLAIM_JOB, Action.POST_JOB})
    )

    def counts(self, action: Action) -> bool:
        return action in self.counted
