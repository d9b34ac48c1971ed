"""The engine: command validation, event append, state application.

Every mutating command follows the same path under one lock: resolve the
session, cross-check the authorization matrix, validate operation
preconditions, build the event, append it durably, apply it to state, ack.
State is therefore always exactly what the journal says. Reads take the same
lock so they see consistent snapshots.

All timestamps come in from the caller (``now``); the engine never consults
the wall clock unless the caller passes nothing. That keeps every behavior,
including window checks and daily limit resets, testable at fixed instants.
"""
from __future__ import annotations

import hashlib
import hmac
import secrets
import threading
import uuid
from copy import deepcopy
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

from . import state as statemod
from .authz import MatrixContext, decide
from .errors import (
    AccessDenied,
    AlreadyResolvedError,
    BadCredentialsError,
    DuplicateClaimError,
    DuplicateUsernameError,
    JobNotAssignedError,
    JobNotOpenError,
    LastRoleError,
    NotAssigneeError,
    NotSuperiorError,
    RoleNotHeldError,
    SessionExpiredError,
    UnknownJobError,
    UnknownRequestError,
    UnknownTokenError,
    UnknownUserError,
    WeakPasswordError,
)
from .journal import EventKind, Journal
from .models import (
    Action,
    AvailabilityWindow,
    ClaimRequest,
    Decision,
    Job,
    JobState,
    PermissionRequest,
    Reason,
    RequestStatus,
    Session,
    TransactionPolicy,
    UserAccount,
)
from .roles import Role, outranks
from .timeutil import normalize, to_iso, utc_now
from .xmlbackup import BackupDocument, FORMAT_VERSION, read_backup, write_backup

JOURNAL_FILENAME = "journal.ndjson"
MIN_PASSWORD_LENGTH = 8


def _board_order(job: Job):
    return (job.target_level, job.assigned_on, job.job_id)


def hash_password(password: str, *, iterations: int) -> str:
    salt = secrets.token_hex(16)
    digest = hashlib.pbkdf2_hmac(
        "sha256", password.encode("utf-8"), bytes.fromhex(salt), iterations
    )
    return f"pbkdf2_sha256${iterations}${salt}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, iterations, salt, expected = stored.split("$")
        if scheme != "pbkdf2_sha256":
            return False
        digest = hashlib.pbkdf2_hmac(
            "sha256", password.encode("utf-8"), bytes.fromhex(salt), int(iterations)
        )
        return hmac.compare_digest(digest.hex(), expected)
    except (ValueError, TypeError):
        return False


@dataclass(frozen=True)
class ClaimView:
    """One row of a job's pending queue, in resolution order."""

    user_id: str
    username: str
    priority: int
    login_time: datetime
    submitted_at: datetime
    sequence: int


@dataclass(frozen=True)
class Resolution:
    resolved: bool
    job: Job
    winner: UserAccount | None


class Engine:
    def __init__(
        self,
        data_dir: Path | str,
        *,
        session_ttl_seconds: int = 8 * 3600,
        max_per_day: int = 50,
        hash_iterations: int = 120_000,
        fsync: bool = True,
    ):
        self._ttl = timedelta(seconds=session_ttl_seconds)
        self._policy = TransactionPolicy(max_per_day=max_per_day)
        self._iterations = hash_iterations
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._journal = Journal(self.data_dir / JOURNAL_FILENAME, fsync=fsync)
        self._state = statemod.replay_events(self._journal.load())
        self._sessions: dict[str, Session] = {}
        self._lock = threading.RLock()

    # -- accounts and sessions ------------------------------------------------

    def ensure_bootstrap(self, username: str, password: str, now: datetime | None = None) -> UserAccount | None:
        """Create the first admin account if no accounts exist yet."""
        now = self._now(now)
        with self._lock:
            if self._state.accounts:
                return None
            return self._create_account(username, password, [Role.ADMIN], now)

    def create_account(self, username: str, password: str, now: datetime | None = None) -> UserAccount:
        now = self._now(now)
        with self._lock:
            return self._create_account(username, password, [Role.EXECUTIVE], now)

    def _create_account(self, username: str, password: str, roles: list[Role], now: datetime) -> UserAccount:
        username = username.strip()
        if not username:
            raise ValueError("username must not be empty")
        if len(password) < MIN_PASSWORD_LENGTH:
            raise WeakPasswordError(
                f"password must be at least {MIN_PASSWORD_LENGTH} characters"
            )
        if self._state.account_by_username(username) is not None:
            raise DuplicateUsernameError(f"username {username!r} is taken")
        user_id = _new_id("u")
        self._record(
            EventKind.ACCOUNT_CREATED,
            {
                "user_id": user_id,
                "username": username,
                "credential": hash_password(password, iterations=self._iterations),
                "roles": [r.label for r in roles],
                "created_at": to_iso(now),
            },
            now,
        )
        return self._state.accounts[user_id]

    def login(self, username: str, password: str, now: datetime | None = None) -> Session:
        now = self._now(now)
        with self._lock:
            account = self._state.account_by_username(username.strip())
            if account is None or not verify_password(password, account.credential):
                raise BadCredentialsError("unknown username or wrong password")
            session = Session(
                token=secrets.token_urlsafe(24),
                user_id=account.user_id,
                login_time=now,
                expires_at=now + self._ttl,
            )
            # Audit record only; the token itself never reaches the journal.
            self._record(
                EventKind.SESSION_OPENED,
                {
                    "user_id": account.user_id,
                    "login_time": to_iso(session.login_time),
                    "expires_at": to_iso(session.expires_at),
                },
                now,
            )
            self._sessions[session.token] = session
            return session

    def logout(self, token: str) -> None:
        with self._lock:
            if self._sessions.pop(token, None) is None:
                raise UnknownTokenError("no such session")

    def describe(self, token: str, now: datetime | None = None) -> dict:
        now = self._now(now)
        with self._lock:
            session = self._session(token, now)
            account = self._state.accounts[session.user_id]
            return {
                "user_id": account.user_id,
                "username": account.username,
                "roles": sorted(r.label for r in account.roles),
                "priority": account.priority,
                "login_time": to_iso(session.login_time),
                "expires_at": to_iso(session.expires_at),
            }

    def _session(self, token: str, now: datetime) -> Session:
        session = self._sessions.get(token)
        if session is None:
            raise UnknownTokenError("no such session")
        if not session.alive(now):
            del self._sessions[token]
            raise SessionExpiredError("session expired")
        return session

    # -- authorization --------------------------------------------------------

    def authorize(
        self,
        token: str,
        action: Action,
        target_level: int | None = None,
        now: datetime | None = None,
    ) -> Decision:
        """Cross-check only; never raises for a dead session, it denies."""
        now = self._now(now)
        with self._lock:
            session = self._sessions.get(token)
            if session is None or not session.alive(now):
                return Decision.deny(Reason.SESSION_EXPIRED)
            account = self._state.accounts[session.user_id]
            return self._decide(account, action, target_level=target_level, now=now)

    def _decide(
        self,
        account: UserAccount,
        action: Action,
        *,
        target_level: int | None = None,
        window_open: bool = True,
        now: datetime,
    ) -> Decision:
        ctx = MatrixContext(
            target_level=target_level,
            window_open=window_open,
            under_limit=self._under_limit(account, action, now),
            has_grant=self._has_grant(account, action),
        )
        return decide(account.priority, action, ctx)

    def _gate(
        self,
        account: UserAccount,
        action: Action,
        *,
        target_level: int | None = None,
        window_open: bool = True,
        now: datetime,
    ) -> None:
        decision = self._decide(
            account, action, target_level=target_level, window_open=window_open, now=now
        )
        if not decision.permitted:
            raise AccessDenied(decision)

    def _under_limit(self, account: UserAccount, action: Action, now: datetime) -> bool:
        if not self._policy.counts(action):
            return True
        count = account.tx_count if account.tx_day == now.date() else 0
        return count < self._policy.max_per_day

    def _has_grant(self, account: UserAccount, action: Action) -> bool:
        return self._find_grant(account, action) is not None

    def _find_grant(self, account: UserAccount, action: Action) -> PermissionRequest | None:
        candidates = [
            r
            for r in self._state.requests.values()
            if r.requester == account.user_id
            and r.action == action
            and r.status is RequestStatus.APPROVED
            and not r.spent
        ]
        if not candidates:
            return None
        # Oldest grant first so consumption order is predictable.
        return min(candidates, key=lambda r: (r.requested_at, r.request_id))

    # -- roles ----------------------------------------------------------------

    def assign_role(
        self, token: str, username: str, role: Role, now: datetime | None = None
    ) -> UserAccount:
        now = self._now(now)
        with self._lock:
            actor = self._actor(token, now)
            self._gate(actor, Action.ASSIGN_ROLE, now=now)
            target = self._user(username)
            if role not in target.roles:
                self._record(
                    EventKind.ROLE_ASSIGNED,
                    {"user_id": target.user_id, "role": role.label},
                    now,
                )
            return target

    def revoke_role(
        self, token: str, username: str, role: Role, now: datetime | None = None
    ) -> UserAccount:
        now = self._now(now)
        with self._lock:
            actor = self._actor(token, now)
            self._gate(actor, Action.REVOKE_ROLE, now=now)
            target = self._user(username)
            if role not in target.roles:
                raise RoleNotHeldError(f"{username} does not hold {role.label}")
            if len(target.roles) == 1:
                raise LastRoleError("cannot revoke the only role an account holds")
            self._record(
                EventKind.ROLE_REVOKED,
                {"user_id": target.user_id, "role": role.label},
                now,
            )
            return target

    # -- permission workflow --------------------------------------------------

    def request_permission(
        self, token: str, action: Action = Action.POST_JOB, now: datetime | None = None
    ) -> PermissionRequest:
        now = self._now(now)
        with self._lock:
            actor = self._actor(token, now)
            self._gate(actor, Action.REQUEST_PERMISSION, now=now)
            request_id = _new_id("p")
            self._record(
                EventKind.PERMISSION_REQUESTED,
                {
                    "request_id": request_id,
                    "requester": actor.user_id,
                    "action": action.value,
                    "requested_at": to_iso(now),
                },
                now,
            )
            return self._state.requests[request_id]

    def approve_permission(
        self, token: str, request_id: str, now: datetime | None = None
    ) -> PermissionRequest:
        now = self._now(now)
        with self._lock:
            actor = self._actor(token, now)
            request = self._state.requests.get(request_id)
            if request is None:
                raise UnknownRequestError(f"no request {request_id}")
            if request.status is not RequestStatus.PENDING:
                raise AlreadyResolvedError(f"request {request_id} is {request.status.value}")
            requester = self._state.accounts[request.requester]
            # Operation precondition, not a matrix row: strict superiority
            # binds everyone, an admin approving another admin included.
            if not outranks(actor.priority, requester.priority):
                raise NotSuperiorError(
                    "approver must hold a strictly higher rank than the requester"
                )
            self._record(
                EventKind.PERMISSION_APPROVED,
                {"request_id": request_id, "approver": actor.user_id},
                now,
            )
            return request

    # -- job board ------------------------------------------------------------

    def post_job(
        self,
        token: str,
        target_level: int,
        job_type: str,
        description: str,
        window: AvailabilityWindow | None = None,
        now: datetime | None = None,
    ) -> Job:
        now = self._now(now)
        if not 1 <= int(target_level) <= 5:
            raise ValueError("target_level must be between 1 and 5")
        with self._lock:
            actor = self._actor(token, now)
            self._gate(actor, Action.POST_JOB, now=now)
            grant = None
            if actor.priority != 1:
                grant = self._find_grant(actor, Action.POST_JOB)
                assert grant is not None  # the gate just checked
            job_id = _new_id("j")
            payload = {
                "job_id": job_id,
                "poster_user_id": actor.user_id,
                "assigned_by": actor.username,
                "assigned_on": to_iso(now),
                "target_level": int(target_level),
                "job_type": job_type,
                "description": description,
                "window": _window_payload(window),
                "grant_request_id": grant.request_id if grant else None,
            }
            self._record(EventKind.JOB_POSTED, payload, now)
            return self._state.jobs[job_id]

    def list_jobs(self, token: str, now: datetime | None = None) -> list[Job]:
        """Board order: level, then posting time, then id."""
        now = self._now(now)
        with self._lock:
            actor = self._actor(token, now)
            self._gate(actor, Action.LIST_JOBS, now=now)
            return sorted(self._state.jobs.values(), key=_board_order)

    def submit_claim(self, token: str, job_id: str, now: datetime | None = None) -> ClaimRequest:
        now = self._now(now)
        with self._lock:
            session = self._session(token, now)
            account = self._state.accounts[session.user_id]
            job = self._state.jobs.get(job_id)
            if job is None:
                raise UnknownJobError(f"no job {job_id}")
            if job.state is not JobState.OPEN:
                raise JobNotOpenError(f"job {job_id} is {job.state.value}")
            self._gate(
                account,
                Action.CLAIM_JOB,
                target_level=job.target_level,
                window_open=job.is_available(now),
                now=now,
            )
            queue = self._state.claims.get(job_id, [])
            if any(c.user_id == account.user_id for c in queue):
                raise DuplicateClaimError("one claim per user per job")
            self._record(
                EventKind.CLAIM_SUBMITTED,
                {
                    "job_id": job_id,
                    "user_id": account.user_id,
                    "login_time": to_iso(session.login_time),
                    "submitted_at": to_iso(now),
                    "sequence": self._state.claim_seq + 1,
                },
                now,
            )
            return self._state.claims[job_id][-1]

    def resolve_claims(self, token: str, job_id: str, now: datetime | None = None) -> Resolution:
        now = self._now(now)
        with self._lock:
            actor = self._actor(token, now)
            self._gate(actor, Action.RESOLVE_CLAIMS, now=now)
            job = self._state.jobs.get(job_id)
            if job is None:
                raise UnknownJobError(f"no job {job_id}")
            if job.state is not JobState.OPEN:
                raise AlreadyResolvedError(f"job {job_id} is {job.state.value}")
            queue = self._state.claims.get(job_id, [])
            if not queue:
                return Resolution(resolved=False, job=job, winner=None)
            winner = min(queue, key=self._resolution_key)
            self._record(
                EventKind.CLAIMS_RESOLVED,
                {"job_id": job_id, "winner_user_id": winner.user_id},
                now,
            )
            return Resolution(
                resolved=True, job=job, winner=self._state.accounts[winner.user_id]
            )

    def _resolution_key(self, claim: ClaimRequest):
        # Priority first, then who logged in first, then user id. Admission
        # order never matters beyond this key.
        account = self._state.accounts[claim.user_id]
        return (account.priority, claim.login_time, claim.user_id)

    def claim_queue(self, token: str, job_id: str, now: datetime | None = None) -> list[ClaimView]:
        now = self._now(now)
        with self._lock:
            actor = self._actor(token, now)
            self._gate(actor, Action.RESOLVE_CLAIMS, now=now)
            if job_id not in self._state.jobs:
                raise UnknownJobError(f"no job {job_id}")
            queue = sorted(self._state.claims.get(job_id, []), key=self._resolution_key)
            views = []
            for claim in queue:
                account = self._state.accounts[claim.user_id]
                views.append(
                    ClaimView(
                        user_id=claim.user_id,
                        username=account.username,
                        priority=account.priority,
                        login_time=claim.login_time,
                        submitted_at=claim.submitted_at,
                        sequence=claim.sequence,
                    )
                )
            return views

    def complete_job(self, token: str, job_id: str, now: datetime | None = None) -> Job:
        now = self._now(now)
        with self._lock:
            session = self._session(token, now)
            account = self._state.accounts[session.user_id]
            self._gate(account, Action.COMPLETE_JOB, now=now)
            job = self._state.jobs.get(job_id)
            if job is None:
                raise UnknownJobError(f"no job {job_id}")
            if job.state is not JobState.ASSIGNED:
                raise JobNotAssignedError(f"job {job_id} is {job.state.value}")
            if job.claimed_by != account.user_id:
                raise NotAssigneeError("only the assignee can complete a job")
            self._record(EventKind.JOB_COMPLETED, {"job_id": job_id}, now)
            return job

    # -- backup and restore ---------------------------------------------------

    def backup(self, token: str, dest: Path | str, now: datetime | None = None) -> BackupDocument:
        now = self._now(now)
        with self._lock:
            actor = self._actor(token, now)
            self._gate(actor, Action.BACKUP, now=now)
            doc = BackupDocument(
                format_version=FORMAT_VERSION,
                taken_at=now,
                state=deepcopy(self._state),
            )
            write_backup(doc, dest)
            self._record(
                EventKind.BACKUP_TAKEN,
                {"path": str(dest), "taken_at": to_iso(now)},
                now,
            )
            return doc

    def restore(self, token: str, source: Path | str, now: datetime | None = None) -> dict:
        now = self._now(now)
        with self._lock:
            actor = self._actor(token, now)
            self._gate(actor, Action.RESTORE, now=now)
            doc = read_backup(source)  # parse fully before touching anything
            self._record(
                EventKind.STATE_RESTORED,
                {"snapshot": statemod.state_to_dict(doc.state)},
                now,
            )
            self._sessions.clear()  # every session, the caller's included
            return {
                "accounts": len(self._state.accounts),
                "jobs": len(self._state.jobs),
                "requests": len(self._state.requests),
                "taken_at": to_iso(doc.taken_at),
            }

    # -- introspection --------------------------------------------------------

    def username_of(self, user_id: str) -> str | None:
        with self._lock:
            account = self._state.accounts.get(user_id)
            return account.username if account else None

    def canonical_state(self) -> dict:
        with self._lock:
            return statemod.state_to_dict(self._state)

    def state_digest(self) -> str:
        with self._lock:
            return statemod.state_digest(self._state)

    # -- plumbing -------------------------------------------------------------

    def _actor(self, token: str, now: datetime) -> UserAccount:
        return self._state.accounts[self._session(token, now).user_id]

    def _user(self, username: str) -> UserAccount:
        account = self._state.account_by_username(username)
        if account is None:
            raise UnknownUserError(f"no account named {username!r}")
        return account

    def _record(self, kind: EventKind, payload: dict, now: datetime) -> None:
        event = self._journal.append(kind, payload, now)
        statemod.apply_event(self._state, event)

    @staticmethod
    def _now(now: datetime | None) -> datetime:
        return normalize(now) if now is not None else utc_now()


def _new_id(prefix: str) -> str:
    return prefix + uuid.uuid4().hex[:12]


def _window_payload(window: AvailabilityWindow | None) -> dict | None:
    if window is None:
        return None
    return {"opens_at": to_iso(window.opens_at), "closes_at": to_iso(window.closes_at)}
