"""Engine state and the deterministic event fold.

State is a pure function of the journal: replaying the same events always
produces the same state, byte for byte under the canonical serialization.
Commands never mutate state directly; they append an event and the event is
applied here. Sessions are deliberately absent: they are runtime state only.

``claim_seq`` is bookkeeping, not data. It is excluded from the canonical
form and recomputed on replay and restore as the highest admission sequence
seen, which keeps new claims strictly after every claim that still exists.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import date, datetime

from .journal import EventKind, JournalEvent
from .models import (
    AvailabilityWindow,
    ClaimRequest,
    Job,
    JobState,
    PermissionRequest,
    RequestStatus,
    UserAccount,
)
from .models import Action
from .roles import Role
from .timeutil import parse_iso, to_iso


@dataclass
class EngineState:
    accounts: dict[str, UserAccount] = field(default_factory=dict)
    jobs: dict[str, Job] = field(default_factory=dict)
    # Pending claims per job, in admission order; resolved queues are dropped.
    claims: dict[str, list[ClaimRequest]] = field(default_factory=dict)
    requests: dict[str, PermissionRequest] = field(default_factory=dict)
    claim_seq: int = 0

    def account_by_username(self, username: str) -> UserAccount | None:
        for account in self.accounts.values():
            if account.username == username:
                return account
        return None


def apply_event(state: EngineState, event: JournalEvent) -> None:
    """Fold one event into the state. Events are facts; nothing is re-validated."""
    payload = event.payload
    kind = event.kind

    if kind is EventKind.ACCOUNT_CREATED:
        account = UserAccount(
            user_id=payload["user_id"],
            username=payload["username"],
            credential=payload["credential"],
            roles={Role.from_label(label) for label in payload["roles"]},
            created_at=parse_iso(payload["created_at"]),
        )
        state.accounts[account.user_id] = account

    elif kind is EventKind.ROLE_ASSIGNED:
        state.accounts[payload["user_id"]].roles.add(Role.from_label(payload["role"]))

    elif kind is EventKind.ROLE_REVOKED:
        state.accounts[payload["user_id"]].roles.discard(Role.from_label(payload["role"]))

    elif kind is EventKind.SESSION_OPENED:
        pass  # audit only; sessions never live in replayed state

    elif kind is EventKind.JOB_POSTED:
        window = payload.get("window")
        job = Job(
            job_id=payload["job_id"],
            assigned_by=payload["assigned_by"],
            assigned_on=parse_iso(payload["assigned_on"]),
            target_level=int(payload["target_level"]),
            job_type=payload["job_type"],
            description=payload["description"],
            window=_window_from_dict(window),
        )
        state.jobs[job.job_id] = job
        grant_id = payload.get("grant_request_id")
        if grant_id is not None:
            state.requests[grant_id].spent = True
        _count_transaction(state, payload["poster_user_id"], event.occurred_at.date())

    elif kind is EventKind.CLAIM_SUBMITTED:
        claim = ClaimRequest(
            job_id=payload["job_id"],
            user_id=payload["user_id"],
            login_time=parse_iso(payload["login_time"]),
            submitted_at=parse_iso(payload["submitted_at"]),
            sequence=int(payload["sequence"]),
        )
        state.claims.setdefault(claim.job_id, []).append(claim)
        state.claim_seq = max(state.claim_seq, claim.sequence)
        _count_transaction(state, claim.user_id, event.occurred_at.date())

    elif kind is EventKind.CLAIMS_RESOLVED:
        job = state.jobs[payload["job_id"]]
        job.state = JobState.ASSIGNED
        job.claimed_by = payload["winner_user_id"]
        state.claims.pop(job.job_id, None)

    elif kind is EventKind.JOB_COMPLETED:
        state.jobs[payload["job_id"]].state = JobState.COMPLETED

    elif kind is EventKind.PERMISSION_REQUESTED:
        request = PermissionRequest(
            request_id=payload["request_id"],
            requester=payload["requester"],
            action=Action(payload["action"]),
            requested_at=parse_iso(payload["requested_at"]),
        )
        state.requests[request.request_id] = request

    elif kind is EventKind.PERMISSION_APPROVED:
        request = state.requests[payload["request_id"]]
        request.status = RequestStatus.APPROVED
        request.approver = payload["approver"]

    elif kind is EventKind.BACKUP_TAKEN:
        pass  # audit only

    elif kind is EventKind.STATE_RESTORED:
        restored = state_from_dict(payload["snapshot"])
        state.accounts = restored.accounts
        state.jobs = restored.jobs
        state.claims = restored.claims
        state.requests = restored.requests
        state.claim_seq = restored.claim_seq

    else:  # pragma: no cover - EventKind is closed
        raise AssertionError(f"unhandled event kind {kind}")


def replay_events(events) -> EngineState:
    state = EngineState()
    for event in events:
        apply_event(state, event)
    return state


# Canonical serialization. Dict key order does not matter (dumps sorts keys);
# list order does and is part of the state (claim admission order).

def state_to_dict(state: EngineState) -> dict:
    return {
        "accounts": {
            uid: {
                "username": a.username,
                "credential": a.credential,
                "roles": sorted(r.label for r in a.roles),
                "created_at": to_iso(a.created_at),
                "tx_count": a.tx_count,
                "tx_day": a.tx_day.isoformat() if a.tx_day else None,
            }
            for uid, a in state.accounts.items()
        },
        "jobs": {
            jid: {
                "assigned_by": j.assigned_by,
                "assigned_on": to_iso(j.assigned_on),
                "target_level": j.target_level,
                "job_type": j.job_type,
                "description": j.description,
                "window": _window_to_dict(j.window),
                "state": j.state.value,
                "claimed_by": j.claimed_by,
            }
            for jid, j in state.jobs.items()
        },
        "claims": {
            jid: [
                {
                    "user_id": c.user_id,
                    "login_time": to_iso(c.login_time),
                    "submitted_at": to_iso(c.submitted_at),
                    "sequence": c.sequence,
                }
                for c in queue
            ]
            for jid, queue in state.claims.items()
            if queue
        },
        "requests": {
            rid: {
                "requester": r.requester,
                "action": r.action.value,
                "requested_at": to_iso(r.requested_at),
                "status": r.status.value,
                "approver": r.approver,
                "spent": r.spent,
            }
            for rid, r in state.requests.items()
        },
    }


def state_from_dict(data: dict) -> EngineState:
    state = EngineState()
    for uid, raw in data.get("accounts", {}).items():
        state.accounts[uid] = UserAccount(
            user_id=uid,
            username=raw["username"],
            credential=raw["credential"],
            roles={Role.from_label(label) for label in raw["roles"]},
            created_at=parse_iso(raw["created_at"]),
            tx_count=int(raw.get("tx_count", 0)),
            tx_day=date.fromisoformat(raw["tx_day"]) if raw.get("tx_day") else None,
        )
    for jid, raw in data.get("jobs", {}).items():
        state.jobs[jid] = Job(
            job_id=jid,
            assigned_by=raw["assigned_by"],
            assigned_on=parse_iso(raw["assigned_on"]),
            target_level=int(raw["target_level"]),
            job_type=raw["job_type"],
            description=raw["description"],
            window=_window_from_dict(raw.get("window")),
            state=JobState(raw["state"]),
            claimed_by=raw.get("claimed_by"),
        )
    for jid, queue in data.get("claims", {}).items():
        state.claims[jid] = [
            ClaimRequest(
                job_id=jid,
                user_id=raw["user_id"],
                login_time=parse_iso(raw["login_time"]),
                submitted_at=parse_iso(raw["submitted_at"]),
                sequence=int(raw["sequence"]),
            )
            for raw in queue
        ]
    for rid, raw in data.get("requests", {}).items():
        state.requests[rid] = PermissionRequest(
            request_id=rid,
            requester=raw["requester"],
            action=Action(raw["action"]),
            requested_at=parse_iso(raw["requested_at"]),
            status=RequestStatus(raw["status"]),
            approver=raw.get("approver"),
            spent=bool(raw.get("spent", False)),
        )
    state.claim_seq = max(
        (c.sequence for queue in state.claims.values() for c in queue),
        default=0,
    )
    return state


def canonical_json(state: EngineState) -> str:
    return json.dumps(state_to_dict(state), sort_keys=True, separators=(",", ":"))


def state_digest(state: EngineState) -> str:
    return hashlib.sha256(canonical_json(state).encode("utf-8")).hexdigest()


def _window_to_dict(window: AvailabilityWindow | None) -> dict | None:
    if window is None:
        return None
    return {"opens_at": to_iso(window.opens_at), "closes_at": to_iso(window.closes_at)}


def _window_from_dict(raw: dict | None) -> AvailabilityWindow | None:
    if raw is None:
        return None
    return AvailabilityWindow(
        opens_at=parse_iso(raw["opens_at"]), closes_at=parse_iso(raw["closes_at"])
    )


def _count_transaction(state: EngineState, user_id: str, day: date) -> None:
    account = state.accounts[user_id]
    if account.tx_day != day:
        account.tx_day = day
        account.tx_count = 0
    account.tx_count += 1
