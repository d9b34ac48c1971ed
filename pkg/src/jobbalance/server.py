"""HTTP facade over the engine.

Thin by design: handlers parse the request, call one engine method with the
current time, and serialize the result. Policy lives in the engine; this
module only maps engine errors onto HTTP statuses.

Authentication is a bearer token from POST /login. Job listings include each
job's pending claim queue when the caller is an admin, already sorted in
resolution order, so clients never re-sort.
"""
from __future__ import annotations

from datetime import datetime
from pathlib import Path
from typing import Callable

from fastapi import Depends, FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field, field_validator

from .engine import ClaimView, Engine
from .errors import (
    AccessDenied,
    AlreadyResolvedError,
    BackupParseError,
    BadCredentialsError,
    DuplicateClaimError,
    DuplicateUsernameError,
    EngineError,
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
    UnsupportedVersionError,
    WeakPasswordError,
)
from .models import Action, AvailabilityWindow, ClaimRequest, Job, PermissionRequest, Reason
from .roles import Role
from .timeutil import normalize, to_iso, utc_now

_DENY_STATUS = {
    Reason.NOT_ADMIN: 403,
    Reason.WRONG_LEVEL: 403,
    Reason.NO_APPROVAL: 403,
    Reason.WINDOW_CLOSED: 409,
    Reason.TRANSACTION_LIMIT: 429,
    Reason.SESSION_EXPIRED: 401,
}

_ERROR_STATUS = {
    BadCredentialsError: 401,
    UnknownTokenError: 401,
    SessionExpiredError: 401,
    NotSuperiorError: 403,
    NotAssigneeError: 403,
    DuplicateUsernameError: 409,
    DuplicateClaimError: 409,
    LastRoleError: 409,
    RoleNotHeldError: 409,
    JobNotOpenError: 409,
    JobNotAssignedError: 409,
    AlreadyResolvedError: 409,
    WeakPasswordError: 400,
    BackupParseError: 400,
    UnsupportedVersionError: 400,
    UnknownRequestError: 404,
    UnknownJobError: 404,
    UnknownUserError: 404,
}


class AccountBody(BaseModel):
    username: str = Field(min_length=1, max_length=64)
    password: str

    @field_validator("username")
    @classmethod
    def _strip(cls, value: str) -> str:
        value = value.strip()
        if not value:
            raise ValueError("username must not be blank")
        return value


class LoginBody(BaseModel):
    username: str
    password: str


class WindowBody(BaseModel):
    opens_at: datetime
    closes_at: datetime


class PostJobBody(BaseModel):
    level: int = Field(ge=1, le=5)
    type: str = Field(min_length=1, max_length=200)
    description: str = Field(default="", max_length=2000)
    window: WindowBody | None = None


class RoleBody(BaseModel):
    username: str
    role: str

    @field_validator("role")
    @classmethod
    def _known_role(cls, value: str) -> str:
        Role.from_label(value)  # raises ValueError on an unknown label
        return value


class PermissionBody(BaseModel):
    action: str = Action.POST_JOB.value

    @field_validator("action")
    @classmethod
    def _known_action(cls, value: str) -> str:
        Action(value)
        return value


class PathBody(BaseModel):
    path: str = Field(min_length=1)


def create_app(
    engine: Engine,
    *,
    clock: Callable[[], datetime] = utc_now,
    ui_dir: Path | None = None,
) -> FastAPI:
    app = FastAPI(title="jobbalance", version="0.1.0")

    def now() -> datetime:
        return normalize(clock())

    def bearer(request: Request) -> str:
        header = request.headers.get("authorization", "")
        scheme, _, token = header.partition(" ")
        if scheme.lower() != "bearer" or not token.strip():
            raise UnknownTokenError("missing bearer token")
        return token.strip()

    @app.exception_handler(EngineError)
    async def on_engine_error(request: Request, exc: EngineError):
        status = 500
        body = {"code": exc.code, "message": exc.message}
        if isinstance(exc, AccessDenied):
            status = _DENY_STATUS[exc.decision.reason]
            body["reason"] = exc.decision.reason.value
        else:
            status = _ERROR_STATUS.get(type(exc), 500)
        return JSONResponse(status_code=status, content=body)

    @app.post("/accounts", status_code=201)
    def create_account(body: AccountBody):
        account = engine.create_account(body.username, body.password, now=now())
        return _account_dict(account)

    @app.post("/login")
    def login(body: LoginBody):
        session = engine.login(body.username, body.password, now=now())
        info = engine.describe(session.token, now=now())
        return {"token": session.token, **info}

    @app.post("/logout")
    def logout(token: str = Depends(bearer)):
        engine.logout(token)
        return {"ok": True}

    @app.get("/jobs")
    def list_jobs(token: str = Depends(bearer)):
        at = now()
        jobs = engine.list_jobs(token, now=at)
        is_admin = engine.authorize(token, Action.RESOLVE_CLAIMS, now=at).permitted
        rows = []
        for index, job in enumerate(jobs, start=1):
            row = _job_dict(job, engine)
            row["s_no"] = index
            if is_admin:
                row["claims"] = [
                    _claim_view_dict(v)
                    for v in engine.claim_queue(token, job.job_id, now=at)
                ]
            rows.append(row)
        return {"jobs": rows}

    @app.post("/jobs", status_code=201)
    def post_job(body: PostJobBody, token: str = Depends(bearer)):
        window = None
        if body.window is not None:
            window = AvailabilityWindow(
                opens_at=normalize(body.window.opens_at),
                closes_at=normalize(body.window.closes_at),
            )
        job = engine.post_job(
            token,
            body.level,
            body.type,
            body.description,
            window=window,
            now=now(),
        )
        return _job_dict(job, engine)

    @app.post("/jobs/{job_id}/claim", status_code=201)
    def claim_job(job_id: str, token: str = Depends(bearer)):
        claim = engine.submit_claim(token, job_id, now=now())
        return _claim_dict(claim)

    @app.post("/jobs/{job_id}/resolve")
    def resolve_job(job_id: str, token: str = Depends(bearer)):
        resolution = engine.resolve_claims(token, job_id, now=now())
        return {
            "outcome": "Resolved" if resolution.resolved else "NoClaims",
            "winner": _account_dict(resolution.winner) if resolution.winner else None,
            "job": _job_dict(resolution.job, engine),
        }

    @app.post("/jobs/{job_id}/complete")
    def complete_job(job_id: str, token: str = Depends(bearer)):
        job = engine.complete_job(token, job_id, now=now())
        return _job_dict(job, engine)

    @app.post("/roles/assign")
    def assign_role(body: RoleBody, token: str = Depends(bearer)):
        account = engine.assign_role(
            token, body.username, Role.from_label(body.role), now=now()
        )
        return _account_dict(account)

    @app.post("/roles/revoke")
    def revoke_role(body: RoleBody, token: str = Depends(bearer)):
        account = engine.revoke_role(
            token, body.username, Role.from_label(body.role), now=now()
        )
        return _account_dict(account)

    @app.post("/permissions/request", status_code=201)
    def request_permission(body: PermissionBody, token: str = Depends(bearer)):
        request = engine.request_permission(token, Action(body.action), now=now())
        return _request_dict(request, engine)

    @app.post("/permissions/{request_id}/approve")
    def approve_permission(request_id: str, token: str = Depends(bearer)):
        request = engine.approve_permission(token, request_id, now=now())
        return _request_dict(request, engine)

    @app.post("/admin/backup")
    def take_backup(body: PathBody, token: str = Depends(bearer)):
        doc = engine.backup(token, body.path, now=now())
        return {
            "path": body.path,
            "format_version": doc.format_version,
            "taken_at": to_iso(doc.taken_at),
            "accounts": len(doc.state.accounts),
            "jobs": len(doc.state.jobs),
        }

    @app.post("/admin/restore")
    def restore_backup(body: PathBody, token: str = Depends(bearer)):
        summary = engine.restore(token, body.path, now=now())
        return {"restored": True, **summary}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _account_dict(account) -> dict:
    return {
        "user_id": account.user_id,
        "username": account.username,
        "roles": sorted(r.label for r in account.roles),
        "priority": account.priority,
    }


def _job_dict(job: Job, engine: Engine) -> dict:
    claimed_by_username = (
        engine.username_of(job.claimed_by) if job.claimed_by is not None else None
    )
    return {
        "job_id": job.job_id,
        "assigned_by": job.assigned_by,
        "assigned_on": to_iso(job.assigned_on),
        "level": job.target_level,
        "level_label": Role(job.target_level).label,
        "type": job.job_type,
        "description": job.description,
        "window": None
        if job.window is None
        else {
            "opens_at": to_iso(job.window.opens_at),
            "closes_at": to_iso(job.window.closes_at),
        },
        "state": job.state.value,
        "claimed_by": job.claimed_by,
        "claimed_by_username": claimed_by_username,
    }


def _claim_dict(claim: ClaimRequest) -> dict:
    return {
        "job_id": claim.job_id,
        "user_id": claim.user_id,
        "login_time": to_iso(claim.login_time),
        "submitted_at": to_iso(claim.submitted_at),
        "sequence": claim.sequence,
    }


def _claim_view_dict(view: ClaimView) -> dict:
    return {
        "user_id": view.user_id,
        "username": view.username,
        "priority": view.priority,
        "login_time": to_iso(view.login_time),
        "submitted_at": to_iso(view.submitted_at),
        "sequence": view.sequence,
    }


def _request_dict(request: PermissionRequest, engine: Engine) -> dict:
    return {
        "request_id": request.request_id,
        "requester": request.requester,
        "requester_username": engine.username_of(request.requester),
        "action": request.action.value,
        "status": request.status.value,
        "approver": request.approver,
        "approver_username": engine.username_of(request.approver)
        if request.approver
        else None,
        "requested_at": to_iso(request.requested_at),
        "spent": request.spent,
    }
