"""Pure authorization core.

Access control runs in two phases. Role assignment (the mandatory half) gives
an account its ordinals; nothing an account does can change them. Every
command is then cross-checked here (the discretionary half) before the engine
runs it. ``decide`` is a pure function of the actor's effective ordinal, the
action, and a small context snapshot, so it can be tested exhaustively.

The matrix:

    ordinal 1 (Admin): Permit for every action.
    ordinals 2-5:
        Login, CreateAccount, ListJobs, RequestPermission, CompleteJob: Permit
        ClaimJob: Permit iff the job's level equals the actor's ordinal,
            the availability window is open, and the daily limit is not hit;
            denials in that order: WindowClosed, WrongLevel, TransactionLimit
        ApprovePermission: Permit iff the actor strictly outranks the
            requester, else Deny(NoApproval)
        PostJob: Permit iff an unspent approved grant exists (Deny(NotAdmin)
            otherwise) and the daily limit is not hit
        AssignRole, RevokeRole, ResolveClaims, Backup, Restore: Deny(NotAdmin)

``CompleteJob`` passes the role phase for everyone; the operation itself
still insists the caller is the assignee.
"""
from __future__ import annotations

from dataclasses import dataclass

from .models import Action, Decision, Reason
from .roles import outranks

ADMIN_ORDINAL = 1

# Actions any live session may perform regardless of rank.
_OPEN_TO_ALL = frozenset({
    Action.LOGIN,
    Action.CREATE_ACCOUNT,
    Action.LIST_JOBS,
    Action.REQUEST_PERMISSION,
    Action.COMPLETE_JOB,
})

# Actions reserved to ordinal 1.
_ADMIN_ONLY = frozenset({
    Action.ASSIGN_ROLE,
    Action.REVOKE_ROLE,
    Action.RESOLVE_CLAIMS,
    Action.BACKUP,
    Action.RESTORE,
})


@dataclass(frozen=True)
class MatrixContext:
    """Snapshot of the facts the matrix needs beyond the action itself.

    ``target_level`` is the job's level for ClaimJob and the requester's
    ordinal for ApprovePermission; other actions ignore it.
    """

    target_level: int | None = None
    window_open: bool = True
    under_limit: bool = True
    has_grant: bool = False


def decide(ordinal: int, action: Action, ctx: MatrixContext = MatrixContext()) -> Decision:
    if ordinal == ADMIN_ORDINAL:
        return Decision.permit()

    if action in _OPEN_TO_ALL:
        return Decision.permit()

    if action is Action.CLAIM_JOB:
        if not ctx.window_open:
            return Decision.deny(Reason.WINDOW_CLOSED)
        if ctx.target_level is None or ctx.target_level != ordinal:
            return Decision.deny(Reason.WRONG_LEVEL)
        if not ctx.under_limit:
            return Decision.deny(Reason.TRANSACTION_LIMIT)
        return Decision.permit()

    if action is Action.APPROVE_PERMISSION:
        # target_level carries the requester's ordinal here. With no stated
        # requester, permit anyone who could outrank somebody.
        if ctx.target_level is None:
            if ordinal < 5:
                return Decision.permit()
            return Decision.deny(Reason.NO_APPROVAL)
        if outranks(ordinal, ctx.target_level):
            return Decision.permit()
        return Decision.deny(Reason.NO_APPROVAL)

    if action is Action.POST_JOB:
        if not ctx.has_grant:
            return Decision.deny(Reason.NOT_ADMIN)
        if not ctx.under_limit:
            return Decision.deny(Reason.TRANSACTION_LIMIT)
        return Decision.permit()

    assert action in _ADMIN_ONLY, f"unmapped action {action}"
    return Decision.deny(Reason.NOT_ADMIN)
