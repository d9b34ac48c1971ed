"""Role lattice.

Five fixed roles ranked by ordinal; a smaller ordinal outranks a larger one:

    1  Admin        owns the board, resolves claims, takes backups
    2  President
    3  GM
    4  Manager
    5  Executive    the usual claimants

An account may hold several roles at once. Its effective priority is the
strongest (smallest) ordinal among them, so adding a role can only improve
priority and revoking one can only weaken it. An account with no roles has no
defined priority; callers must keep at least one role on every account.
"""
from __future__ import annotations

from enum import Enum
from typing import Iterable

from .errors import EmptyRoleSetError


class Role(Enum):
    ADMIN = 1
    PRESIDENT = 2
    GM = 3
    MANAGER = 4
    EXECUTIVE = 5

    @property
    def ordinal(self) -> int:
        return self.value

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def from_label(cls, text: str) -> "Role":
        try:
            return _BY_LABEL[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown role: {text!r}") from None


_LABELS = {
    Role.ADMIN: "Admin",
    Role.PRESIDENT: "President",
    Role.GM: "GM",
    Role.MANAGER: "Manager",
    Role.EXECUTIVE: "Executive",
}

_BY_LABEL = {label.lower(): role for role, label in _LABELS.items()}


def effective_priority(roles: Iterable[Role]) -> int:
    """Strongest ordinal held; order and duplicates do not matter."""
    held = set(roles)
    if not held:
        raise EmptyRoleSetError("account holds no roles")
    return min(role.value for role in held)


def outranks(approver_ordinal: int, other_ordinal: int) -> bool:
    # Strict: equal rank never outranks, Admin over Admin included.
    return approver_ordinal < other_ordinal
