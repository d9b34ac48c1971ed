"""Role-gated job board with first-come-first-served claim resolution.

Accounts hold ranked roles; jobs target a role level; eligible claimants
queue up and an admin resolves each queue to the strongest, earliest-login
claimant. Everything the service does is an event in an append-only journal,
so state replays deterministically and snapshots round-trip through XML.
"""
from .authz import MatrixContext, decide
from .engine import Engine
from .models import Action, Decision, Outcome, Reason
from .roles import Role, effective_priority

__version__ = "0.1.0"

__all__ = [
    "Action",
    "Decision",
    "Engine",
    "MatrixContext",
    "Outcome",
    "Reason",
    "Role",
    "decide",
    "effective_priority",
    "__version__",
]
