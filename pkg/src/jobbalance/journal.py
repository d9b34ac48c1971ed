"""Append-only event journal.

The journal is the system of record: one JSON object per line, in the shape

    {"sequence": 1, "occurred_at": "2014-02-03T11:50:00.000Z",
     "kind": "AccountCreated", "payload": {...}}

Sequences start at 1 and are gapless; readers verify that and fail loudly on
a gap or a corrupt line rather than guessing. Writes flush on every append
and fsync by default (callers that can afford to lose the tail on a crash,
such as test rigs, may turn fsync off).
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path

from .errors import GapDetectedError, StorageFailureError, UnknownEventKindError
from .timeutil import parse_iso, to_iso


class EventKind(Enum):
    ACCOUNT_CREATED = "AccountCreated"
    ROLE_ASSIGNED = "RoleAssigned"
    ROLE_REVOKED = "RoleRevoked"
    SESSION_OPENED = "SessionOpened"
    JOB_POSTED = "JobPosted"
    CLAIM_SUBMITTED = "ClaimSubmitted"
    CLAIMS_RESOLVED = "ClaimsResolved"
    JOB_COMPLETED = "JobCompleted"
    PERMISSION_REQUESTED = "PermissionRequested"
    PERMISSION_APPROVED = "PermissionApproved"
    BACKUP_TAKEN = "BackupTaken"
    STATE_RESTORED = "StateRestored"


@dataclass(frozen=True)
class JournalEvent:
    sequence: int
    occurred_at: datetime
    kind: EventKind
    payload: dict


class Journal:
    """Single-writer journal file; the engine serializes appends externally."""

    def __init__(self, path: Path | str, *, fsync: bool = True):
        self.path = Path(path)
        self._fsync = fsync
        self._last = 0

    @property
    def last_sequence(self) -> int:
        return self._last

    def load(self) -> list[JournalEvent]:
        """Read and validate the whole journal; remembers the last sequence."""
        events: list[JournalEvent] = []
        if not self.path.exists():
            self._last = 0
            return events
        try:
            with self.path.open("r", encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    events.append(_decode_line(line, lineno))
        except OSError as exc:
            raise StorageFailureError(f"cannot read journal: {exc}") from exc
        _check_gapless(events)
        self._last = events[-1].sequence if events else 0
        return events

    def append(self, kind: EventKind, payload: dict, occurred_at: datetime) -> JournalEvent:
        event = JournalEvent(self._last + 1, occurred_at, kind, payload)
        self.append_event(event)
        return event

    def append_event(self, event: JournalEvent) -> None:
        if event.sequence != self._last + 1:
            raise GapDetectedError(
                f"event sequence {event.sequence} does not follow {self._last}"
            )
        line = json.dumps(
            {
                "sequence": event.sequence,
                "occurred_at": to_iso(event.occurred_at),
                "kind": event.kind.value,
                "payload": event.payload,
            },
            separators=(",", ":"),
            sort_keys=True,
        )
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
                if self._fsync:
                    os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageFailureError(f"cannot append to journal: {exc}") from exc
        self._last = event.sequence


def _decode_line(line: str, lineno: int) -> JournalEvent:
    try:
        raw = json.loads(line)
        kind_text = raw["kind"]
        try:
            kind = EventKind(kind_text)
        except ValueError:
            raise UnknownEventKindError(f"line {lineno}: unknown kind {kind_text!r}") from None
        return JournalEvent(
            sequence=int(raw["sequence"]),
            occurred_at=parse_iso(raw["occurred_at"]),
            kind=kind,
            payload=raw["payload"],
        )
    except UnknownEventKindError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise StorageFailureError(f"corrupt journal line {lineno}: {exc}") from exc


def _check_gapless(events: list[JournalEvent]) -> None:
    for index, event in enumerate(events, start=1):
        if event.sequence != index:
            raise GapDetectedError(
                f"journal gap: expected sequence {index}, found {event.sequence}"
            )
