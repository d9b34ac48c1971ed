"""Time helpers.

Every timestamp the engine stores is timezone-aware UTC truncated to whole
milliseconds, so journal and backup round trips reproduce values exactly.
Display output uses the two-digit day/month/year form the board tables show.
"""
from __future__ import annotations

from datetime import datetime, timezone

DISPLAY_FORMAT = "%d/%m/%y %H:%M"


def utc_now() -> datetime:
    return normalize(datetime.now(timezone.utc))


def normalize(value: datetime) -> datetime:
    """Coerce to UTC and truncate to millisecond precision.

    Naive datetimes are taken to already be UTC; operators typing timestamps
    by hand should not need to spell out an offset.
    """
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    value = value.astimezone(timezone.utc)
    return value.replace(microsecond=(value.microsecond // 1000) * 1000)


def to_iso(value: datetime) -> str:
    # Canonical form: millisecond precision, trailing Z.
    return normalize(value).isoformat(timespec="milliseconds").replace("+00:00", "Z")


def parse_iso(text: str) -> datetime:
    # datetime.fromisoformat on 3.10 rejects a trailing Z.
    if text.endswith("Z") or text.endswith("z"):
        text = text[:-1] + "+00:00"
    return normalize(datetime.fromisoformat(text))


def display(value: datetime) -> str:
    return normalize(value).strftime(DISPLAY_FORMAT)
