"""Service configuration.

Sources, later wins: built-in defaults, a JSON config file, then environment
variables prefixed ``JOBBALANCE_``. The config file is a flat JSON object
using the field names below; unknown keys are rejected so typos fail fast.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

ENV_PREFIX = "JOBBALANCE_"


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    data_dir: Path = Path("data")
    session_ttl_seconds: int = 8 * 3600
    max_per_day: int = 50
    hash_iterations: int = 120_000
    fsync: bool = True
    admin_username: str = "admin"
    admin_password: str | None = None
    ui_dir: Path | None = None


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def load_config(
    path: Path | str | None = None, env: Mapping[str, str] | None = None
) -> ServiceConfig:
    env = os.environ if env is None else env
    values: dict = {}

    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValueError("config file must hold a JSON object")
        known = {f.name for f in fields(ServiceConfig)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(raw)

    for f in fields(ServiceConfig):
        env_key = ENV_PREFIX + f.name.upper()
        if env_key in env:
            values[f.name] = env[env_key]

    return ServiceConfig(**{k: _coerce(k, v) for k, v in values.items()})


def _coerce(name: str, value):
    if value is None:
        return None
    if name in ("port", "session_ttl_seconds", "max_per_day", "hash_iterations"):
        return int(value)
    if name == "fsync":
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in _BOOL_TRUE:
            return True
        if text in _BOOL_FALSE:
            return False
        raise ValueError(f"cannot read {value!r} as a boolean")
    if name in ("data_dir", "ui_dir"):
        return Path(value)
    return str(value)
