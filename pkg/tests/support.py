"""Shared helpers for building populated engines in tests."""
from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from jobbalance.engine import Engine
from jobbalance.models import AvailabilityWindow
from jobbalance.roles import Role

PASSWORD = "password1"


def add_user(
    engine: Engine,
    admin_token: str,
    username: str,
    *,
    roles: list[Role] | None = None,
    now: datetime,
) -> str:
    """Create an account, promote it to the given roles, return its user id."""
    account = engine.create_account(username, PASSWORD, now=now)
    for role in roles or []:
        if role is not Role.EXECUTIVE:
            engine.assign_role(admin_token, username, role, now=now)
    return account.user_id


def login(engine: Engine, username: str, now: datetime) -> str:
    return engine.login(username, PASSWORD, now=now).token


def scramble(engine: Engine, admin_token: str, rng: random.Random, now: datetime) -> None:
    """Drive a random burst of commands; used to build arbitrary states."""
    t = now
    usernames: list[str] = []
    tokens: dict[str, str] = {}
    jobs: list[str] = []
    requests: list[str] = []

    for step in range(rng.randint(10, 40)):
        t = t + timedelta(seconds=rng.randint(1, 900))
        roll = rng.random()
        if roll < 0.25 or not usernames:
            name = f"user{rng.randrange(10**9)}"
            roles = rng.sample(list(Role), k=rng.randint(1, 2))
            add_user(engine, admin_token, name, roles=roles, now=t)
            usernames.append(name)
            tokens[name] = login(engine, name, t)
        elif roll < 0.45:
            window = None
            if rng.random() < 0.4:
                opens = t - timedelta(hours=rng.randint(0, 5))
                window = AvailabilityWindow(
                    opens_at=opens, closes_at=opens + timedelta(hours=rng.randint(1, 48))
                )
            job = engine.post_job(
                admin_token,
                rng.randint(1, 5),
                f"type{rng.randrange(100)}",
                f"desc {rng.randrange(1000)}",
                window=window,
                now=t,
            )
            jobs.append(job.job_id)
        elif roll < 0.65 and jobs:
            name = rng.choice(usernames)
            try:
                engine.submit_claim(tokens[name], rng.choice(jobs), now=t)
            except Exception:
                pass  # wrong level, closed window, duplicates: all fine here
        elif roll < 0.75 and jobs:
            try:
                engine.resolve_claims(admin_token, rng.choice(jobs), now=t)
            except Exception:
                pass
        elif roll < 0.9:
            name = rng.choice(usernames)
            request = engine.request_permission(tokens[name], now=t)
            requests.append(request.request_id)
            if rng.random() < 0.6:
                try:
                    engine.approve_permission(admin_token, request.request_id, now=t)
                except Exception:
                    pass  # requester may itself hold the top role
        else:
            name = rng.choice(usernames)
            role = rng.choice(list(Role))
            engine.assign_role(admin_token, name, role, now=t)


def aware(year, month, day, hour=0, minute=0, second=0) -> datetime:
    return datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc)
