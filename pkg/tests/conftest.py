from __future__ import annotations

from datetime import datetime, timezone

import pytest

from jobbalance.engine import Engine

# A fixed instant well away from any day boundary; tests that care about
# midnight build their own datetimes.
T0 = datetime(2014, 2, 2, 9, 0, tzinfo=timezone.utc)

ADMIN_NAME = "boss"
ADMIN_PASS = "rootpass1"


def make_engine(tmp_path, **overrides) -> Engine:
    """Engine tuned for tests: cheap hashing, no fsync."""
    settings = dict(hash_iterations=1, fsync=False)
    settings.update(overrides)
    return Engine(tmp_path / "data", **settings)


@pytest.fixture
def engine(tmp_path) -> Engine:
    return make_engine(tmp_path)


@pytest.fixture
def admin_token(engine) -> str:
    engine.ensure_bootstrap(ADMIN_NAME, ADMIN_PASS, now=T0)
    return engine.login(ADMIN_NAME, ADMIN_PASS, now=T0).token
