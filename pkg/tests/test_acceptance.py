"""Acceptance gate.

Each test covers one acceptance criterion end to end and prints exactly one
``acceptance <name>: PASS|FAIL`` line (run with ``pytest tests/test_acceptance.py -s``
to watch them stream). Criteria with a runtime budget enforce it here.
"""
import itertools
import random
import time
from contextlib import contextmanager
from datetime import datetime, timedelta, timezone

import pytest
from fastapi.testclient import TestClient

from conftest import T0, make_engine
from jobbalance.authz import MatrixContext, decide
from jobbalance.errors import AccessDenied, NotSuperiorError
from jobbalance.journal import Journal
from jobbalance.models import Action, Outcome, Reason
from jobbalance.roles import Role
from jobbalance.server import create_app
from jobbalance.state import replay_events, state_digest, state_to_dict
from jobbalance.timeutil import display
from support import PASSWORD, add_user, scramble

ROLE_BY_ORDINAL = {r.ordinal: r for r in Role}


@contextmanager
def criterion(name: str, budget: float | None = None):
    """Time a criterion body and print its single pass/fail line."""
    info = {"note": ""}
    start = time.perf_counter()
    try:
        yield info
    except BaseException:
        _report(name, "FAIL", time.perf_counter() - start, info["note"])
        raise
    elapsed = time.perf_counter() - start
    if budget is not None and not elapsed < budget:
        _report(name, "FAIL", elapsed, f"over the {budget:.0f}s runtime budget")
        raise AssertionError(f"{name}: {elapsed:.2f}s exceeds the {budget:.0f}s budget")
    _report(name, "PASS", elapsed, info["note"])


def _report(name: str, verdict: str, elapsed: float, note: str) -> None:
    suffix = f" — {note}" if note else ""
    print(f"acceptance {name}: {verdict} ({elapsed:.2f}s){suffix}", flush=True)


def at(day: int, hour: int, minute: int, second: int = 0) -> datetime:
    return datetime(2014, 2, day, hour, minute, second, tzinfo=timezone.utc)


def test_seeded_board_ordering(tmp_path):
    """A historical seven-job seeding lists in level / posting-time order."""
    expected_rows = [
        ("ruhi", "03/02/14 11:50", "Admin", "jkkk", "bjnjmk"),
        ("sa", "02/02/14 17:18", "President", "ggg", "hjhj"),
        ("User1", "02/02/14 14:07", "Manager", "xcvxcv", "xvcxcvx"),
        ("tom", "02/02/14 17:16", "Executive", "bbbbbb", "cfgkk"),
        ("ccc", "02/02/14 17:20", "Executive", "aaaaaa", "ffghj"),
        ("anku", "03/02/14 11:51", "Executive", "hunjmk", "ujh"),
        ("ishan", "03/02/14 11:52", "Executive", "bh", "hbj"),
    ]
    with criterion("seeded-board-ordering", budget=1.0):
        engine = make_engine(tmp_path)
        engine.ensure_bootstrap("ruhi", "rootpass1", now=at(2, 9, 0))
        ruhi = engine.login("ruhi", "rootpass1", now=at(2, 9, 0)).token
        for name in ["sa", "User1", "tom", "ccc", "anku", "ishan"]:
            engine.create_account(name, PASSWORD, now=at(2, 9, 5))
        engine.assign_role(ruhi, "sa", Role.PRESIDENT, now=at(2, 9, 10))
        engine.assign_role(ruhi, "User1", Role.MANAGER, now=at(2, 9, 10))

        def grant_and_post(approver, username, level, job_type, description, login, posted):
            token = engine.login(username, PASSWORD, now=login)
            req = engine.request_permission(token.token, now=login + timedelta(minutes=1))
            engine.approve_permission(approver, req.request_id, now=login + timedelta(minutes=2))
            engine.post_job(token.token, level, job_type, description, now=posted)

        grant_and_post(ruhi, "User1", 4, "xcvxcv", "xvcxcvx", at(2, 13, 0), at(2, 14, 7))
        grant_and_post(ruhi, "tom", 5, "bbbbbb", "cfgkk", at(2, 16, 10), at(2, 17, 16))
        grant_and_post(ruhi, "sa", 2, "ggg", "hjhj", at(2, 16, 0), at(2, 17, 18))
        grant_and_post(ruhi, "ccc", 5, "aaaaaa", "ffghj", at(2, 16, 15), at(2, 17, 20))

        ruhi2 = engine.login("ruhi", "rootpass1", now=at(3, 11, 30)).token
        engine.post_job(ruhi2, 1, "jkkk", "bjnjmk", now=at(3, 11, 50))
        grant_and_post(ruhi2, "anku", 5, "hunjmk", "ujh", at(3, 11, 35), at(3, 11, 51))
        grant_and_post(ruhi2, "ishan", 5, "bh", "hbj", at(3, 11, 40), at(3, 11, 52))

        board = engine.list_jobs(ruhi2, now=at(3, 12, 0))
        rows = [
            (
                job.assigned_by,
                display(job.assigned_on),
                ROLE_BY_ORDINAL[job.target_level].label,
                job.job_type,
                job.description,
            )
            for job in board
        ]
        assert rows == expected_rows


def test_fcfs_oracle_equivalence(tmp_path):
    """1000 randomized claim sets: the engine's winner matches a brute-force pick."""
    with criterion("fcfs-oracle-equivalence", budget=5.0) as info:
        rng = random.Random(2024)
        engine = make_engine(
            tmp_path, session_ttl_seconds=10**9, max_per_day=10**9
        )
        engine.ensure_bootstrap("boss", "rootpass1", now=T0)
        admin = engine.login("boss", "rootpass1", now=T0).token

        groups: dict[int, list[tuple[str, str]]] = {}
        for level in [2, 3, 4, 5]:
            groups[level] = []
            for k in range(20):
                name = f"pl{level}u{k:02d}"
                uid = add_user(engine, admin, name, roles=[ROLE_BY_ORDINAL[level]], now=T0)
                groups[level].append((name, uid))
        floaters = []  # hold the top role permanently; may claim any level
        for k in range(3):
            name = f"adm{k}"
            uid = add_user(engine, admin, name, roles=[Role.ADMIN], now=T0)
            floaters.append((name, uid))

        matches = 0
        for i in range(1000):
            base = T0 + timedelta(minutes=10 * i)
            level = rng.choice([2, 3, 4, 5])
            with_floater = rng.random() < 0.25
            size = rng.randint(1, 18 if with_floater else 20)
            claimants = rng.sample(groups[level], size)
            if with_floater:
                claimants = claimants + rng.sample(floaters, rng.randint(1, 2))

            tokens, logins = {}, {}
            for name, uid in claimants:
                login_at = base + timedelta(seconds=rng.choice([0, 30, 60, 90, 120, 180]))
                tokens[uid] = engine.login(name, PASSWORD, now=login_at).token
                logins[uid] = login_at

            job = engine.post_job(admin, level, "t", "d", now=base + timedelta(minutes=4))
            order = claimants[:]
            rng.shuffle(order)
            for _, uid in order:
                engine.submit_claim(tokens[uid], job.job_id, now=base + timedelta(minutes=5))

            promoted: list[tuple[str, Role]] = []
            if rng.random() < 0.2:
                pool = [(n, u) for n, u in claimants if (n, u) not in floaters]
                for name, uid in rng.sample(pool, min(len(pool), rng.randint(1, 2))):
                    role = ROLE_BY_ORDINAL[rng.randint(1, level - 1)]
                    engine.assign_role(admin, name, role, now=base + timedelta(minutes=6))
                    promoted.append((name, role))

            winner = engine.resolve_claims(
                admin, job.job_id, now=base + timedelta(minutes=7)
            ).winner

            def expected_key(entry):
                name, uid = entry
                priority = 1 if (name, uid) in floaters else level
                for promoted_name, role in promoted:
                    if promoted_name == name:
                        priority = min(priority, role.ordinal)
                return (priority, logins[uid], uid)

            expected_uid = min(claimants, key=expected_key)[1]
            if winner.user_id == expected_uid:
                matches += 1

            for name, role in promoted:
                engine.revoke_role(admin, name, role, now=base + timedelta(minutes=8))

        info["note"] = f"{matches}/1000 winners matched"
        assert matches == 1000


def test_submission_order_independence(tmp_path):
    """Every permutation of a claim set's submission order picks the same winner."""
    with criterion("submission-order-independence", budget=30.0) as info:
        rng = random.Random(7)
        engine = make_engine(
            tmp_path, session_ttl_seconds=10**9, max_per_day=10**9
        )
        engine.ensure_bootstrap("boss", "rootpass1", now=T0)
        admin = engine.login("boss", "rootpass1", now=T0).token

        groups: dict[int, list[tuple[str, str]]] = {}
        for level in [2, 3, 4, 5]:
            groups[level] = [
                (f"pl{level}u{k}", add_user(engine, admin, f"pl{level}u{k}",
                                            roles=[ROLE_BY_ORDINAL[level]], now=T0))
                for k in range(6)
            ]
        floaters = [
            (f"adm{k}", add_user(engine, admin, f"adm{k}", roles=[Role.ADMIN], now=T0))
            for k in range(2)
        ]

        permutations_run = 0
        for i in range(200):
            base = T0 + timedelta(minutes=5 * i)
            level = rng.choice([2, 3, 4, 5])
            if rng.random() < 0.25:
                size = rng.randint(1, 5)
                claimants = rng.sample(groups[level], size) + rng.sample(floaters, 1)
            else:
                claimants = rng.sample(groups[level], rng.randint(1, 6))

            tokens = {}
            for name, uid in claimants:
                login_at = base + timedelta(seconds=rng.choice([0, 60, 120]))
                tokens[uid] = engine.login(name, PASSWORD, now=login_at).token

            winner_ids = set()
            for perm in itertools.permutations(range(len(claimants))):
                job = engine.post_job(admin, level, "t", "d", now=base + timedelta(minutes=3))
                for index in perm:
                    engine.submit_claim(
                        tokens[claimants[index][1]], job.job_id,
                        now=base + timedelta(minutes=4),
                    )
                winner = engine.resolve_claims(
                    admin, job.job_id, now=base + timedelta(minutes=4, seconds=30)
                ).winner
                winner_ids.add(winner.user_id)
                permutations_run += 1
            assert len(winner_ids) == 1, f"set {i} winners diverged: {winner_ids}"

        info["note"] = f"{permutations_run} permutations across 200 sets"


def test_authorization_matrix(tmp_path):
    """All 5 ordinals over all 13 actions match the frozen decision table."""
    open_to_all = {
        Action.LOGIN, Action.CREATE_ACCOUNT, Action.LIST_JOBS,
        Action.REQUEST_PERMISSION, Action.COMPLETE_JOB,
    }
    admin_only = {
        Action.ASSIGN_ROLE, Action.REVOKE_ROLE, Action.RESOLVE_CLAIMS,
        Action.BACKUP, Action.RESTORE,
    }
    with criterion("authorization-matrix") as info:
        checked = 0
        for ordinal in [1, 2, 3, 4, 5]:
            for action in Action:
                ctx = MatrixContext(target_level=ordinal if action is Action.CLAIM_JOB else None)
                decision = decide(ordinal, action, ctx)
                if ordinal == 1 or action in open_to_all or action is Action.CLAIM_JOB:
                    expected = (Outcome.PERMIT, Reason.OK)
                elif action in admin_only or action is Action.POST_JOB:
                    expected = (Outcome.DENY, Reason.NOT_ADMIN)
                elif action is Action.APPROVE_PERMISSION:
                    expected = (
                        (Outcome.PERMIT, Reason.OK)
                        if ordinal < 5
                        else (Outcome.DENY, Reason.NO_APPROVAL)
                    )
                else:  # pragma: no cover - every action is categorized above
                    raise AssertionError(f"uncategorized action {action}")
                assert (decision.outcome, decision.reason) == expected, (
                    f"ordinal {ordinal} / {action.value}: got "
                    f"({decision.outcome.value}, {decision.reason.value})"
                )
                checked += 1

        # The canonical scenario: an executive cannot post, an admin can.
        engine = make_engine(tmp_path)
        engine.ensure_bootstrap("boss", "rootpass1", now=T0)
        admin = engine.login("boss", "rootpass1", now=T0).token
        add_user(engine, admin, "worker", now=T0)
        worker = engine.login("worker", PASSWORD, now=T0).token
        with pytest.raises(AccessDenied) as denied:
            engine.post_job(worker, 5, "t", "d", now=T0)
        assert denied.value.decision.reason is Reason.NOT_ADMIN
        posted = engine.post_job(admin, 5, "t", "d", now=T0)
        assert posted.job_id in {j.job_id for j in engine.list_jobs(admin, now=T0)}
        info["note"] = f"{checked} matrix cells plus the post-job scenario"


def test_hierarchical_approval(tmp_path):
    """Strict-superior approval, and an approved grant is good for one post only."""
    with criterion("hierarchical-approval"):
        engine = make_engine(tmp_path)
        engine.ensure_bootstrap("boss", "rootpass1", now=T0)
        admin = engine.login("boss", "rootpass1", now=T0).token
        add_user(engine, admin, "mgr", roles=[Role.MANAGER], now=T0)
        add_user(engine, admin, "exec1", now=T0)
        add_user(engine, admin, "exec2", now=T0)
        mgr = engine.login("mgr", PASSWORD, now=T0).token
        exec1 = engine.login("exec1", PASSWORD, now=T0).token
        exec2 = engine.login("exec2", PASSWORD, now=T0).token

        # Manager approving an executive's request succeeds.
        req = engine.request_permission(exec1, now=T0)
        approved = engine.approve_permission(mgr, req.request_id, now=T0)
        assert approved.status.value == "Approved"

        # An executive approving a peer executive fails.
        peer_req = engine.request_permission(exec2, now=T0)
        with pytest.raises(NotSuperiorError):
            engine.approve_permission(exec1, peer_req.request_id, now=T0)

        # The approved grant unlocks exactly one post.
        engine.post_job(exec1, 5, "t", "first", now=T0 + timedelta(minutes=1))
        with pytest.raises(AccessDenied) as denied:
            engine.post_job(exec1, 5, "t", "second", now=T0 + timedelta(minutes=2))
        assert denied.value.decision.reason is Reason.NOT_ADMIN


def test_backup_round_trip(tmp_path):
    """restore(backup(S)) reproduces S for 100 randomized states."""
    with criterion("backup-round-trip", budget=10.0) as info:
        rng = random.Random(99)
        for case in range(100):
            source = make_engine(tmp_path / f"src{case}", session_ttl_seconds=10**9)
            source.ensure_bootstrap("boss", "rootpass1", now=T0)
            admin = source.login("boss", "rootpass1", now=T0).token
            scramble(source, admin, rng, T0)
            backup_path = tmp_path / f"b{case}.xml"
            source.backup(admin, backup_path, now=T0 + timedelta(hours=12))

            target = make_engine(tmp_path / f"dst{case}", session_ttl_seconds=10**9)
            target.ensure_bootstrap("boss", "rootpass1", now=T0)
            other = target.login("boss", "rootpass1", now=T0).token
            target.restore(other, backup_path, now=T0 + timedelta(hours=13))

            assert target.canonical_state() == source.canonical_state(), f"case {case}"
            assert target.state_digest() == source.state_digest()
        info["note"] = "100/100 states matched field-by-field"


def test_replay_determinism(tmp_path):
    """50 random journals replay to the same canonical hash twice over."""
    with criterion("replay-determinism") as info:
        rng = random.Random(41)
        for case in range(50):
            engine = make_engine(tmp_path / f"case{case}", session_ttl_seconds=10**9)
            engine.ensure_bootstrap("boss", "rootpass1", now=T0)
            admin = engine.login("boss", "rootpass1", now=T0).token
            scramble(engine, admin, rng, T0)

            events = Journal(engine.data_dir / "journal.ndjson", fsync=False).load()
            first = state_digest(replay_events(events))
            second = state_digest(replay_events(events))
            assert first == second, f"journal {case} diverged between passes"
            assert first == engine.state_digest(), f"journal {case} diverged from live"
        info["note"] = "50/50 journals stable"


def test_transaction_restriction(tmp_path):
    """With a 3-per-day cap the 4th counted action is denied until midnight."""
    with criterion("transaction-restriction"):
        engine = make_engine(tmp_path, max_per_day=3)
        engine.ensure_bootstrap("boss", "rootpass1", now=T0)
        clock = {"now": T0}
        with TestClient(create_app(engine, clock=lambda: clock["now"])) as client:
            admin = client.post(
                "/login", json={"username": "boss", "password": "rootpass1"}
            ).json()["token"]
            headers = {"Authorization": f"Bearer {admin}"}
            client.post("/accounts", json={"username": "eve", "password": PASSWORD})
            eve = client.post(
                "/login", json={"username": "eve", "password": PASSWORD}
            ).json()["token"]
            eve_headers = {"Authorization": f"Bearer {eve}"}

            # The admin posts five jobs: posting is counted, yet an admin is
            # never denied, so sailing past the cap here is itself a check.
            jobs = [
                client.post(
                    "/jobs",
                    json={"level": 5, "type": "t", "description": f"job {n}"},
                    headers=headers,
                ).json()["job_id"]
                for n in range(5)
            ]

            for job_id in jobs[:3]:
                assert (
                    client.post(f"/jobs/{job_id}/claim", headers=eve_headers).status_code
                    == 201
                )

            # Fourth counted action in the same UTC day: denied at both layers.
            over_cap = client.post(f"/jobs/{jobs[3]}/claim", headers=eve_headers)
            assert over_cap.status_code == 429
            assert over_cap.json()["reason"] == "TransactionLimit"
            with pytest.raises(AccessDenied) as denied:
                engine.submit_claim(eve, jobs[3], now=clock["now"])
            assert denied.value.decision.reason is Reason.TRANSACTION_LIMIT

            # First counted action after the UTC midnight boundary succeeds.
            clock["now"] = datetime(2014, 2, 3, 0, 0, 1, tzinfo=timezone.utc)
            eve = client.post(
                "/login", json={"username": "eve", "password": PASSWORD}
            ).json()["token"]
            response = client.post(
                f"/jobs/{jobs[3]}/claim",
                headers={"Authorization": f"Bearer {eve}"},
            )
            assert response.status_code == 201


def test_availability_windows(tmp_path):
    """Claims straddling the window edges: deny, permit, deny."""
    with criterion("availability-windows"):
        engine = make_engine(tmp_path)
        engine.ensure_bootstrap("boss", "rootpass1", now=T0)
        admin = engine.login("boss", "rootpass1", now=T0).token
        for name in ["early", "ontime", "late"]:
            add_user(engine, admin, name, now=T0)
        opens, closes = T0 + timedelta(hours=2), T0 + timedelta(hours=3)
        from jobbalance.models import AvailabilityWindow

        job = engine.post_job(
            admin, 5, "t", "d",
            window=AvailabilityWindow(opens_at=opens, closes_at=closes), now=T0,
        )

        early = engine.login("early", PASSWORD, now=T0).token
        with pytest.raises(AccessDenied) as denied:
            engine.submit_claim(early, job.job_id, now=opens - timedelta(seconds=1))
        assert denied.value.decision.reason is Reason.WINDOW_CLOSED

        ontime = engine.login("ontime", PASSWORD, now=T0).token
        claim = engine.submit_claim(ontime, job.job_id, now=opens + timedelta(minutes=30))
        assert claim.sequence == 1

        late = engine.login("late", PASSWORD, now=T0).token
        with pytest.raises(AccessDenied) as denied:
            engine.submit_claim(late, job.job_id, now=closes + timedelta(seconds=1))
        assert denied.value.decision.reason is Reason.WINDOW_CLOSED
