"""Command line interface.

Local verbs (init, serve, replay-check) work on a data directory. The rest
talk to a running service over HTTP, authenticated by a bearer token from
``login``. Flags fall back to environment variables:

    --config      JOBBALANCE_CONFIG
    --data-dir    JOBBALANCE_DATA_DIR
    --server-url  JOBBALANCE_SERVER_URL
    --token       JOBBALANCE_TOKEN
    --output      JOBBALANCE_OUTPUT      (table or json)

Exit status: 0 on success, 1 on a service or engine error, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import httpx

from .config import ServiceConfig, load_config
from .engine import Engine
from .errors import EngineError
from .journal import Journal
from .roles import Role
from .state import replay_events, state_digest
from .timeutil import display, parse_iso

_TABLE_COLUMNS = [
    "S.No",
    "Assigned By",
    "Assigned On",
    "Assigned Person Level",
    "Job Type",
    "Job Description",
    "State",
    "Job Id",
]


def main(argv: list[str] | None = None) -> int:
    return run(argv)


def run(argv: list[str] | None = None, *, client: httpx.Client | None = None) -> int:
    """Entry point; tests may inject a ready httpx.Client for HTTP verbs."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    owned = None
    if args.http and client is None:
        client = owned = httpx.Client(base_url=args.server_url, timeout=30.0)
    if args.http and args.token:
        client.headers["Authorization"] = f"Bearer {args.token}"
    try:
        return args.func(args, client)
    except EngineError as exc:
        print(f"error: {exc.code}: {exc.message}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        return 1
    finally:
        if owned is not None:
            owned.close()


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jobbalance")
    parser.add_argument("--config", default=os.environ.get("JOBBALANCE_CONFIG"))
    parser.add_argument("--data-dir", default=os.environ.get("JOBBALANCE_DATA_DIR"))
    parser.add_argument(
        "--server-url",
        default=os.environ.get("JOBBALANCE_SERVER_URL", "http://127.0.0.1:8080"),
    )
    parser.add_argument("--token", default=os.environ.get("JOBBALANCE_TOKEN"))
    parser.add_argument(
        "--output",
        choices=["table", "json"],
        default=os.environ.get("JOBBALANCE_OUTPUT", "table"),
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("init", help="create the data directory and bootstrap admin")
    p.set_defaults(func=_cmd_init, http=False)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=_cmd_serve, http=False)

    p = sub.add_parser("replay-check", help="verify the journal replays deterministically")
    p.set_defaults(func=_cmd_replay_check, http=False)

    p = sub.add_parser("login", help="obtain a bearer token")
    p.add_argument("username")
    p.add_argument("--password", required=True)
    p.set_defaults(func=_cmd_login, http=True)

    p = sub.add_parser("add-user", help="create an account")
    p.add_argument("username")
    p.add_argument("--password", required=True)
    p.set_defaults(func=_cmd_add_user, http=True)

    p = sub.add_parser("assign-role", help="grant a role (admin)")
    p.add_argument("username")
    p.add_argument("role", choices=[r.label for r in Role])
    p.set_defaults(func=_cmd_assign_role, http=True)

    p = sub.add_parser("post-job", help="post a job to the board")
    p.add_argument("--level", type=int, required=True, choices=[1, 2, 3, 4, 5])
    p.add_argument("--type", required=True, dest="job_type")
    p.add_argument("--description", default="")
    p.add_argument("--opens-at", help="availability window start, ISO 8601")
    p.add_argument("--closes-at", help="availability window end, ISO 8601")
    p.set_defaults(func=_cmd_post_job, http=True)

    p = sub.add_parser("list-jobs", help="show the board")
    p.set_defaults(func=_cmd_list_jobs, http=True)

    p = sub.add_parser("claim", help="claim a job")
    p.add_argument("job_id")
    p.set_defaults(func=_cmd_claim, http=True)

    p = sub.add_parser("resolve", help="resolve a job's claim queue (admin)")
    p.add_argument("job_id", nargs="?")
    p.add_argument("--all", action="store_true", help="resolve every open job with claims")
    p.set_defaults(func=_cmd_resolve, http=True)

    p = sub.add_parser("backup", help="write an XML backup on the server (admin)")
    p.add_argument("path")
    p.set_defaults(func=_cmd_backup, http=True)

    p = sub.add_parser("restore", help="restore service state from an XML backup (admin)")
    p.add_argument("path")
    p.set_defaults(func=_cmd_restore, http=True)

    return parser


# -- local verbs --------------------------------------------------------------


def _service_config(args) -> ServiceConfig:
    cfg = load_config(args.config)
    if args.data_dir:
        cfg = replace(cfg, data_dir=Path(args.data_dir))
    return cfg


def _cmd_init(args, client) -> int:
    cfg = _service_config(args)
    if not cfg.admin_password:
        print(
            "error: no admin_password configured; set it in the config file "
            "or JOBBALANCE_ADMIN_PASSWORD",
            file=sys.stderr,
        )
        return 1
    engine = _engine_from(cfg)
    created = engine.ensure_bootstrap(cfg.admin_username, cfg.admin_password)
    if created is None:
        print(f"data directory {cfg.data_dir} already initialized")
    else:
        print(f"initialized {cfg.data_dir}; admin account {created.username!r} ready")
    return 0


def _cmd_serve(args, client) -> int:
    import uvicorn

    from .server import create_app

    cfg = _service_config(args)
    engine = _engine_from(cfg)
    if cfg.admin_password:
        engine.ensure_bootstrap(cfg.admin_username, cfg.admin_password)
    app = create_app(engine, ui_dir=cfg.ui_dir)
    uvicorn.run(app, host=args.host or cfg.host, port=args.port or cfg.port)
    return 0


def _cmd_replay_check(args, client) -> int:
    cfg = _service_config(args)
    journal = Journal(Path(cfg.data_dir) / "journal.ndjson", fsync=False)
    events = journal.load()
    first = state_digest(replay_events(events))
    second = state_digest(replay_events(events))
    print(f"events: {len(events)}")
    print(f"digest: {first}")
    if first != second:
        print("replay mismatch: digests differ between passes", file=sys.stderr)
        return 1
    print("replay deterministic")
    return 0


def _engine_from(cfg: ServiceConfig) -> Engine:
    return Engine(
        cfg.data_dir,
        session_ttl_seconds=cfg.session_ttl_seconds,
        max_per_day=cfg.max_per_day,
        hash_iterations=cfg.hash_iterations,
        fsync=cfg.fsync,
    )


# -- HTTP verbs ---------------------------------------------------------------


def _call(client: httpx.Client, method: str, path: str, body: dict | None = None) -> dict:
    response = client.request(method, path, json=body)
    if response.status_code >= 400:
        payload = _json_or_text(response)
        code = payload.get("code", str(response.status_code))
        reason = payload.get("reason")
        message = payload.get("message", "")
        detail = f" ({reason})" if reason else ""
        raise EngineError(f"{code}{detail}: {message}".strip())
    return _json_or_text(response)


def _json_or_text(response: httpx.Response) -> dict:
    try:
        return response.json()
    except ValueError:
        return {"message": response.text}


def _emit(args, payload: dict) -> None:
    if args.output == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for key, value in payload.items():
            print(f"{key}: {value}")


def _cmd_login(args, client) -> int:
    result = _call(
        client, "POST", "/login", {"username": args.username, "password": args.password}
    )
    if args.output == "json":
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        print(result["token"])
    return 0


def _cmd_add_user(args, client) -> int:
    result = _call(
        client, "POST", "/accounts", {"username": args.username, "password": args.password}
    )
    _emit(args, result)
    return 0


def _cmd_assign_role(args, client) -> int:
    result = _call(
        client, "POST", "/roles/assign", {"username": args.username, "role": args.role}
    )
    _emit(args, result)
    return 0


def _cmd_post_job(args, client) -> int:
    if bool(args.opens_at) != bool(args.closes_at):
        print("error: --opens-at and --closes-at go together", file=sys.stderr)
        return 2
    body = {
        "level": args.level,
        "type": args.job_type,
        "description": args.description,
    }
    if args.opens_at:
        try:
            body["window"] = {
                "opens_at": parse_iso(args.opens_at).isoformat(),
                "closes_at": parse_iso(args.closes_at).isoformat(),
            }
        except ValueError as exc:
            print(f"error: bad timestamp: {exc}", file=sys.stderr)
            return 2
    result = _call(client, "POST", "/jobs", body)
    _emit(args, result)
    return 0


def _cmd_list_jobs(args, client) -> int:
    result = _call(client, "GET", "/jobs")
    if args.output == "json":
        print(json.dumps(result, indent=2, sort_keys=True))
        return 0
    rows = []
    for job in result["jobs"]:
        rows.append(
            [
                str(job["s_no"]),
                job["assigned_by"],
                display(parse_iso(job["assigned_on"])),
                job["level_label"],
                job["type"],
                job["description"],
                job["state"],
                job["job_id"],
            ]
        )
    _print_table(_TABLE_COLUMNS, rows)
    return 0


def _cmd_claim(args, client) -> int:
    result = _call(client, "POST", f"/jobs/{args.job_id}/claim")
    _emit(args, result)
    return 0


def _cmd_resolve(args, client) -> int:
    if bool(args.job_id) == args.all:
        print("error: give a job id or --all, not both or neither", file=sys.stderr)
        return 2
    if args.job_id:
        return _resolve_one(args, client, args.job_id)
    jobs = _call(client, "GET", "/jobs")["jobs"]
    resolved_any = False
    for job in jobs:
        if job["state"] != "Open" or not job.get("claims"):
            continue
        _resolve_one(args, client, job["job_id"])
        resolved_any = True
    if not resolved_any:
        print("nothing to resolve")
    return 0


def _resolve_one(args, client: httpx.Client, job_id: str) -> int:
    result = _call(client, "POST", f"/jobs/{job_id}/resolve")
    if result["outcome"] == "NoClaims":
        print(f"{job_id}: NoClaims")
        return 1
    winner = result["winner"]["username"]
    print(f"{job_id}: assigned to {winner}")
    return 0


def _cmd_backup(args, client) -> int:
    result = _call(client, "POST", "/admin/backup", {"path": args.path})
    _emit(args, result)
    return 0


def _cmd_restore(args, client) -> int:
    result = _call(client, "POST", "/admin/restore", {"path": args.path})
    _emit(args, result)
    print("note: all sessions were invalidated; log in again", file=sys.stderr)
    return 0


def _print_table(columns: list[str], rows: list[list[str]]) -> None:
    widths = [len(c) for c in columns]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    line = "  ".join(col.ljust(widths[i]) for i, col in enumerate(columns))
    print(line)
    print("  ".join("-" * w for w in widths))
    for row in rows:
        print("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))


if __name__ == "__main__":
    sys.exit(main())
