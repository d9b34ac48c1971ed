"""XML backup documents.

A backup is a complete snapshot of persistent state in one XML file:

    <backup format_version="1" taken_at="...">
      <accounts>
        <account user_id=".." username=".." credential=".." created_at=".."
                 tx_count=".." tx_day="..">
          <role>Admin</role>
        </account>
      </accounts>
      <jobs>
        <job job_id=".." assigned_by=".." assigned_on=".." target_level=".."
             state=".." claimed_by="..">
          <type>...</type>
          <description>...</description>
          <window opens_at=".." closes_at=".."/>
          <claims>
            <claim user_id=".." login_time=".." submitted_at=".." sequence=".."/>
          </claims>
        </job>
      </jobs>
      <requests>
        <request request_id=".." requester=".." action=".." status=".."
                 approver=".." requested_at=".." spent=".."/>
      </requests>
    </backup>

Optional values (window, claimed_by, approver, tx_day) are simply absent.
Sessions are never written; a restore starts everyone logged out. Reading
validates the declared format_version and fails with ParseError before any
caller state is touched.
"""
from __future__ import annotations

import os
import tempfile
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path

from .errors import BackupParseError, StorageFailureError, UnsupportedVersionError
from .models import (
    AvailabilityWindow,
    ClaimRequest,
    Job,
    JobState,
    PermissionRequest,
    RequestStatus,
)
from .models import Action, UserAccount
from .roles import Role
from .state import EngineState
from .timeutil import parse_iso, to_iso

FORMAT_VERSION = 1


@dataclass(frozen=True)
class BackupDocument:
    format_version: int
    taken_at: datetime
    state: EngineState


def write_backup(doc: BackupDocument, path: Path | str) -> None:
    """Serialize and write atomically (temp file then rename)."""
    root = _to_element(doc)
    ET.indent(root)
    body = ET.tostring(root, encoding="unicode", xml_declaration=True)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(body + "\n")
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise StorageFailureError(f"cannot write backup: {exc}") from exc


def read_backup(path: Path | str) -> BackupDocument:
    try:
        tree = ET.parse(path)
    except OSError as exc:
        raise StorageFailureError(f"cannot read backup: {exc}") from exc
    except ET.ParseError as exc:
        raise BackupParseError(f"malformed backup XML: {exc}") from exc
    root = tree.getroot()
    if root.tag != "backup":
        raise BackupParseError(f"unexpected root element {root.tag!r}")
    try:
        version = int(root.attrib["format_version"])
    except (KeyError, ValueError) as exc:
        raise BackupParseError("missing or bad format_version") from exc
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported backup format_version {version}")
    try:
        return _from_element(root, version)
    except (KeyError, ValueError, AttributeError) as exc:
        raise BackupParseError(f"bad backup content: {exc}") from exc


def _to_element(doc: BackupDocument) -> ET.Element:
    state = doc.state
    root = ET.Element(
        "backup",
        format_version=str(doc.format_version),
        taken_at=to_iso(doc.taken_at),
    )

    accounts = ET.SubElement(root, "accounts")
    for account in state.accounts.values():
        attrs = {
            "user_id": account.user_id,
            "username": account.username,
            "credential": account.credential,
            "created_at": to_iso(account.created_at),
            "tx_count": str(account.tx_count),
        }
        if account.tx_day is not None:
            attrs["tx_day"] = account.tx_day.isoformat()
        el = ET.SubElement(accounts, "account", attrs)
        for role in sorted(account.roles, key=lambda r: r.value):
            ET.SubElement(el, "role").text = role.label

    jobs = ET.SubElement(root, "jobs")
    for job in state.jobs.values():
        attrs = {
            "job_id": job.job_id,
            "assigned_by": job.assigned_by,
            "assigned_on": to_iso(job.assigned_on),
            "target_level": str(job.target_level),
            "state": job.state.value,
        }
        if job.claimed_by is not None:
            attrs["claimed_by"] = job.claimed_by
        el = ET.SubElement(jobs, "job", attrs)
        ET.SubElement(el, "type").text = job.job_type
        ET.SubElement(el, "description").text = job.description
        if job.window is not None:
            ET.SubElement(
                el,
                "window",
                opens_at=to_iso(job.window.opens_at),
                closes_at=to_iso(job.window.closes_at),
            )
        queue = state.claims.get(job.job_id, [])
        if queue:
            claims_el = ET.SubElement(el, "claims")
            for claim in queue:
                ET.SubElement(
                    claims_el,
                    "claim",
                    user_id=claim.user_id,
                    login_time=to_iso(claim.login_time),
                    submitted_at=to_iso(claim.submitted_at),
                    sequence=str(claim.sequence),
                )

    requests = ET.SubElement(root, "requests")
    for request in state.requests.values():
        attrs = {
            "request_id": request.request_id,
            "requester": request.requester,
            "action": request.action.value,
            "status": request.status.value,
            "requested_at": to_iso(request.requested_at),
            "spent": "true" if request.spent else "false",
        }
        if request.approver is not None:
            attrs["approver"] = request.approver
        ET.SubElement(requests, "request", attrs)

    return root


def _from_element(root: ET.Element, version: int) -> BackupDocument:
    state = EngineState()

    for el in root.findall("./accounts/account"):
        roles = {Role.from_label(r.text or "") for r in el.findall("role")}
        account = UserAccount(
            user_id=el.attrib["user_id"],
            username=el.attrib["username"],
            credential=el.attrib["credential"],
            roles=roles,
            created_at=parse_iso(el.attrib["created_at"]),
            tx_count=int(el.attrib.get("tx_count", "0")),
            tx_day=_parse_day(el.attrib.get("tx_day")),
        )
        state.accounts[account.user_id] = account

    for el in root.findall("./jobs/job"):
        window_el = el.find("window")
        window = None
        if window_el is not None:
            window = AvailabilityWindow(
                opens_at=parse_iso(window_el.attrib["opens_at"]),
                closes_at=parse_iso(window_el.attrib["closes_at"]),
            )
        job = Job(
            job_id=el.attrib["job_id"],
            assigned_by=el.attrib["assigned_by"],
            assigned_on=parse_iso(el.attrib["assigned_on"]),
            target_level=int(el.attrib["target_level"]),
            job_type=_text(el, "type"),
            description=_text(el, "description"),
            window=window,
            state=JobState(el.attrib["state"]),
            claimed_by=el.attrib.get("claimed_by"),
        )
        state.jobs[job.job_id] = job
        queue = [
            ClaimRequest(
                job_id=job.job_id,
                user_id=c.attrib["user_id"],
                login_time=parse_iso(c.attrib["login_time"]),
                submitted_at=parse_iso(c.attrib["submitted_at"]),
                sequence=int(c.attrib["sequence"]),
            )
            for c in el.findall("./claims/claim")
        ]
        if queue:
            state.claims[job.job_id] = queue

    for el in root.findall("./requests/request"):
        request = PermissionRequest(
            request_id=el.attrib["request_id"],
            requester=el.attrib["requester"],
            action=Action(el.attrib["action"]),
            requested_at=parse_iso(el.attrib["requested_at"]),
            status=RequestStatus(el.attrib["status"]),
            approver=el.attrib.get("approver"),
            spent=el.attrib["spent"] == "true",
        )
        state.requests[request.request_id] = request

    state.claim_seq = max(
        (c.sequence for queue in state.claims.values() for c in queue),
        default=0,
    )
    return BackupDocument(
        format_version=version,
        taken_at=parse_iso(root.attrib["taken_at"]),
        state=state,
    )


def _text(el: ET.Element, tag: str) -> str:
    child = el.find(tag)
    if child is None:
        raise KeyError(tag)
    return child.text or ""


def _parse_day(raw: str | None) -> date | None:
    return date.fromisoformat(raw) if raw else None
