// Pure DOM builders. Everything here renders exactly what it is given —
// in particular the board keeps the server's row order untouched.

import { ClaimRow, JobRow, SessionInfo } from "./api.js";
import { formatStamp } from "./format.js";

export const BOARD_COLUMNS = [
  "S.No",
  "Assigned By",
  "Assigned On",
  "Assigned Person Level",
  "Job Type",
  "Job Description",
  "State",
  "",
] as const;

export interface BoardHandlers {
  onClaim?: (jobId: string) => void;
  onResolve?: (jobId: string) => void;
}

export function isAdmin(session: SessionInfo): boolean {
  return session.priority === 1;
}

/**
 * The rows a session gets to see: admins the whole board, everyone else only
 * open jobs at their own level. Relative order is preserved, never re-sorted.
 */
export function visibleRows(rows: JobRow[], session: SessionInfo): JobRow[] {
  if (isAdmin(session)) return rows;
  return rows.filter((row) => row.state === "Open" && row.level === session.priority);
}

export function boardTable(
  rows: JobRow[],
  session: SessionInfo,
  handlers: BoardHandlers = {},
): HTMLTableElement {
  const table = document.createElement("table");
  table.className = "board";
  const thead = document.createElement("thead");
  const head = document.createElement("tr");
  for (const column of BOARD_COLUMNS) {
    const th = document.createElement("th");
    th.textContent = column;
    head.appendChild(th);
  }
  thead.appendChild(head);
  table.appendChild(thead);
  const body = document.createElement("tbody");
  table.appendChild(body);
  for (const row of rows) {
    const tr = document.createElement("tr");
    tr.dataset.jobId = row.job_id;
    body.appendChild(tr);
    cell(tr, String(row.s_no));
    cell(tr, row.assigned_by);
    cell(tr, formatStamp(row.assigned_on));
    cell(tr, row.level_label);
    cell(tr, row.type);
    cell(tr, row.description);
    const state = cell(tr, stateText(row));
    state.className = `state state-${row.state.toLowerCase()}`;
    const actions = cell(tr, "");
    if (!isAdmin(session) && row.state === "Open" && handlers.onClaim) {
      actions.appendChild(
        button("Claim", "claim-button", () => handlers.onClaim!(row.job_id)),
      );
    }
  }
  return table;
}

function stateText(row: JobRow): string {
  if (row.state === "Assigned" && row.claimed_by_username) {
    return `Assigned to ${row.claimed_by_username}`;
  }
  return row.state;
}

/**
 * Admin-only panel for one job's pending claims. The claim list arrives
 * already sorted by the service's resolution key (strongest role, earliest
 * login, then user id), so the first row is the winner-to-be.
 */
export function claimsPanel(
  job: JobRow,
  claims: ClaimRow[],
  onResolve?: (jobId: string) => void,
): HTMLElement {
  const panel = document.createElement("section");
  panel.className = "claims-panel";
  panel.dataset.jobId = job.job_id;

  const heading = document.createElement("h3");
  heading.textContent = `Claims for ${job.type} (${job.level_label})`;
  panel.appendChild(heading);

  const list = document.createElement("ol");
  list.className = "claims-list";
  claims.forEach((claim, index) => {
    const item = document.createElement("li");
    item.dataset.userId = claim.user_id;
    item.textContent = `${claim.username} — logged in ${formatStamp(claim.login_time)}`;
    if (index === 0) item.classList.add("front-of-queue");
    list.appendChild(item);
  });
  panel.appendChild(list);

  if (onResolve && job.state === "Open" && claims.length > 0) {
    panel.appendChild(button("Resolve", "resolve-button", () => onResolve(job.job_id)));
  }
  return panel;
}

export type NoticeKind = "error" | "info";

export function notice(kind: NoticeKind, text: string): HTMLElement {
  const element = document.createElement("p");
  element.className = `notice notice-${kind}`;
  element.setAttribute("role", kind === "error" ? "alert" : "status");
  element.textContent = text;
  return element;
}

export function button(label: string, className: string, onClick: () => void): HTMLButtonElement {
  const element = document.createElement("button");
  element.type = "button";
  element.className = className;
  element.textContent = label;
  element.addEventListener("click", onClick);
  return element;
}

function cell(tr: HTMLTableRowElement, text: string): HTMLTableCellElement {
  const td = document.createElement("td");
  td.textContent = text;
  tr.appendChild(td);
  return td;
}
