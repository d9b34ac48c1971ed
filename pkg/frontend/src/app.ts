// Console wiring: login screen, then the board. The server stays
// authoritative — every action re-fetches, and the board re-polls on a
// fixed interval rather than trusting any local prediction.

import { ApiError, ConsoleApi, JobRow, SessionInfo } from "./api.js";
import { boardTable, claimsPanel, isAdmin, notice, visibleRows } from "./views.js";

export const POLL_INTERVAL_MS = 2000;

export class ConsoleApp {
  private session: SessionInfo | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly api: ConsoleApi,
    private readonly root: HTMLElement,
  ) {}

  start(): void {
    this.renderLogin();
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }

  // -- login ------------------------------------------------------------

  private renderLogin(message?: string): void {
    this.stop();
    this.session = null;
    this.root.replaceChildren();

    const form = document.createElement("form");
    form.id = "login-form";
    form.innerHTML = `
      <h1>Job Board</h1>
      <label>Username <input name="username" autocomplete="username" required></label>
      <label>Password <input name="password" type="password" autocomplete="current-password" required></label>
      <button type="submit">Log in</button>
      <button type="button" id="create-account">Create account</button>
      <div id="login-notice"></div>
    `;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitLogin(form, "login");
    });
    form.querySelector("#create-account")!.addEventListener("click", () => {
      void this.submitLogin(form, "create");
    });
    this.root.appendChild(form);
    if (message) this.showNotice("login-notice", "error", message);
  }

  private async submitLogin(form: HTMLFormElement, mode: "login" | "create"): Promise<void> {
    const data = new FormData(form);
    const username = String(data.get("username") ?? "").trim();
    const password = String(data.get("password") ?? "");
    try {
      if (mode === "create") {
        await this.api.createAccount(username, password);
        this.showNotice("login-notice", "info", `Account ${username} created; log in.`);
        return;
      }
      this.session = await this.api.login(username, password);
      this.renderConsole();
      await this.refreshBoard();
      this.timer = setInterval(() => void this.refreshBoard(), POLL_INTERVAL_MS);
    } catch (error) {
      this.showNotice("login-notice", "error", describe(error));
    }
  }

  // -- console ----------------------------------------------------------

  private renderConsole(): void {
    const session = this.session!;
    this.root.replaceChildren();

    const header = document.createElement("header");
    header.innerHTML = `
      <span id="whoami">${session.username} — ${session.roles.join(", ")}</span>
      <button type="button" id="logout">Log out</button>
    `;
    header.querySelector("#logout")!.addEventListener("click", () => {
      void this.api.logout().catch(() => undefined);
      this.renderLogin();
    });
    this.root.appendChild(header);

    const noticeArea = document.createElement("div");
    noticeArea.id = "console-notice";
    this.root.appendChild(noticeArea);

    if (isAdmin(session)) {
      this.root.appendChild(this.postJobForm());
      this.root.appendChild(this.assignRoleForm());
    }

    const board = document.createElement("div");
    board.id = "board-area";
    this.root.appendChild(board);

    const panels = document.createElement("div");
    panels.id = "claims-area";
    this.root.appendChild(panels);
  }

  private postJobForm(): HTMLFormElement {
    const form = document.createElement("form");
    form.id = "post-job-form";
    form.innerHTML = `
      <h2>Post a job</h2>
      <label>Level <select name="level">
        ${[1, 2, 3, 4, 5].map((n) => `<option value="${n}">${n}</option>`).join("")}
      </select></label>
      <label>Type <input name="type"></label>
      <label>Description <input name="description"></label>
      <button type="submit">Post</button>
    `;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const data = new FormData(form);
      const type = String(data.get("type") ?? "").trim();
      if (!type) {
        this.showNotice("console-notice", "error", "Job type must not be empty.");
        return;
      }
      void this.run(async () => {
        await this.api.postJob(
          Number(data.get("level")),
          type,
          String(data.get("description") ?? ""),
        );
        form.reset();
      });
    });
    return form;
  }

  private assignRoleForm(): HTMLFormElement {
    const form = document.createElement("form");
    form.id = "assign-role-form";
    form.innerHTML = `
      <h2>Assign a role</h2>
      <label>Username <input name="username"></label>
      <label>Role <select name="role">
        ${["Admin", "President", "GM", "Manager", "Executive"]
          .map((label) => `<option>${label}</option>`)
          .join("")}
      </select></label>
      <button type="submit">Assign</button>
    `;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const data = new FormData(form);
      void this.run(async () => {
        const account = await this.api.assignRole(
          String(data.get("username") ?? "").trim(),
          String(data.get("role")),
        );
        this.showNotice(
          "console-notice",
          "info",
          `${account.username} now holds: ${account.roles.join(", ")}.`,
        );
      });
    });
    return form;
  }

  // -- board ------------------------------------------------------------

  async refreshBoard(): Promise<void> {
    const session = this.session;
    if (!session) return;
    let rows: JobRow[];
    try {
      rows = await this.api.listJobs();
    } catch (error) {
      if (error instanceof ApiError && error.status === 401) {
        this.renderLogin("Session ended; log in again.");
        return;
      }
      this.showNotice("console-notice", "error", describe(error));
      return;
    }
    this.renderBoard(rows);
  }

  private renderBoard(rows: JobRow[]): void {
    const session = this.session!;
    const boardArea = this.root.querySelector("#board-area");
    const claimsArea = this.root.querySelector("#claims-area");
    if (!boardArea || !claimsArea) return;

    const shown = visibleRows(rows, session);
    boardArea.replaceChildren(
      boardTable(shown, session, {
        onClaim: (jobId) => void this.run(() => this.api.claimJob(jobId)),
      }),
    );

    claimsArea.replaceChildren();
    if (isAdmin(session)) {
      for (const row of rows) {
        if (row.state === "Open" && row.claims && row.claims.length > 0) {
          claimsArea.appendChild(
            claimsPanel(row, row.claims, (jobId) => void this.resolve(jobId)),
          );
        }
      }
    }
  }

  private async resolve(jobId: string): Promise<void> {
    await this.run(async () => {
      const resolution = await this.api.resolveJob(jobId);
      if (resolution.outcome === "NoClaims") {
        this.showNotice("console-notice", "info", "NoClaims: the job stays open.");
      } else {
        this.showNotice(
          "console-notice",
          "info",
          `Assigned to ${resolution.winner!.username}.`,
        );
      }
    });
  }

  /** Run an action, surface its failure as a notice, and re-fetch the board. */
  private async run(action: () => Promise<unknown>): Promise<void> {
    try {
      await action();
    } catch (error) {
      this.showNotice("console-notice", "error", describe(error));
    }
    await this.refreshBoard();
  }

  private showNotice(areaId: string, kind: "error" | "info", text: string): void {
    const area = this.root.querySelector(`#${areaId}`);
    if (area) area.replaceChildren(notice(kind, text));
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return error.notice;
  return error instanceof Error ? error.message : String(error);
}

export function mount(root: HTMLElement, baseUrl = ""): ConsoleApp {
  const app = new ConsoleApp(new ConsoleApi(baseUrl), root);
  app.start();
  return app;
}
