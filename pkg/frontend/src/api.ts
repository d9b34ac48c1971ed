// Typed client over the service's HTTP+JSON contract. Every request the
// console makes goes through this module, so the endpoint list below is the
// complete traffic surface.

export interface SessionInfo {
  token: string;
  user_id: string;
  username: string;
  roles: string[];
  priority: number;
  login_time: string;
  expires_at: string;
}

export interface AccountInfo {
  user_id: string;
  username: string;
  roles: string[];
  priority: number;
}

export interface ClaimRow {
  user_id: string;
  username: string;
  priority: number;
  login_time: string;
  submitted_at: string;
  sequence: number;
}

export interface JobWindow {
  opens_at: string;
  closes_at: string;
}

export interface JobRow {
  job_id: string;
  s_no: number;
  assigned_by: string;
  assigned_on: string;
  level: number;
  level_label: string;
  type: string;
  description: string;
  window: JobWindow | null;
  state: "Open" | "Assigned" | "Completed";
  claimed_by: string | null;
  claimed_by_username: string | null;
  /** Present only for admin sessions; already sorted by the resolution key. */
  claims?: ClaimRow[];
}

export interface Resolution {
  outcome: "Resolved" | "NoClaims";
  winner: AccountInfo | null;
  job: JobRow;
}

/** A non-2xx response, carrying the service's error body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly reason?: string,
  ) {
    super(message);
    this.name = "ApiError";
  }

  /** Human text for a notice: prefer the policy reason when there is one. */
  get notice(): string {
    return this.reason ? `${this.reason}: ${this.message}` : `${this.code}: ${this.message}`;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ConsoleApi {
  private token: string | null = null;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  async createAccount(username: string, password: string): Promise<AccountInfo> {
    return this.request("POST", "/accounts", { username, password });
  }

  async login(username: string, password: string): Promise<SessionInfo> {
    const session = await this.request<SessionInfo>("POST", "/login", { username, password });
    this.token = session.token;
    return session;
  }

  async logout(): Promise<void> {
    await this.request("POST", "/logout");
    this.token = null;
  }

  async listJobs(): Promise<JobRow[]> {
    const body = await this.request<{ jobs: JobRow[] }>("GET", "/jobs");
    return body.jobs;
  }

  async postJob(
    level: number,
    type: string,
    description: string,
    window?: JobWindow,
  ): Promise<JobRow> {
    return this.request("POST", "/jobs", { level, type, description, window: window ?? null });
  }

  async claimJob(jobId: string): Promise<unknown> {
    return this.request("POST", `/jobs/${jobId}/claim`);
  }

  async resolveJob(jobId: string): Promise<Resolution> {
    return this.request("POST", `/jobs/${jobId}/resolve`);
  }

  async assignRole(username: string, role: string): Promise<AccountInfo> {
    return this.request("POST", "/roles/assign", { username, role });
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw await toApiError(response);
    }
    return (await response.json()) as T;
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let code = String(response.status);
  let message = response.statusText;
  let reason: string | undefined;
  try {
    const payload = await response.json();
    if (typeof payload.code === "string") code = payload.code;
    if (typeof payload.message === "string") message = payload.message;
    if (typeof payload.reason === "string") reason = payload.reason;
    // Validation failures arrive as FastAPI's {detail: [...]} shape.
    if (code === "422" && Array.isArray(payload.detail) && payload.detail.length > 0) {
      message = payload.detail[0].msg ?? message;
    }
  } catch {
    // Non-JSON body: keep the status-derived defaults.
  }
  return new ApiError(response.status, code, message, reason);
}
