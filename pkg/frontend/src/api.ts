// Status API client. One in-flight request per logical panel: a poll tick
// that arrives while the previous one is still running is skipped, never
// queued (the next tick will fetch fresher data anyway).

import type {
  HistoryPayload,
  MapPayload,
  NotificationsPayload,
  Role,
  SitePayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    readonly token: string,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      ...init,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(init?.headers ?? {}),
      },
    });
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      // non-JSON error bodies fall through to the status check
    }
    if (!response.ok) {
      const detail =
        body && typeof body === "object" && "error" in body
          ? String((body as { error: unknown }).error)
          : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  whoami(): Promise<{ role: Role }> {
    return this.request("/api/whoami");
  }

  map(vo: string | null, metric: string | null): Promise<MapPayload> {
    const query = new URLSearchParams();
    if (vo) query.set("vo", vo);
    if (metric) query.set("metric", metric);
    const suffix = query.toString() ? `?${query}` : "";
    return this.request(`/api/map${suffix}`);
  }

  site(name: string): Promise<SitePayload> {
    return this.request(`/api/site/${encodeURIComponent(name)}`);
  }

  history(
    host: string,
    service: string,
    label: string,
    startS: number,
    endS: number,
  ): Promise<HistoryPayload> {
    const path =
      `/api/history/${encodeURIComponent(host)}/${encodeURIComponent(service)}` +
      `/${encodeURIComponent(label)}?start=${startS}&end=${endS}`;
    return this.request(path);
  }

  notifications(limit = 50): Promise<NotificationsPayload> {
    return this.request(`/api/notifications?limit=${limit}`);
  }

  postCommand(line: string): Promise<void> {
    return this.request("/api/command", { method: "POST", body: line });
  }
}

export class SingleFlight {
  private inFlight = false;

  /** Run `task` unless a previous run is still pending; returns whether it ran. */
  async run(task: () => Promise<void>): Promise<boolean> {
    if (this.inFlight) return false;
    this.inFlight = true;
    try {
      await task();
      return true;
    } finally {
      this.inFlight = false;
    }
  }

  get busy(): boolean {
    return this.inFlight;
  }
}
