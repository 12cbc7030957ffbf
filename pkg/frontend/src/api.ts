/** Thin typed client for the clipweaver REST endpoints. */

import type {
  PlaybackPlan,
  QueryMode,
  SessionView,
  SkimMode,
  VideoView,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = fetch.bind(globalThis)
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  getVideo(videoId: string): Promise<VideoView> {
    return this.request(`/videos/${encodeURIComponent(videoId)}`);
  }

  async submitQuery(videoId: string, text: string, mode: QueryMode): Promise<string> {
    const body = await this.request<{ session_id: string }>(
      `/videos/${encodeURIComponent(videoId)}/queries`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ text, mode }),
      }
    );
    return body.session_id;
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/queries/${encodeURIComponent(sessionId)}`);
  }

  getPlan(sessionId: string): Promise<PlaybackPlan> {
    return this.request(`/queries/${encodeURIComponent(sessionId)}/plan`);
  }

  getSkimPlan(sessionId: string, mode: SkimMode): Promise<PlaybackPlan> {
    return this.request(`/queries/${encodeURIComponent(sessionId)}/skim`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ mode }),
    });
  }

  /** Polls a session until it leaves the in-flight states. */
  async waitForSession(
    sessionId: string,
    opts: { intervalMs?: number; timeoutMs?: number } = {}
  ): Promise<SessionView> {
    const interval = opts.intervalMs ?? 1000;
    const deadline = Date.now() + (opts.timeoutMs ?? 120_000);
    for (;;) {
      const session = await this.getSession(sessionId);
      if (session.status === "ready" || session.status === "failed") {
        return session;
      }
      if (Date.now() > deadline) {
        throw new ApiError(408, `session ${sessionId} still ${session.status}`);
      }
      await new Promise((resolve) => setTimeout(resolve, interval));
    }
  }

  mediaUrl(ref: string): string {
    return `${this.baseUrl}/media/${ref}`;
  }
}
