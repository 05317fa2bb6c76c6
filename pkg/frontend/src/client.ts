/**
 * Capture-service client: fetch scenes, upload sessions.
 *
 * Uploads that fail with a network error or a 5xx are kept in a retry
 * queue (pluggable storage, localStorage in the browser) so a flaky
 * connection never loses a recorded trial. Validation failures (4xx) are
 * surfaced, not retried: the session itself is bad.
 */
import { serializeSession, validateSession } from "./schema.js";
import type { GazeSessionDoc, SceneReplay, SceneSummary } from "./types.js";

export interface QueueStore {
  load(): string[];
  save(entries: string[]): void;
}

export class MemoryQueueStore implements QueueStore {
  private entries: string[] = [];
  load(): string[] {
    return [...this.entries];
  }
  save(entries: string[]): void {
    this.entries = [...entries];
  }
}

export class LocalStorageQueueStore implements QueueStore {
  constructor(private key = "gazecast-retry-queue") {}
  load(): string[] {
    const raw = window.localStorage.getItem(this.key);
    return raw ? (JSON.parse(raw) as string[]) : [];
  }
  save(entries: string[]): void {
    window.localStorage.setItem(this.key, JSON.stringify(entries));
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface UploadResult {
  ok: boolean;
  sessionId?: string;
  queued: boolean;
  error?: string;
}

export class CaptureClient {
  constructor(
    private baseUrl: string,
    private queue: QueueStore = new MemoryQueueStore(),
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  async listScenes(): Promise<SceneSummary[]> {
    const res = await this.fetchImpl(`${this.baseUrl}/scenes`);
    if (!res.ok) throw new Error(`listing scenes failed: HTTP ${res.status}`);
    return (await res.json()) as SceneSummary[];
  }

  async getScene(sceneId: string): Promise<SceneReplay> {
    const res = await this.fetchImpl(`${this.baseUrl}/scenes/${sceneId}`);
    if (!res.ok) throw new Error(`fetching scene ${sceneId} failed: HTTP ${res.status}`);
    return (await res.json()) as SceneReplay;
  }

  async fetchSessionBytes(sessionId: string): Promise<string> {
    const res = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}`);
    if (!res.ok) throw new Error(`fetching session ${sessionId} failed: HTTP ${res.status}`);
    return await res.text();
  }

  /** Validate locally, then upload; network/server failures go to the queue. */
  async uploadSession(session: GazeSessionDoc): Promise<UploadResult> {
    validateSession(session);
    const body = serializeSession(session);
    return this.postBody(body);
  }

  private async postBody(body: string): Promise<UploadResult> {
    let res: Response;
    try {
      res = await this.fetchImpl(`${this.baseUrl}/sessions`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body,
      });
    } catch (err) {
      this.enqueue(body);
      return { ok: false, queued: true, error: String(err) };
    }
    if (res.status >= 500) {
      this.enqueue(body);
      return { ok: false, queued: true, error: `HTTP ${res.status}` };
    }
    if (!res.ok) {
      return { ok: false, queued: false, error: `HTTP ${res.status}: ${await res.text()}` };
    }
    const payload = (await res.json()) as { session_id: string };
    return { ok: true, queued: false, sessionId: payload.session_id };
  }

  pendingRetries(): number {
    return this.queue.load().length;
  }

  /** Re-attempt queued uploads; entries stay queued on repeated failure. */
  async retryPending(): Promise<UploadResult[]> {
    const pending = this.queue.load();
    this.queue.save([]);
    const results: UploadResult[] = [];
    for (const body of pending) {
      results.push(await this.postBody(body));
    }
    return results;
  }

  private enqueue(body: string): void {
    const entries = this.queue.load();
    entries.push(body);
    this.queue.save(entries);
  }
}
