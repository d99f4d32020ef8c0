import type {
  ExportPayload,
  ImageRow,
  PutResult,
  SegmentsPayload,
  Status,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

/**
 * Thin client for the review server. All methods hit the JSON API; the
 * fetch implementation is injectable so tests can run without a network.
 */
export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base: string, fetchFn?: FetchLike) {
    this.base = base.replace(/\/+$/, "");
    // Default to the global fetch, called unbound so browsers don't see
    // the client instance as `this`.
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  async listImages(): Promise<ImageRow[]> {
    const res = await this.request("/images");
    if (!res.ok) throw new Error(`GET /images failed: ${res.status}`);
    return (await res.json()) as ImageRow[];
  }

  async getSegments(imageId: string): Promise<SegmentsPayload> {
    const path = `/images/${encodeURIComponent(imageId)}/segments`;
    const res = await this.request(path);
    if (!res.ok) throw new Error(`GET ${path} failed: ${res.status}`);
    return (await res.json()) as SegmentsPayload;
  }

  rawImageUrl(imageId: string): string {
    return `${this.base}/images/${encodeURIComponent(imageId)}/raw`;
  }

  /**
   * Write one segment's status. A 409 is not an exception: it is the
   * expected signal that another writer got there first, returned as
   * `{kind: "stale"}` with the server's current version so the caller
   * can reload and retry.
   */
  async putStatus(
    imageId: string,
    index: number,
    status: Status,
    version: number,
  ): Promise<PutResult> {
    const path = `/images/${encodeURIComponent(imageId)}/segments/${index}/status`;
    const res = await this.request(path, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ status, version }),
    });
    if (res.status === 200) {
      const body = (await res.json()) as { version: number };
      return { kind: "ok", version: body.version };
    }
    if (res.status === 409) {
      const body = (await res.json()) as { version: number };
      return { kind: "stale", version: body.version };
    }
    let message = `PUT ${path} failed: ${res.status}`;
    try {
      const body = (await res.json()) as { error?: string };
      if (body.error) message = body.error;
    } catch {
      // non-JSON error body; keep the status-line message
    }
    return { kind: "error", message };
  }

  async exportAll(): Promise<ExportPayload> {
    const res = await this.request("/export");
    if (!res.ok) throw new Error(`GET /export failed: ${res.status}`);
    return (await res.json()) as ExportPayload;
  }

  private request(path: string, init?: RequestInit): Promise<Response> {
    return this.fetchFn(this.base + path, init);
  }
}
