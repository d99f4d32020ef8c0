import type { SegmentsPayload, SegmentView, Status } from "./types.js";

/** A status write the UI wants to send. Nothing is mutated locally until
 * the server acknowledges it (see `ackPending`). */
export interface PendingWrite {
  index: number;
  status: Status;
  version: number;
  undo: boolean;
}

interface HistoryEntry {
  index: number;
  prev: Status;
}

/**
 * Review state for one image.
 *
 * The machine never commits a status change optimistically: `requestMark`
 * / `requestUndo` only produce the write intent, and the segment list
 * changes when `ackPending` applies the server's answer. A 409 lands in
 * `failPendingStale`, which records the server's version and freezes
 * further writes until the caller reloads.
 */
export class ReviewSession {
  payload: SegmentsPayload | null = null;
  cursor = 0;
  /** Server-side version reported by a rejected write; null when in sync. */
  staleVersion: number | null = null;
  private pending: PendingWrite | null = null;
  private history: HistoryEntry[] = [];

  load(payload: SegmentsPayload): void {
    this.payload = payload;
    this.cursor = payload.segments.length > 0 ? 0 : -1;
    this.staleVersion = null;
    this.pending = null;
    this.history = [];
  }

  get version(): number {
    return this.payload ? this.payload.version : -1;
  }

  get isStale(): boolean {
    return this.staleVersion !== null;
  }

  get hasPending(): boolean {
    return this.pending !== null;
  }

  current(): SegmentView | null {
    if (!this.payload || this.cursor < 0) return null;
    return this.payload.segments[this.cursor] ?? null;
  }

  advance(): void {
    if (!this.payload) return;
    const last = this.payload.segments.length - 1;
    if (this.cursor < last) this.cursor += 1;
  }

  retreat(): void {
    if (!this.payload) return;
    if (this.cursor > 0) this.cursor -= 1;
  }

  canUndo(): boolean {
    return this.history.length > 0;
  }

  /** Intent to set the current segment's status. Null when there is
   * nothing to mark, a write is already in flight, or the session is
   * stale and must reload first. */
  requestMark(status: Status): PendingWrite | null {
    const seg = this.current();
    if (!this.payload || !seg || this.pending || this.isStale) return null;
    if (seg.status === status) return null;
    this.pending = {
      index: seg.index,
      status,
      version: this.payload.version,
      undo: false,
    };
    return this.pending;
  }

  /** Intent to revert the most recent acknowledged change. */
  requestUndo(): PendingWrite | null {
    const last = this.history[this.history.length - 1];
    if (!this.payload || !last || this.pending || this.isStale) return null;
    this.pending = {
      index: last.index,
      status: last.prev,
      version: this.payload.version,
      undo: true,
    };
    return this.pending;
  }

  /** Apply a server-acknowledged write: mutate the segment, adopt the
   * new version, and maintain the undo history. */
  ackPending(newVersion: number): void {
    if (!this.payload || !this.pending) {
      throw new Error("no write in flight");
    }
    const write = this.pending;
    this.pending = null;
    const seg = this.payload.segments[write.index];
    if (!seg) throw new Error(`no segment ${write.index}`);
    if (write.undo) {
      this.history.pop();
    } else {
      this.history.push({ index: write.index, prev: seg.status });
    }
    seg.status = write.status;
    this.payload.version = newVersion;
  }

  /** The server rejected the write as stale: nothing was changed there
   * or here. Record its current version and require a reload. */
  failPendingStale(serverVersion: number): void {
    if (!this.pending) throw new Error("no write in flight");
    this.pending = null;
    this.staleVersion = serverVersion;
  }

  /** Drop a write that errored for a non-version reason (network etc.);
   * local state is untouched and further writes stay allowed. */
  abortPending(): void {
    this.pending = null;
  }

  counts(): Record<Status, number> {
    const out: Record<Status, number> = {
      candidate: 0,
      confirmed: 0,
      rejected: 0,
    };
    if (this.payload) {
      for (const seg of this.payload.segments) out[seg.status] += 1;
    }
    return out;
  }
}
