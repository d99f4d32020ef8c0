/** Shapes exchanged with the review HTTP API. */

export type Status = "candidate" | "confirmed" | "rejected";

export const STATUSES: readonly Status[] = ["candidate", "confirmed", "rejected"];

export interface ImageRow {
  id: string;
  image: string;
  width: number;
  height: number;
  n_segments: number;
  counts: Record<Status, number>;
  version: number;
}

export interface SegmentView {
  index: number;
  orientation_class: string;
  status: Status;
  points: [number, number][];
}

export interface SegmentsPayload {
  id: string;
  version: number;
  image: string;
  width: number;
  height: number;
  segments: SegmentView[];
}

/** Outcome of a status write. `stale` carries the server's current version. */
export type PutResult =
  | { kind: "ok"; version: number }
  | { kind: "stale"; version: number }
  | { kind: "error"; message: string };

export interface ExportPayload {
  files: Record<string, string>;
}
