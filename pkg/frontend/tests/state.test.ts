import { describe, expect, it } from "vitest";

import { ReviewSession } from "../src/state.js";
import type { SegmentsPayload, Status } from "../src/types.js";

function payloadWith(statuses: Status[], version = 0): SegmentsPayload {
  return {
    id: "a",
    version,
    image: "a.png",
    width: 64,
    height: 48,
    segments: statuses.map((status, index) => ({
      index,
      orientation_class: "horizontal",
      status,
      points: [
        [2, 5 + index],
        [60, 5 + index],
      ] as [number, number][],
    })),
  };
}

describe("loading and navigation", () => {
  it("starts on the first segment and clamps cursor moves", () => {
    const s = new ReviewSession();
    s.load(payloadWith(["candidate", "candidate", "candidate"]));
    expect(s.cursor).toBe(0);
    s.retreat();
    expect(s.cursor).toBe(0);
    s.advance();
    s.advance();
    s.advance();
    s.advance();
    expect(s.cursor).toBe(2);
  });

  it("handles an empty segment list", () => {
    const s = new ReviewSession();
    s.load(payloadWith([]));
    expect(s.cursor).toBe(-1);
    expect(s.current()).toBeNull();
    expect(s.requestMark("confirmed")).toBeNull();
  });
});

describe("marking is never optimistic", () => {
  it("leaves the segment untouched between request and ack", () => {
    const s = new ReviewSession();
    s.load(payloadWith(["candidate", "candidate"], 7));
    const write = s.requestMark("confirmed");
    expect(write).toEqual({
      index: 0,
      status: "confirmed",
      version: 7,
      undo: false,
    });
    // nothing changed yet: status and version only move on ack
    expect(s.payload!.segments[0]!.status).toBe("candidate");
    expect(s.version).toBe(7);
    expect(s.hasPending).toBe(true);

    s.ackPending(8);
    expect(s.payload!.segments[0]!.status).toBe("confirmed");
    expect(s.version).toBe(8);
    expect(s.hasPending).toBe(false);
  });

  it("allows a single write in flight", () => {
    const s = new ReviewSession();
    s.load(payloadWith(["candidate", "candidate"]));
    expect(s.requestMark("confirmed")).not.toBeNull();
    expect(s.requestMark("rejected")).toBeNull();
    s.ackPending(1);
    s.advance();
    expect(s.requestMark("rejected")).not.toBeNull();
  });

  it("skips no-op marks", () => {
    const s = new ReviewSession();
    s.load(payloadWith(["confirmed"]));
    expect(s.requestMark("confirmed")).toBeNull();
  });

  it("rejects an ack with no write in flight", () => {
    const s = new ReviewSession();
    s.load(payloadWith(["candidate"]));
    expect(() => s.ackPending(1)).toThrow();
  });

  it("recovers from a non-version error via abortPending", () => {
    const s = new ReviewSession();
    s.load(payloadWith(["candidate"]));
    s.requestMark("confirmed");
    s.abortPending();
    expect(s.payload!.segments[0]!.status).toBe("candidate");
    expect(s.requestMark("confirmed")).not.toBeNull();
  });
});

describe("stale writes", () => {
  it("freezes the session until reload and keeps local state", () => {
    const s = new ReviewSession();
    s.load(payloadWith(["candidate"], 3));
    s.requestMark("confirmed");
    s.failPendingStale(5);
    expect(s.isStale).toBe(true);
    expect(s.staleVersion).toBe(5);
    expect(s.payload!.segments[0]!.status).toBe("candidate");
    expect(s.version).toBe(3);
    expect(s.requestMark("confirmed")).toBeNull();
    expect(s.requestUndo()).toBeNull();

    // reload clears the stale flag
    s.load(payloadWith(["confirmed"], 5));
    expect(s.isStale).toBe(false);
    expect(s.requestMark("rejected")).not.toBeNull();
  });
});

describe("undo", () => {
  it("reverts the last acknowledged change through the server", () => {
    const s = new ReviewSession();
    s.load(payloadWith(["candidate", "candidate"]));
    expect(s.canUndo()).toBe(false);
    expect(s.requestUndo()).toBeNull();

    s.requestMark("confirmed");
    s.ackPending(1);
    s.advance();
    s.requestMark("rejected");
    s.ackPending(2);
    expect(s.canUndo()).toBe(true);

    const undoWrite = s.requestUndo();
    expect(undoWrite).toEqual({
      index: 1,
      status: "candidate",
      version: 2,
      undo: true,
    });
    // still not applied locally
    expect(s.payload!.segments[1]!.status).toBe("rejected");
    s.ackPending(3);
    expect(s.payload!.segments[1]!.status).toBe("candidate");
    expect(s.version).toBe(3);

    // next undo targets the first change
    const second = s.requestUndo();
    expect(second!.index).toBe(0);
    expect(second!.status).toBe("candidate");
    s.ackPending(4);
    expect(s.payload!.segments[0]!.status).toBe("candidate");
    expect(s.canUndo()).toBe(false);
  });
});

describe("counts", () => {
  it("tallies statuses", () => {
    const s = new ReviewSession();
    s.load(payloadWith(["candidate", "confirmed", "confirmed", "rejected"]));
    expect(s.counts()).toEqual({ candidate: 1, confirmed: 2, rejected: 1 });
  });
});
