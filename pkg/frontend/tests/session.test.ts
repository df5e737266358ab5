import { describe, expect, it } from "vitest";

import type { ApiClient, FramesResponse } from "../src/api";
import { SearchSession } from "../src/session";

function framesResponse(tag: string): FramesResponse {
  return {
    groups: [
      {
        video_id: tag,
        group_score: 1,
        hits: [{ id: `${tag}/k0`, score: 1, metadata: { video_id: tag } }],
      },
    ],
  };
}

type Resolver = (response: FramesResponse) => void;

/** Fake client whose frame searches resolve only when the test says so. */
function deferredApi(): { api: ApiClient; pending: Resolver[]; calls: unknown[][] } {
  const pending: Resolver[] = [];
  const calls: unknown[][] = [];
  const api = {
    searchFrames: (...args: unknown[]) => {
      calls.push(args);
      return new Promise<FramesResponse>((resolve) => pending.push(resolve));
    },
  } as unknown as ApiClient;
  return { api, pending, calls };
}

describe("SearchSession", () => {
  it("never renders a stale response", async () => {
    const { api, pending } = deferredApi();
    const session = new SearchSession(api);
    session.mode = "frames";

    session.query = "first";
    const first = session.run();
    session.query = "second";
    const second = session.run();

    // the newer request resolves first, then the stale one arrives late
    pending[1]!(framesResponse("new"));
    await expect(second).resolves.toMatchObject({ mode: "frames" });
    expect(session.results!.mode === "frames" && session.results.response.groups[0]!.video_id).toBe("new");

    pending[0]!(framesResponse("old"));
    await expect(first).resolves.toBeNull(); // superseded, dropped
    expect(session.results!.mode === "frames" && session.results.response.groups[0]!.video_id).toBe("new");
  });

  it("appends every submitted query to the history", async () => {
    const { api, pending } = deferredApi();
    const session = new SearchSession(api);
    session.query = "một";
    const run1 = session.run();
    pending[0]!(framesResponse("a"));
    await run1;
    session.query = "hai";
    const run2 = session.run();
    pending[1]!(framesResponse("b"));
    await run2;
    expect(session.history.map((h) => h.query)).toEqual(["một", "hai"]);
  });

  it("requires both events in temporal mode", async () => {
    const { api } = deferredApi();
    const session = new SearchSession(api);
    session.mode = "temporal";
    session.query = "e1 only";
    await expect(session.run()).rejects.toThrow(/both event queries/);
  });

  it("rejects empty queries", async () => {
    const { api } = deferredApi();
    const session = new SearchSession(api);
    session.query = "  ";
    await expect(session.run()).rejects.toThrow(/non-empty/);
  });

  it("forwards the summary filter to the frames request", async () => {
    const { api, pending, calls } = deferredApi();
    const session = new SearchSession(api);
    session.query = "tin";
    session.applySummaryFilter(["v02", "v01"]);
    const run = session.run();
    pending[0]!(framesResponse("v02"));
    await run;
    expect(calls[0]).toEqual(["tin", undefined, ["v02", "v01"]]);
    session.clearSummaryFilter();
    const run2 = session.run();
    pending[1]!(framesResponse("v02"));
    await run2;
    expect(calls[1]).toEqual(["tin", undefined, undefined]);
  });
});
