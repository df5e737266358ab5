import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { FrameTracker, INDICATOR_REFRESH_MS } from "../src/player";

function sourceAt(time: { value: number }) {
  return { currentTimeS: () => time.value };
}

describe("FrameTracker", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("shows floor(t * fps) for the playback position", () => {
    const time = { value: 2.5 };
    const shown: number[] = [];
    const tracker = new FrameTracker("v1", 25, sourceAt(time), (f) => shown.push(f));
    expect(tracker.tick()).toBe(62); // the 2.5 s / 25 fps case
    time.value = 0;
    expect(tracker.tick()).toBe(0);
    time.value = 1.0;
    const tracker2997 = new FrameTracker("v1", 29.97, sourceAt(time), () => {});
    expect(tracker2997.tick()).toBe(29);
    expect(shown).toEqual([62, 0]);
  });

  it("refreshes at least four times per second while playing", () => {
    expect(INDICATOR_REFRESH_MS).toBeLessThanOrEqual(250);
    const time = { value: 0 };
    const shown: number[] = [];
    const tracker = new FrameTracker("v1", 25, sourceAt(time), (f) => shown.push(f));
    tracker.start();
    for (let i = 0; i < 5; i++) {
      time.value += 0.2;
      vi.advanceTimersByTime(INDICATOR_REFRESH_MS);
    }
    tracker.stop();
    // one immediate tick + 5 timer ticks over one simulated second
    expect(shown.length).toBeGreaterThanOrEqual(5);
    expect(shown.at(-1)).toBe(25); // 1.0 s * 25 fps
  });

  it("confirm captures exactly the displayed index", () => {
    const time = { value: 2.5 };
    const tracker = new FrameTracker("v9", 25, sourceAt(time), () => {});
    const confirmed = tracker.confirm();
    expect(confirmed).toEqual({ videoId: "v9", frameIndex: 62, timestampS: 2.5 });
  });

  it("stop halts updates", () => {
    const time = { value: 0 };
    const shown: number[] = [];
    const tracker = new FrameTracker("v1", 25, sourceAt(time), (f) => shown.push(f));
    tracker.start();
    tracker.stop();
    const count = shown.length;
    vi.advanceTimersByTime(1000);
    expect(shown.length).toBe(count);
  });

  it("rejects a non-positive fps", () => {
    expect(() => new FrameTracker("v1", 0, sourceAt({ value: 0 }), () => {})).toThrow(RangeError);
  });
});
