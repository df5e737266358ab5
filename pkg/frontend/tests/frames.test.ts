import { describe, expect, it } from "vitest";

import { formatScore, formatTimestamp, frameIndexFromTime, timeFromFrameIndex } from "../src/frames";

describe("frameIndexFromTime", () => {
  // expected values precomputed with the same floor convention the service uses
  const cases: [number, number, number][] = [
    [0, 30, 0],
    [2.5, 25, 62],
    [1.0, 29.97, 29],
    [9.96, 25, 249],
    [0.04, 25, 1],
    [5.2, 23.976, 124],
    [59.94, 29.97, 1796],
    [7919 / 23.976, 23.976, 7919],
    [0.0399, 25, 0],
    [12.345, 60, 740],
  ];

  it.each(cases)("floor(%f * %f) -> frame %i", (t, fps, expected) => {
    expect(frameIndexFromTime(t, fps)).toBe(expected);
  });

  it("round trips every frame produced by timeFromFrameIndex", () => {
    for (const fps of [23.976, 25, 29.97, 30, 60]) {
      for (const frame of [0, 1, 62, 999, 7919, 123456]) {
        expect(frameIndexFromTime(timeFromFrameIndex(frame, fps), fps)).toBe(frame);
      }
    }
  });

  it("rejects invalid arguments", () => {
    expect(() => frameIndexFromTime(-1, 25)).toThrow(RangeError);
    expect(() => frameIndexFromTime(1, 0)).toThrow(RangeError);
  });
});

describe("formatting", () => {
  it("scores show three decimals", () => {
    expect(formatScore(0.8734567)).toBe("0.873");
    expect(formatScore(1)).toBe("1.000");
    expect(formatScore(18.171304439002146)).toBe("18.171");
  });

  it("timestamps show mm:ss.d", () => {
    expect(formatTimestamp(0)).toBe("00:00.0");
    expect(formatTimestamp(15.36)).toBe("00:15.4");
    expect(formatTimestamp(330.28)).toBe("05:30.3");
  });
});
