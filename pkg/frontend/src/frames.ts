// Frame/time arithmetic mirroring the service's floor convention. The snap
// term absorbs float rounding so a time produced from a frame index maps
// back to the same frame.

const FRAME_SNAP = 1e-6;

export function frameIndexFromTime(timeS: number, fps: number): number {
  if (!(fps > 0)) {
    throw new RangeError(`fps must be positive, got ${fps}`);
  }
  if (!(timeS >= 0)) {
    throw new RangeError(`time must be non-negative, got ${timeS}`);
  }
  return Math.floor(timeS * fps + FRAME_SNAP);
}

export function timeFromFrameIndex(frame: number, fps: number): number {
  if (!(fps > 0)) {
    throw new RangeError(`fps must be positive, got ${fps}`);
  }
  return frame / fps;
}

/** Scores are always displayed with exactly three decimals. */
export function formatScore(score: number): string {
  return score.toFixed(3);
}

/** mm:ss.d display for keyframe/pair timestamps. */
export function formatTimestamp(seconds: number): string {
  const minutes = Math.floor(seconds / 60);
  const rest = seconds - minutes * 60;
  return `${String(minutes).padStart(2, "0")}:${rest.toFixed(1).padStart(4, "0")}`;
}
