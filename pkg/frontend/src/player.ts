// Live frame indicator over an embedded external player. The tracker polls
// the player's current time and displays floor(t * fps); "confirm this
// frame" captures exactly the displayed index.

import { frameIndexFromTime } from "./frames";

/** Minimal surface the console needs from any embedded player. */
export interface PlaybackSource {
  currentTimeS(): number;
}

export interface ConfirmedFrame {
  videoId: string;
  frameIndex: number;
  timestampS: number;
}

export const INDICATOR_REFRESH_MS = 200; // 5 Hz, above the 4 Hz floor

export class FrameTracker {
  private timer: ReturnType<typeof setInterval> | null = null;
  private lastFrame = 0;

  constructor(
    private readonly videoId: string,
    private readonly fps: number,
    private readonly source: PlaybackSource,
    private readonly onUpdate: (frameIndex: number) => void,
  ) {
    if (!(fps > 0)) {
      throw new RangeError(`fps must be positive, got ${fps}`);
    }
  }

  currentFrame(): number {
    return frameIndexFromTime(Math.max(0, this.source.currentTimeS()), this.fps);
  }

  /** Push one indicator update now (also used by each timer tick). */
  tick(): number {
    this.lastFrame = this.currentFrame();
    this.onUpdate(this.lastFrame);
    return this.lastFrame;
  }

  start(intervalMs: number = INDICATOR_REFRESH_MS): void {
    this.stop();
    this.tick();
    this.timer = setInterval(() => this.tick(), intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  /** Capture the frame the indicator is showing right now. */
  confirm(): ConfirmedFrame {
    const frameIndex = this.tick();
    return {
      videoId: this.videoId,
      frameIndex,
      timestampS: this.source.currentTimeS(),
    };
  }
}

/**
 * Wrap an HTML5 video element as a playback source, seeked to startS.
 * Returns null when the element cannot load, so callers can fall back to
 * timestamp-only controls.
 */
export function htmlVideoSource(video: HTMLVideoElement, startS: number): PlaybackSource | null {
  try {
    video.currentTime = startS;
  } catch {
    return null;
  }
  return { currentTimeS: () => video.currentTime };
}
