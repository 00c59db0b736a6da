// Latest-wins slot for inbound state frames. The network callback only
// writes here; the render tick reads whatever is newest. Refreshing the page
// therefore never touches simulation state on the server.

import type { StateFrame } from './protocol';

export const STALE_AFTER_MS = 500;

export class FrameStore {
  private frame: StateFrame | null = null;
  private receivedAt = 0;
  framesSeen = 0;
  framesSkipped = 0;

  put(frame: StateFrame, nowMs: number): void {
    if (this.frame !== null && frame.seq <= this.frame.seq) {
      // out-of-order or duplicate; newest frame stays
      return;
    }
    if (this.frame !== null && this.receivedAt === nowMs) {
      this.framesSkipped += 1;
    }
    this.frame = frame;
    this.receivedAt = nowMs;
    this.framesSeen += 1;
  }

  latest(): StateFrame | null {
    return this.frame;
  }

  isStale(nowMs: number): boolean {
    if (this.frame === null) return true;
    return nowMs - this.receivedAt > STALE_AFTER_MS;
  }

  ageMs(nowMs: number): number {
    return this.frame === null ? Infinity : nowMs - this.receivedAt;
  }
}
