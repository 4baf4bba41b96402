import type { Polyline, Timeline, TimelineEvent, Vec3 } from './types.js';

// Animation playback over the server's timeline. The displayed total and
// progress are in machine seconds (the timeline's own clock); per-phase
// speed multipliers only change how fast wall time consumes machine time.

export type PhaseKind = 'home' | 'feed' | 'bend' | 'rotate';

export type SpeedMultipliers = Record<PhaseKind, number>;

export function defaultMultipliers(): SpeedMultipliers {
  return { home: 1, feed: 1, bend: 1, rotate: 1 };
}

export class PlaybackController {
  position = 0; // machine seconds
  playing = false;
  multipliers: SpeedMultipliers = defaultMultipliers();

  constructor(readonly timeline: Timeline) {}

  get totalTime(): number {
    return this.timeline.total_time;
  }

  /** Completion in [0, 1] of machine time consumed. */
  get progress(): number {
    if (this.totalTime === 0) return 1;
    return Math.min(1, this.position / this.totalTime);
  }

  get progressPercent(): number {
    return Math.round(this.progress * 1000) / 10;
  }

  get finished(): boolean {
    return this.position >= this.totalTime;
  }

  currentEvent(): TimelineEvent | null {
    for (const event of this.timeline.events) {
      if (this.position >= event.start && this.position < event.end) return event;
    }
    return null;
  }

  play(): void {
    this.playing = true;
  }

  pause(): void {
    this.playing = false;
  }

  reset(): void {
    this.playing = false;
    this.position = 0;
  }

  seek(seconds: number): void {
    this.position = Math.max(0, Math.min(this.totalTime, seconds));
  }

  /** Advance by wall-clock dt; machine time moves at the current phase's
   * multiplier, crossing event boundaries piecewise. */
  tick(wallDt: number): void {
    if (!this.playing) return;
    let remaining = wallDt;
    while (remaining > 1e-12 && !this.finished) {
      const event = this.currentEvent();
      if (event === null) {
        this.position = this.totalTime;
        break;
      }
      const rate = Math.max(1e-9, this.multipliers[event.kind] ?? 1);
      const machineLeft = event.end - this.position;
      const wallNeeded = machineLeft / rate;
      if (wallNeeded > remaining) {
        this.position += remaining * rate;
        remaining = 0;
      } else {
        this.position = event.end;
        remaining -= wallNeeded;
      }
    }
    if (this.finished) this.playing = false;
  }
}

/** Wire shape visible at a playback position: full points of feeds whose
 * event has finished, plus a partial point for an in-flight feed. */
export function polylineAtPosition(
  polyline: Polyline,
  timeline: Timeline,
  position: number,
): Vec3[] {
  const shown: Vec3[] = [polyline.points[0]];
  for (let seg = 0; seg < polyline.provenance.length; seg++) {
    const instructionIndex = polyline.provenance[seg];
    const event = timeline.events.find((e) => e.index === instructionIndex);
    const from = polyline.points[seg];
    const to = polyline.points[seg + 1];
    if (!event || event.end <= position) {
      shown.push(to);
      continue;
    }
    if (event.start >= position) break;
    const f = (position - event.start) / (event.end - event.start);
    shown.push([
      from[0] + (to[0] - from[0]) * f,
      from[1] + (to[1] - from[1]) * f,
      from[2] + (to[2] - from[2]) * f,
    ]);
    break;
  }
  return shown;
}
