/**
 * Drives playback of a plan against a media element: seeks and rates the
 * original asset per item, mutes it and plays the synthesized narration
 * during narrated groups, pauses on title cards and held frames, and keeps
 * the narration clock within a drift tolerance of the plan mapping.
 *
 * The host loop calls advance() periodically (requestAnimationFrame or an
 * interval in the app, manual ticks in tests). During video items the media
 * element is the time authority; during cards and holds an internal clock
 * carries virtual time forward.
 */

import { isVideoItem, itemAt, sourceToVirtual } from "./timeline.js";
import type { PlanItem, PlaybackPlan } from "./types.js";

/** The subset of HTMLMediaElement the driver needs; tests supply fakes. */
export interface MediaLike {
  currentTime: number;
  playbackRate: number;
  muted: boolean;
  paused: boolean;
  play(): void;
  pause(): void;
}

export interface NarrationLike extends MediaLike {
  src: string;
}

export interface DriverState {
  itemIndex: number;
  virtualTime: number;
  /** Overlay text; non-null exactly during title cards and narrated slates. */
  cardText: string | null;
  /** True exactly while a narrated group's audio should be audible. */
  narrationActive: boolean;
  /** Source span being shown, for summary-card highlighting; null on cards. */
  activeSource: { start: number; end: number } | null;
  finished: boolean;
}

export interface DriverOptions {
  /** Seconds of narration drift tolerated before snapping back (default 0.25). */
  driftTolerance?: number;
  resolveNarrationUrl?: (ref: string) => string;
  onItemChange?: (state: DriverState) => void;
}

const END_EPSILON = 1e-6;

export class PlaybackDriver {
  private index = 0;
  private localTime = 0; // item-local clock for cards and holds
  private virtualTime = 0;
  private narrationGroup: number | null = null;
  private finished = false;
  private driftTolerance: number;
  private resolveUrl: (ref: string) => string;
  private onItemChange?: (state: DriverState) => void;

  constructor(
    private plan: PlaybackPlan,
    private video: MediaLike,
    private narration: NarrationLike,
    options: DriverOptions = {}
  ) {
    this.driftTolerance = options.driftTolerance ?? 0.25;
    this.resolveUrl = options.resolveNarrationUrl ?? ((ref) => ref);
    this.onItemChange = options.onItemChange;
  }

  get state(): DriverState {
    const item = this.plan.items[this.index];
    if (this.finished || item === undefined) {
      return {
        itemIndex: this.plan.items.length,
        virtualTime: this.plan.total_duration,
        cardText: null,
        narrationActive: false,
        activeSource: null,
        finished: true,
      };
    }
    return {
      itemIndex: this.index,
      virtualTime: this.virtualTime,
      cardText: isVideoItem(item) ? null : item.card_text,
      narrationActive: this.narrationGroup !== null && item.kind === "narrated_group",
      activeSource: isVideoItem(item)
        ? { start: item.source_start as number, end: item.source_end as number }
        : null,
      finished: false,
    };
  }

  start(): DriverState {
    if (this.plan.items.length === 0) {
      this.finished = true;
      return this.state;
    }
    this.enterItem(0, 0);
    return this.state;
  }

  /** One host-loop tick of dt seconds; returns the resulting state. */
  advance(dt: number): DriverState {
    if (this.finished) return this.state;
    const item = this.plan.items[this.index];

    if (isVideoItem(item)) {
      const end = item.source_end as number;
      const start = item.source_start as number;
      if (this.video.currentTime >= end - END_EPSILON) {
        return this.nextItem();
      }
      const clamped = Math.max(start, Math.min(this.video.currentTime, end));
      this.virtualTime = sourceToVirtual(this.plan, this.index, clamped);
    } else {
      this.localTime += dt;
      const length = item.virtual_end - item.virtual_start;
      if (this.localTime >= length - END_EPSILON) {
        return this.nextItem();
      }
      this.virtualTime = item.virtual_start + this.localTime;
    }
    this.correctNarrationDrift(item);
    return this.state;
  }

  seekVirtual(t: number): DriverState {
    if (t < 0 || t >= this.plan.total_duration) {
      throw new RangeError(`seek target ${t} outside the plan`);
    }
    this.finished = false;
    this.enterItem(itemAt(this.plan, t), t);
    return this.state;
  }

  stop(): void {
    this.video.pause();
    this.narration.pause();
    this.finished = true;
  }

  // -- internals -------------------------------------------------------------

  private nextItem(): DriverState {
    if (this.index + 1 >= this.plan.items.length) {
      this.virtualTime = this.plan.total_duration;
      this.stop();
      this.narrationGroup = null;
      this.onItemChange?.(this.state);
      return this.state;
    }
    const next = this.index + 1;
    this.enterItem(next, this.plan.items[next].virtual_start);
    return this.state;
  }

  private enterItem(index: number, virtualTime: number): void {
    const item = this.plan.items[index];
    this.index = index;
    this.virtualTime = virtualTime;
    this.localTime = virtualTime - item.virtual_start;

    if (isVideoItem(item)) {
      const offset = this.localTime * item.rate;
      this.video.currentTime = (item.source_start as number) + offset;
      this.video.playbackRate = item.rate;
      this.video.muted = item.audio === "muted_narration";
      this.video.play();
    } else {
      // title card, slate, or held frame: picture frozen, clock internal
      if (item.held_frame !== null) {
        this.video.currentTime = item.held_frame;
      }
      this.video.pause();
    }

    this.updateNarration(item);
    this.onItemChange?.(this.state);
  }

  private updateNarration(item: PlanItem): void {
    if (item.kind === "narrated_group" && item.narration_ref !== null) {
      const groupStart = this.groupVirtualStart(item);
      const offset = this.virtualTime - groupStart;
      if (this.narrationGroup !== item.group_id) {
        this.narration.src = this.resolveUrl(item.narration_ref);
        this.narration.currentTime = offset;
        this.narration.play();
        this.narrationGroup = item.group_id;
      } else if (Math.abs(this.narration.currentTime - offset) > this.driftTolerance) {
        // a seek within the running group: jump the narration, keep it playing
        this.narration.currentTime = offset;
      }
    } else {
      if (this.narrationGroup !== null) {
        this.narration.pause();
        this.narrationGroup = null;
      }
    }
  }

  /** Narration spans its whole group; snap it back when it drifts. */
  private correctNarrationDrift(item: PlanItem): void {
    if (this.narrationGroup === null || item.kind !== "narrated_group") return;
    const expected = this.virtualTime - this.groupVirtualStart(item);
    if (Math.abs(this.narration.currentTime - expected) > this.driftTolerance) {
      this.narration.currentTime = expected;
    }
  }

  private groupVirtualStart(item: PlanItem): number {
    let start = item.virtual_start;
    for (let i = this.index - 1; i >= 0; i--) {
      const earlier = this.plan.items[i];
      if (earlier.kind === "narrated_group" && earlier.group_id === item.group_id) {
        start = earlier.virtual_start;
      } else {
        break;
      }
    }
    return start;
  }
}
