import { beforeEach, describe, expect, it } from "vitest";

import { PlaybackDriver, type DriverState } from "../src/driver.js";
import {
  CARD_SPANS,
  FIXTURE_PLAN,
  FakeMedia,
  FakeNarration,
  NARRATED_SPANS,
} from "./fixtures.js";

const DT = 0.05;

function inSpans(t: number, spans: [number, number][], margin = DT * 2): boolean | null {
  for (const [start, end] of spans) {
    if (t >= start + margin && t < end - margin) return true;
    if (t >= start - margin && t < end + margin) return null; // boundary, skip
  }
  return false;
}

describe("PlaybackDriver", () => {
  let video: FakeMedia;
  let narration: FakeNarration;
  let driver: PlaybackDriver;

  beforeEach(() => {
    video = new FakeMedia();
    narration = new FakeNarration();
    driver = new PlaybackDriver(FIXTURE_PLAN, video, narration, {
      resolveNarrationUrl: (ref) => `/media/${ref}`,
    });
  });

  interface LogEntry {
    t: number;
    state: DriverState;
    muted: boolean;
    paused: boolean;
    mediaTime: number;
    mediaRate: number;
  }

  function playThrough(): LogEntry[] {
    const log: LogEntry[] = [];
    driver.start();
    for (let guard = 0; guard < 20000; guard++) {
      video.tick(DT);
      narration.tick(DT);
      const state = driver.advance(DT);
      if (state.finished) break;
      log.push({
        t: state.virtualTime,
        state,
        muted: video.muted,
        paused: video.paused,
        mediaTime: video.currentTime,
        mediaRate: video.playbackRate,
      });
    }
    return log;
  }

  it("shows the card overlay exactly during card spans", () => {
    for (const entry of playThrough()) {
      const expected = inSpans(entry.t, CARD_SPANS);
      if (expected === null) continue;
      expect(entry.state.cardText !== null, `t=${entry.t}`).toBe(expected);
    }
  });

  it("keeps narration active exactly during narrated groups", () => {
    const flat: [number, number][] = [[17, 32]]; // both group items, including the hold
    for (const entry of playThrough()) {
      const expected = inSpans(entry.t, flat);
      if (expected === null) continue;
      expect(entry.state.narrationActive, `t=${entry.t}`).toBe(expected);
    }
  });

  it("mutes the original audio exactly during narrated video, speeds the span", () => {
    for (const entry of playThrough()) {
      const narrated = inSpans(entry.t, [NARRATED_SPANS[0]]);
      if (narrated !== null && !entry.paused) {
        expect(entry.muted, `t=${entry.t}`).toBe(narrated);
      }
      const speeded = inSpans(entry.t, [[32, 37]]);
      if (speeded === true) {
        expect(entry.mediaRate).toBe(2);
        expect(entry.paused).toBe(false);
      }
    }
  });

  it("pauses the video on cards and holds, playing it otherwise", () => {
    for (const entry of playThrough()) {
      const frozen = inSpans(entry.t, [...CARD_SPANS, [27, 32]]);
      if (frozen === null) continue;
      expect(entry.paused, `t=${entry.t}`).toBe(frozen);
    }
  });

  it("holds the last frame of the previous group item", () => {
    driver.start();
    driver.seekVirtual(28); // inside the hold
    expect(video.currentTime).toBe(50);
    expect(video.paused).toBe(true);
    expect(driver.state.narrationActive).toBe(true);
  });

  it("starts narration at the group offset and corrects drift", () => {
    driver.start();
    driver.seekVirtual(22); // 5 s into group 1
    expect(narration.src).toBe("/media/audio/n1.wav");
    expect(narration.currentTime).toBeCloseTo(5, 6);

    narration.currentTime = 1.0; // stall far beyond the 250 ms tolerance
    video.tick(DT);
    driver.advance(DT);
    const expected = driver.state.virtualTime - 17;
    expect(Math.abs(narration.currentTime - expected)).toBeLessThanOrEqual(0.25 + 1e-6);
  });

  it("does not restart narration when crossing items inside one group", () => {
    driver.start();
    driver.seekVirtual(26.9); // just before the hold begins
    const srcBefore = narration.src;
    let plays = 0;
    const origPlay = narration.play.bind(narration);
    narration.play = () => {
      plays++;
      origPlay();
    };
    for (let i = 0; i < 10; i++) {
      video.tick(DT);
      narration.tick(DT);
      driver.advance(DT);
    }
    expect(driver.state.itemIndex).toBe(4);
    expect(narration.src).toBe(srcBefore);
    expect(plays).toBe(0); // still the same playback, never re-kicked
  });

  it("reports the active source span for summary highlighting", () => {
    driver.start();
    driver.seekVirtual(9);
    expect(driver.state.activeSource).toEqual({ start: 10, end: 20 });
    driver.seekVirtual(1);
    expect(driver.state.activeSource).toBeNull();
  });

  it("finishes after the last item and stops both elements", () => {
    const log = playThrough();
    expect(log[log.length - 1].t).toBeLessThanOrEqual(37);
    expect(driver.state.finished).toBe(true);
    expect(video.paused).toBe(true);
    expect(narration.paused).toBe(true);
  });

  it("rejects out-of-range seeks", () => {
    driver.start();
    expect(() => driver.seekVirtual(-1)).toThrow(RangeError);
    expect(() => driver.seekVirtual(37)).toThrow(RangeError);
  });

  it("virtual time tracks the media element within the drift tolerance", () => {
    for (const entry of playThrough()) {
      if (entry.paused || entry.state.activeSource === null) continue;
      const item = FIXTURE_PLAN.items[entry.state.itemIndex];
      const expectedVirtual =
        item.virtual_start + (entry.mediaTime - (item.source_start as number)) / item.rate;
      expect(Math.abs(entry.t - expectedVirtual)).toBeLessThanOrEqual(0.25);
    }
  });
});
