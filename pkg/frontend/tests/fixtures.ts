/** Shared fixture plan and fake media elements for the component tests. */

import type { MediaLike, NarrationLike } from "../src/driver.js";
import type { PlanItem, PlaybackPlan, SessionView } from "../src/types.js";

function item(partial: Partial<PlanItem> & Pick<PlanItem, "kind" | "virtual_start" | "virtual_end">): PlanItem {
  return {
    source_start: null,
    source_end: null,
    rate: 0,
    audio: "none",
    narration_ref: null,
    group_id: null,
    card_text: null,
    held_frame: null,
    ...partial,
  };
}

/**
 * A mixed plan exercising every item kind:
 *   [0,4)   title card
 *   [4,14)  segment [10,20) original audio
 *   [14,17) title card
 *   [17,27) narrated group 1, segment [40,50), muted
 *   [27,32) narrated group 1, held last frame
 *   [32,37) speeded span [60,70) at 2x
 */
export const FIXTURE_PLAN: PlaybackPlan = {
  schema_version: 1,
  query_id: "q-fixture",
  mode: "video_centric",
  total_duration: 37,
  items: [
    item({ kind: "title_card", virtual_start: 0, virtual_end: 4, card_text: "Up next: Battery" }),
    item({
      kind: "play_segment", virtual_start: 4, virtual_end: 14,
      source_start: 10, source_end: 20, rate: 1, audio: "original",
    }),
    item({ kind: "title_card", virtual_start: 14, virtual_end: 17, card_text: "Up next: Camera" }),
    item({
      kind: "narrated_group", virtual_start: 17, virtual_end: 27,
      source_start: 40, source_end: 50, rate: 1, audio: "muted_narration",
      narration_ref: "audio/n1.wav", group_id: 1,
    }),
    item({
      kind: "narrated_group", virtual_start: 27, virtual_end: 32,
      audio: "muted_narration", narration_ref: "audio/n1.wav", group_id: 1,
      held_frame: 50,
    }),
    item({
      kind: "speeded_span", virtual_start: 32, virtual_end: 37,
      source_start: 60, source_end: 70, rate: 2, audio: "original_speeded",
    }),
  ],
};

export const CARD_SPANS: [number, number][] = [[0, 4], [14, 17]];
export const NARRATED_SPANS: [number, number][] = [[17, 27], [27, 32]];

export class FakeMedia implements MediaLike {
  currentTime = 0;
  playbackRate = 1;
  muted = false;
  paused = true;
  seeks: number[] = [];

  play(): void {
    this.paused = false;
  }

  pause(): void {
    this.paused = true;
  }

  /** Simulates natural playback between driver ticks. */
  tick(dt: number): void {
    if (!this.paused) {
      this.currentTime += dt * this.playbackRate;
    }
  }
}

export class FakeNarration extends FakeMedia implements NarrationLike {
  src = "";
}

export const FIXTURE_SESSION: SessionView = {
  session_id: "s-fixture",
  video_id: "demo",
  query: { query_id: "s-fixture", video_id: "demo", text: "battery life", mode: "video_centric" },
  status: "ready",
  stage: "",
  error: "",
  segments: [
    { start: 0, end: 10, relevant: false, title: "Opening", summary: "Intro talk." },
    { start: 10, end: 20, relevant: true, title: "Battery", summary: "Battery results." },
    { start: 20, end: 40, relevant: false, title: "Middle", summary: "Design chatter." },
    { start: 40, end: 50, relevant: true, title: "Camera", summary: "Camera tests." },
    { start: 50, end: 70, relevant: false, title: "Wrap-up", summary: "Closing words." },
  ],
  narrative: {
    overall_narrative: "Part 1 covers the battery. Part 2 covers the camera.",
    chunks: [
      { chunk_id: 1, narrative: "Part 1 covers the battery." },
      { chunk_id: 2, narrative: "Part 2 covers the camera." },
    ],
  },
  plan: FIXTURE_PLAN,
};
