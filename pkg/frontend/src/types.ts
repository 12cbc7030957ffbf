/** Wire types mirroring the backend's versioned plan and session schemas. */

export const PLAN_SCHEMA_VERSION = 1;

export type ItemKind = "play_segment" | "title_card" | "narrated_group" | "speeded_span";

export type AudioDirective = "original" | "muted_narration" | "original_speeded" | "none";

export interface PlanItem {
  kind: ItemKind;
  virtual_start: number;
  virtual_end: number;
  source_start: number | null;
  source_end: number | null;
  /** Playback rate; 0 marks title cards and held frames (time passes, source does not). */
  rate: number;
  audio: AudioDirective;
  narration_ref: string | null;
  group_id: number | null;
  card_text: string | null;
  held_frame: number | null;
}

export interface PlaybackPlan {
  schema_version: number;
  query_id: string;
  mode: string;
  total_duration: number;
  items: PlanItem[];
}

export type SkimMode = "relevant_only" | "speed2x" | "speed5x";

export type QueryMode = "video_centric" | "narrative_centric";

export type SessionStatus = "pending" | "retrieving" | "narrating" | "ready" | "failed";

export interface SegmentView {
  start: number;
  end: number;
  relevant: boolean;
  title: string;
  summary: string;
}

export interface NarrativeView {
  overall_narrative: string;
  chunks: { chunk_id: number; narrative: string }[];
}

export interface SessionView {
  session_id: string;
  video_id: string;
  query: { query_id: string; video_id: string; text: string; mode: QueryMode };
  status: SessionStatus;
  stage: string;
  error: string;
  segments: SegmentView[];
  narrative?: NarrativeView;
  plan?: PlaybackPlan;
}

export interface VideoView {
  video_id: string;
  title: string;
  duration: number;
  frame_interval: number;
  frame_count: number;
  status: string;
}
