/**
 * Unified-timeline scrubber: one block per plan item, widths proportional to
 * virtual spans, plus a moving playhead. The original video's timeline never
 * appears; scrubbing seeks in plan coordinates.
 */

import type { PlanItem, PlaybackPlan } from "./types.js";

const BLOCK_CLASS: Record<PlanItem["kind"], string> = {
  play_segment: "block-relevant",
  narrated_group: "block-relevant",
  title_card: "block-card",
  speeded_span: "block-irrelevant",
};

export class Scrubber {
  private blocks: HTMLDivElement[] = [];
  private playhead: HTMLDivElement;
  private track: HTMLDivElement;

  constructor(
    container: HTMLElement,
    private plan: PlaybackPlan,
    private widthPx: number,
    private onSeek?: (virtualTime: number) => void
  ) {
    this.track = document.createElement("div");
    this.track.className = "scrubber-track";
    this.track.style.width = `${widthPx}px`;
    this.track.style.position = "relative";

    for (const item of plan.items) {
      const block = document.createElement("div");
      block.className = `scrubber-block ${BLOCK_CLASS[item.kind]}`;
      const fraction = (item.virtual_end - item.virtual_start) / plan.total_duration;
      block.style.width = `${fraction * widthPx}px`;
      block.title = item.card_text ?? item.kind;
      this.track.appendChild(block);
      this.blocks.push(block);
    }

    this.playhead = document.createElement("div");
    this.playhead.className = "scrubber-playhead";
    this.track.appendChild(this.playhead);

    this.track.addEventListener("click", (event) => this.handleClick(event));
    container.appendChild(this.track);
  }

  get blockElements(): readonly HTMLDivElement[] {
    return this.blocks;
  }

  setPosition(virtualTime: number): void {
    const clamped = Math.max(0, Math.min(virtualTime, this.plan.total_duration));
    const x = (clamped / this.plan.total_duration) * this.widthPx;
    this.playhead.style.left = `${x}px`;
  }

  private handleClick(event: MouseEvent): void {
    if (!this.onSeek) return;
    const rect = this.track.getBoundingClientRect();
    const fraction = (event.clientX - rect.left) / this.widthPx;
    const t = Math.max(
      0,
      Math.min(fraction * this.plan.total_duration, this.plan.total_duration * (1 - 1e-9))
    );
    this.onSeek(t);
  }

  destroy(): void {
    this.track.remove();
    this.blocks = [];
  }
}
