/**
 * Client-side unified timeline: the same piecewise-linear mapping the backend
 * compiles into every plan. Virtual time tiles [0, total); within a video
 * item the source coordinate is original-video time, within cards and held
 * frames it is item-local time.
 */

import type { PlanItem, PlaybackPlan } from "./types.js";

export interface SourcePoint {
  itemIndex: number;
  /** Original-video seconds for video items; item-local seconds otherwise. */
  sourceTime: number;
}

export function isVideoItem(item: PlanItem): boolean {
  return item.rate > 0 && item.source_start !== null;
}

/** Rejects plans whose items do not tile [0, total_duration) exactly. */
export function validatePlan(plan: PlaybackPlan): void {
  if (plan.schema_version !== 1) {
    throw new Error(`unsupported plan schema version ${plan.schema_version}`);
  }
  let cursor = 0;
  for (const item of plan.items) {
    if (item.virtual_start !== cursor) {
      throw new Error(
        `plan item starts at ${item.virtual_start}, expected ${cursor}`
      );
    }
    if (item.virtual_end <= item.virtual_start) {
      throw new Error("plan item has an empty virtual span");
    }
    cursor = item.virtual_end;
  }
  if (cursor !== plan.total_duration) {
    throw new Error(
      `plan items end at ${cursor}, total_duration is ${plan.total_duration}`
    );
  }
}

export function itemAt(plan: PlaybackPlan, virtualTime: number): number {
  if (virtualTime < 0 || virtualTime >= plan.total_duration) {
    throw new RangeError(
      `virtual time ${virtualTime} outside [0, ${plan.total_duration})`
    );
  }
  // plans are small; a linear scan beats keeping a parallel index honest
  for (let i = plan.items.length - 1; i >= 0; i--) {
    if (plan.items[i].virtual_start <= virtualTime) return i;
  }
  throw new RangeError(`no item at virtual time ${virtualTime}`);
}

export function virtualToSource(plan: PlaybackPlan, virtualTime: number): SourcePoint {
  const itemIndex = itemAt(plan, virtualTime);
  const item = plan.items[itemIndex];
  const offset = virtualTime - item.virtual_start;
  if (isVideoItem(item)) {
    return { itemIndex, sourceTime: (item.source_start as number) + offset * item.rate };
  }
  return { itemIndex, sourceTime: offset };
}

export function sourceToVirtual(
  plan: PlaybackPlan,
  itemIndex: number,
  sourceTime: number
): number {
  const item = plan.items[itemIndex];
  if (item === undefined) {
    throw new RangeError(`item index ${itemIndex} outside the plan`);
  }
  if (isVideoItem(item)) {
    const start = item.source_start as number;
    const end = item.source_end as number;
    if (sourceTime < start || sourceTime > end) {
      throw new RangeError(`source time ${sourceTime} outside [${start}, ${end}]`);
    }
    return item.virtual_start + (sourceTime - start) / item.rate;
  }
  const length = item.virtual_end - item.virtual_start;
  if (sourceTime < 0 || sourceTime > length) {
    throw new RangeError(`local time ${sourceTime} outside [0, ${length}]`);
  }
  return item.virtual_start + sourceTime;
}
