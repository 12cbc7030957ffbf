"""Playback plans: compiled item sequences on a unified virtual timeline.

A plan's items tile [0, total_duration) exactly: each item's virtual span
starts where the previous one ended. Within an item the mapping between
virtual time and the item's source coordinate is linear:

* video items (rate > 0): source = source_start + offset * rate
* title cards and held frames (rate == 0): the source coordinate is the
  item-local time, exactly as for card text display

Narrative-centric groups match video length to narration length by scaling
the playback rate within configured bounds; narration overflowing the
slowest rate plays over the group's held last frame.
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import PlanRangeError
from .narrative import ChunkAssignment, PlaybackOrder, TitleCard
from .segments import Segment

logger = logging.getLogger(__name__)

PLAN_SCHEMA_VERSION = 1

KIND_PLAY_SEGMENT = "play_segment"
KIND_TITLE_CARD = "title_card"
KIND_NARRATED_GROUP = "narrated_group"
KIND_SPEEDED_SPAN = "speeded_span"

AUDIO_ORIGINAL = "original"
AUDIO_MUTED_NARRATION = "muted_narration"
AUDIO_ORIGINAL_SPEEDED = "original_speeded"
AUDIO_NONE = "none"

SKIM_RELEVANT_ONLY = "relevant_only"
SKIM_SPEED_2X = "speed2x"
SKIM_SPEED_5X = "speed5x"
SKIM_MODES = (SKIM_RELEVANT_ONLY, SKIM_SPEED_2X, SKIM_SPEED_5X)

DEFAULT_RATE_BOUNDS = (0.75, 1.25)
_EPSILON = 1e-9


@dataclass(frozen=True)
class PlanItem:
    kind: str
    virtual_start: float
    virtual_end: float
    source_start: float | None = None
    source_end: float | None = None
    rate: float = 1.0  # 0.0 for cards and held frames (time passes, source does not)
    audio: str = AUDIO_ORIGINAL
    narration_ref: str | None = None
    group_id: int | None = None
    card_text: str | None = None
    held_frame: float | None = None  # source instant to freeze; None on a slate

    @property
    def virtual_length(self) -> float:
        return self.virtual_end - self.virtual_start

    @property
    def is_video(self) -> bool:
        return self.rate > 0 and self.source_start is not None


@dataclass(frozen=True)
class ChunkNarration:
    audio_ref: str
    duration: float


@dataclass(frozen=True)
class PlaybackPlan:
    query_id: str
    mode: str
    items: tuple[PlanItem, ...]
    total_duration: float

    def __post_init__(self) -> None:
        check_tiling(self)


def check_tiling(plan: "PlaybackPlan") -> None:
    """Virtual spans must be sorted, adjacent, disjoint, and sum to the total."""
    cursor = 0.0
    for item in plan.items:
        if item.virtual_start != cursor:
            raise ValueError(
                f"virtual span of {item.kind} starts at {item.virtual_start}, "
                f"expected {cursor}"
            )
        if item.virtual_end <= item.virtual_start:
            raise ValueError(f"empty virtual span on {item.kind}")
        cursor = item.virtual_end
    if cursor != plan.total_duration:
        raise ValueError(f"items end at {cursor}, total_duration is {plan.total_duration}")


class _Builder:
    """Accumulates items on a cursor so tiling holds by construction."""

    def __init__(self) -> None:
        self.cursor = 0.0
        self.items: list[PlanItem] = []

    def add(self, length: float, **kwargs) -> None:
        item = PlanItem(
            virtual_start=self.cursor, virtual_end=self.cursor + length, **kwargs
        )
        self.items.append(item)
        self.cursor = item.virtual_end

    def plan(self, query_id: str, mode: str) -> PlaybackPlan:
        return PlaybackPlan(query_id, mode, tuple(self.items), self.cursor)


# ---------------------------------------------------------------------------
# Compilers
# ---------------------------------------------------------------------------


def compile_video_centric(
    query_id: str,
    order: PlaybackOrder,
    cards: Sequence[TitleCard] | None = None,
) -> PlaybackPlan:
    """Reordered original-audio segments, each introduced by a title card.

    ``cards`` holds one card per segment in playback order (an opening card,
    then one between each adjacent pair); None compiles segments only.
    """
    ordered = order.intervals_in_order()
    if cards is not None and len(cards) != len(ordered):
        raise ValueError(f"need {len(ordered)} cards (one per segment), got {len(cards)}")
    builder = _Builder()
    for i, iv in enumerate(ordered):
        if cards is not None:
            card = cards[i]
            builder.add(
                card.display_duration,
                kind=KIND_TITLE_CARD,
                rate=0.0,
                audio=AUDIO_NONE,
                card_text=card.text,
            )
        builder.add(
            iv.length,
            kind=KIND_PLAY_SEGMENT,
            source_start=iv.start,
            source_end=iv.end,
            rate=1.0,
            audio=AUDIO_ORIGINAL,
        )
    return builder.plan(query_id, "video_centric")


def compile_narrative_centric(
    query_id: str,
    assignment: ChunkAssignment,
    narrations: Mapping[int, ChunkNarration | None],
    rate_bounds: tuple[float, float] = DEFAULT_RATE_BOUNDS,
) -> PlaybackPlan:
    """One muted, narrated group per chunk, video length matched to narration.

    rate = clamp(video_len / narration_len, *rate_bounds). Narration longer
    than the slowest playback holds the group's last frame; narration missing
    (synthesis failed) falls back to original audio at normal rate. A chunk
    with no segments narrates over the previous group's held last frame, or a
    slate when it opens the plan.
    """
    lo, hi = rate_bounds
    if not 0 < lo <= hi:
        raise ValueError(f"invalid rate bounds {rate_bounds}")
    builder = _Builder()
    previous_end: float | None = None

    for chunk in assignment.chunks:
        narration = narrations.get(chunk.chunk_id)
        if not chunk.segments:
            if narration is None:
                logger.warning(
                    "chunk %d has no segments and no narration; skipped", chunk.chunk_id
                )
                continue
            builder.add(
                narration.duration,
                kind=KIND_NARRATED_GROUP,
                rate=0.0,
                audio=AUDIO_MUTED_NARRATION,
                narration_ref=narration.audio_ref,
                group_id=chunk.chunk_id,
                held_frame=previous_end,
                card_text=None if previous_end is not None else chunk.narrative,
            )
            continue

        video_length = sum(iv.length for iv in chunk.segments)
        if narration is None:
            logger.warning(
                "chunk %d has no narration; group falls back to original audio",
                chunk.chunk_id,
            )
            rate, audio, ref = 1.0, AUDIO_ORIGINAL, None
        else:
            rate = min(hi, max(lo, video_length / narration.duration))
            audio, ref = AUDIO_MUTED_NARRATION, narration.audio_ref
        for iv in chunk.segments:
            builder.add(
                iv.length / rate,
                kind=KIND_NARRATED_GROUP,
                source_start=iv.start,
                source_end=iv.end,
                rate=rate,
                audio=audio,
                narration_ref=ref,
                group_id=chunk.chunk_id,
            )
        previous_end = chunk.segments[-1].end
        if narration is not None:
            spillover = narration.duration - video_length / rate
            if spillover > _EPSILON:
                builder.add(
                    spillover,
                    kind=KIND_NARRATED_GROUP,
                    rate=0.0,
                    audio=AUDIO_MUTED_NARRATION,
                    narration_ref=ref,
                    group_id=chunk.chunk_id,
                    held_frame=previous_end,
                )
    return builder.plan(query_id, "narrative_centric")


def compile_skim(
    query_id: str,
    tiling: Sequence[Segment],
    mode: str,
) -> PlaybackPlan:
    """Prototype skim modes over the full chronological tiling of the video."""
    if mode not in SKIM_MODES:
        raise ValueError(f"unknown skim mode {mode!r}")
    factor = {SKIM_SPEED_2X: 2.0, SKIM_SPEED_5X: 5.0}.get(mode)
    builder = _Builder()
    for seg in tiling:
        iv = seg.interval
        if seg.relevant:
            builder.add(
                iv.length,
                kind=KIND_PLAY_SEGMENT,
                source_start=iv.start,
                source_end=iv.end,
                rate=1.0,
                audio=AUDIO_ORIGINAL,
            )
        elif factor is not None:
            builder.add(
                iv.length / factor,
                kind=KIND_SPEEDED_SPAN,
                source_start=iv.start,
                source_end=iv.end,
                rate=factor,
                audio=AUDIO_ORIGINAL_SPEEDED,
            )
    return builder.plan(query_id, f"skim_{mode}")


# ---------------------------------------------------------------------------
# Unified timeline mapping
# ---------------------------------------------------------------------------


def virtual_to_source(plan: PlaybackPlan, t_virtual: float) -> tuple[int, float]:
    """Map a virtual instant to (item index, source coordinate).

    For video items the source coordinate is original-video time; for cards
    and held frames it is item-local time.
    """
    if not 0 <= t_virtual < plan.total_duration:
        raise PlanRangeError(
            f"virtual time {t_virtual} outside [0, {plan.total_duration})"
        )
    starts = [item.virtual_start for item in plan.items]
    index = bisect.bisect_right(starts, t_virtual) - 1
    item = plan.items[index]
    offset = t_virtual - item.virtual_start
    if item.is_video:
        return index, item.source_start + offset * item.rate
    return index, offset


def source_to_virtual(plan: PlaybackPlan, index: int, t_source: float) -> float:
    """Inverse of virtual_to_source for a given item."""
    if not 0 <= index < len(plan.items):
        raise PlanRangeError(f"item index {index} outside the plan")
    item = plan.items[index]
    if item.is_video:
        if not item.source_start <= t_source <= item.source_end:
            raise PlanRangeError(
                f"source time {t_source} outside item {index} "
                f"[{item.source_start}, {item.source_end}]"
            )
        return item.virtual_start + (t_source - item.source_start) / item.rate
    if not 0 <= t_source <= item.virtual_length:
        raise PlanRangeError(
            f"local time {t_source} outside item {index} of length {item.virtual_length}"
        )
    return item.virtual_start + t_source


# ---------------------------------------------------------------------------
# Wire schema (consumed by the web player)
# ---------------------------------------------------------------------------


def plan_to_dict(plan: PlaybackPlan) -> dict:
    return {
        "schema_version": PLAN_SCHEMA_VERSION,
        "query_id": plan.query_id,
        "mode": plan.mode,
        "total_duration": plan.total_duration,
        "items": [
            {
                "kind": item.kind,
                "virtual_start": item.virtual_start,
                "virtual_end": item.virtual_end,
                "source_start": item.source_start,
                "source_end": item.source_end,
                "rate": item.rate,
                "audio": item.audio,
                "narration_ref": item.narration_ref,
                "group_id": item.group_id,
                "card_text": item.card_text,
                "held_frame": item.held_frame,
            }
            for item in plan.items
        ],
    }


def plan_from_dict(data: dict) -> PlaybackPlan:
    version = data.get("schema_version")
    if version != PLAN_SCHEMA_VERSION:
        raise ValueError(f"unsupported plan schema version {version!r}")
    items = tuple(
        PlanItem(
            kind=raw["kind"],
            virtual_start=float(raw["virtual_start"]),
            virtual_end=float(raw["virtual_end"]),
            source_start=None if raw["source_start"] is None else float(raw["source_start"]),
            source_end=None if raw["source_end"] is None else float(raw["source_end"]),
            rate=float(raw["rate"]),
            audio=raw["audio"],
            narration_ref=raw.get("narration_ref"),
            group_id=raw.get("group_id"),
            card_text=raw.get("card_text"),
            held_frame=raw.get("held_frame"),
        )
        for raw in data["items"]
    )
    return PlaybackPlan(
        query_id=data["query_id"],
        mode=data["mode"],
        items=items,
        total_duration=float(data["total_duration"]),
    )
