"""Relevance bitmaps, segment refinement, and sentence-boundary alignment.

Everything here is pure. The refinement pass applies two rules in a fixed
order: (1) gap-fill - a single irrelevant frame flanked by relevant frames
on both sides turns relevant; (2) isolate-drop - a relevant run of exactly
one frame turns irrelevant. Gap-fill runs first so a lone frame that a
filled gap would absorb into a longer run survives. One pass of each is a
fixed point.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .ingest import SentenceIndex
from .intervals import Interval, complement_within


@dataclass(frozen=True)
class RelevanceBitmap:
    frame_interval: float
    flags: tuple[bool, ...]

    def __post_init__(self) -> None:
        if self.frame_interval <= 0:
            raise ValueError("frame_interval must be positive")


@dataclass
class Segment:
    interval: Interval
    relevant: bool
    title: str = ""
    summary: str = ""
    sources: list[Interval] = field(default_factory=list)  # pre-merge spans, for payloads


def frames_to_bitmap(
    timestamps: list[float], relevant: set[float], frame_interval: float
) -> RelevanceBitmap:
    unknown = relevant - set(timestamps)
    if unknown:
        raise ValueError(f"relevant timestamps not in store: {sorted(unknown)}")
    return RelevanceBitmap(frame_interval, tuple(t in relevant for t in timestamps))


def refine_bitmap(bitmap: RelevanceBitmap) -> RelevanceBitmap:
    flags = bitmap.flags
    n = len(flags)

    # gap-fill, judged simultaneously on the input flags
    filled = list(flags)
    for i in range(1, n - 1):
        if not flags[i] and flags[i - 1] and flags[i + 1]:
            filled[i] = True

    # isolate-drop on the filled bitmap
    result = list(filled)
    for start, end in _true_runs(filled):
        if end - start == 1:
            result[start] = False

    return RelevanceBitmap(bitmap.frame_interval, tuple(result))


def _true_runs(flags: list[bool]) -> list[tuple[int, int]]:
    """Maximal runs of True as half-open index ranges."""
    runs: list[tuple[int, int]] = []
    start: int | None = None
    for i, flag in enumerate(flags):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(flags)))
    return runs


def bitmap_to_segments(bitmap: RelevanceBitmap, duration: float) -> list[Interval]:
    """Maximal relevant runs as time intervals, clamped to the video duration."""
    delta = bitmap.frame_interval
    out: list[Interval] = []
    for start, end in _true_runs(list(bitmap.flags)):
        lo = start * delta
        hi = min(end * delta, duration)
        if hi > lo:
            out.append(Interval(lo, hi))
    return out


def align_to_sentences(
    interval: Interval, index: SentenceIndex, duration: float
) -> Interval:
    """Extend a segment to the sentences covering its endpoints.

    The start snaps to the start of the sentence containing interval.start;
    the end snaps to the end of the sentence containing the last included
    instant (so an end exactly on a sentence boundary belongs to the earlier
    sentence). Endpoints in silence stay put. The result always contains the
    input and is clamped to [0, duration); applying twice equals once.
    """
    sentences = index.sentences
    starts = [s.start for s in sentences]

    new_start = interval.start
    i = bisect.bisect_right(starts, interval.start) - 1
    if i >= 0 and sentences[i].start <= interval.start < sentences[i].end:
        new_start = sentences[i].start

    new_end = interval.end
    j = bisect.bisect_left(starts, interval.end) - 1
    if j >= 0 and sentences[j].start < interval.end <= sentences[j].end:
        new_end = sentences[j].end

    return Interval(max(0.0, new_start), min(duration, new_end))


def segment_tiling(relevant: list[Interval], duration: float) -> list[Segment]:
    """Chronological tiling of the whole video into relevant/irrelevant segments."""
    tiles = [Segment(iv, relevant=True) for iv in relevant]
    tiles += [Segment(gap, relevant=False) for gap in complement_within(relevant, 0.0, duration)]
    tiles.sort(key=lambda seg: seg.interval.start)
    return tiles
