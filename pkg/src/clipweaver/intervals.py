"""Half-open time intervals and measure arithmetic.

All intervals are [start, end) in seconds. Half-open ranges make adjacency
and measure arithmetic exact: touching intervals share a boundary instant
that belongs to exactly one of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True, order=True)
class Interval:
    start: float
    end: float

    def __post_init__(self) -> None:
        if not self.start < self.end:
            raise ValueError(f"empty interval [{self.start}, {self.end})")

    @property
    def length(self) -> float:
        return self.end - self.start

    def contains(self, t: float) -> bool:
        return self.start <= t < self.end

    def intersection_length(self, other: "Interval") -> float:
        return max(0.0, min(self.end, other.end) - max(self.start, other.start))

    def covers(self, other: "Interval") -> bool:
        return self.start <= other.start and other.end <= self.end


def merge_overlaps(intervals: Iterable[Interval]) -> list[Interval]:
    """Collapse to the minimal sorted set of disjoint intervals with the same union.

    Touching intervals ([0,5), [5,9)) merge into one.
    """
    ordered = sorted(intervals)
    merged: list[Interval] = []
    for iv in ordered:
        if merged and iv.start <= merged[-1].end:
            if iv.end > merged[-1].end:
                merged[-1] = Interval(merged[-1].start, iv.end)
        else:
            merged.append(iv)
    return merged


def total_length(intervals: Iterable[Interval]) -> float:
    return sum(iv.length for iv in intervals)


def overlap_duration(set_a: Sequence[Interval], set_b: Sequence[Interval]) -> float:
    """Total length of the intersection of two internally-disjoint interval sets."""
    a = sorted(set_a)
    b = sorted(set_b)
    i = j = 0
    total = 0.0
    while i < len(a) and j < len(b):
        total += a[i].intersection_length(b[j])
        # advance whichever interval ends first
        if a[i].end <= b[j].end:
            i += 1
        else:
            j += 1
    return total


def complement_within(intervals: Sequence[Interval], start: float, end: float) -> list[Interval]:
    """Gaps of [start, end) not covered by the given disjoint intervals."""
    gaps: list[Interval] = []
    cursor = start
    for iv in sorted(intervals):
        if iv.start > cursor:
            gaps.append(Interval(cursor, min(iv.start, end)))
        cursor = max(cursor, iv.end)
        if cursor >= end:
            break
    if cursor < end:
        gaps.append(Interval(cursor, end))
    return gaps
