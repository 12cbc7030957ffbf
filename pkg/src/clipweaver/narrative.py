"""Narrative artifacts: titles, summaries, the chunked narrative, playback
order, chunk assignment, and title cards.

Every structured provider output is validated and, on violation, reprompted
exactly once. What happens after a second failure differs per artifact:
the narrative and the chunk assignment raise (the caller decides), while
the playback order falls back to chronological order so playback can never
hard-fail on a flaky model. Unassigned segments are appended to the nearest
chunk rather than dropped.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Sequence

from .annotation import AnnotationStore
from .errors import AssignmentError, NarrativeError, ProviderError, SchemaError
from .gateway.core import CompletionRequest, Gateway
from .ingest import TimedWord
from .intervals import Interval
from .segments import Segment
from .text import truncate_words, word_count

logger = logging.getLogger(__name__)

NARRATIVE_WORD_LIMIT = 300
SUMMARY_WORD_LIMIT = 40


@dataclass(frozen=True)
class NarrativeChunk:
    chunk_id: int
    narrative: str


@dataclass(frozen=True)
class Narrative:
    overall: str
    chunks: tuple[NarrativeChunk, ...]

    def chunk_json(self) -> str:
        return json.dumps(
            [{"chunk_id": c.chunk_id, "narrative": c.narrative} for c in self.chunks]
        )


@dataclass(frozen=True)
class OrderedSegment:
    interval: Interval
    playback_order: int


@dataclass(frozen=True)
class PlaybackOrder:
    entries: tuple[OrderedSegment, ...]  # sorted by playback_order

    def intervals_in_order(self) -> list[Interval]:
        return [e.interval for e in self.entries]


@dataclass(frozen=True)
class AssignedChunk:
    chunk_id: int
    narrative: str
    segments: tuple[Interval, ...]


@dataclass(frozen=True)
class ChunkAssignment:
    chunks: tuple[AssignedChunk, ...]


@dataclass(frozen=True)
class TitleCard:
    after_segment: int  # index in playback order of the preceding segment; -1 opens the plan
    text: str
    display_duration: float

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("title card text must be non-empty")
        if self.display_duration <= 0:
            raise ValueError("title card duration must be positive")


# ---------------------------------------------------------------------------
# Segment payloads handed to the model
# ---------------------------------------------------------------------------


def describe_segments(
    segments: Sequence[Segment],
    store: AnnotationStore,
    words: Sequence[TimedWord] | None = None,
) -> str:
    """One line per segment, a stable layout shared with the rule-based fake:

    ``Segment <n> [start=<s>, end=<e>] | title: ... | summary: ... | frames: ... | transcript: ...``

    With word timings the transcript is the segment's own span; otherwise it
    falls back to the contained frames' transcript windows.
    """
    lines = []
    for n, seg in enumerate(segments, start=1):
        iv = seg.interval
        frames = [
            a.description for a in store.annotations
            if iv.start <= a.timestamp < iv.end
        ]
        if words is not None:
            spoken = [w.text for w in words if w.end >= iv.start and w.start < iv.end]
            transcript = " ".join(spoken)
        else:
            transcript = " ".join(
                a.transcript_window for a in store.annotations
                if iv.start <= a.timestamp < iv.end
            )
        lines.append(
            f"Segment {n} [start={iv.start!r}, end={iv.end!r}]"
            f" | title: {_oneline(seg.title)}"
            f" | summary: {_oneline(seg.summary)}"
            f" | frames: {_oneline(' / '.join(frames))}"
            f" | transcript: {_oneline(transcript)}"
        )
    return "\n".join(lines)


def _oneline(text: str) -> str:
    return " ".join(text.split())


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------

_FENCE = re.compile(r"```[a-z]*\n?|```", re.IGNORECASE)


def _extract_json(raw: str) -> dict:
    text = _FENCE.sub("", raw).strip()
    start = text.find("{")
    end = text.rfind("}")
    if start < 0 or end <= start:
        raise SchemaError(f"no JSON object in response: {raw[:120]!r}")
    try:
        data = json.loads(text[start:end + 1])
    except json.JSONDecodeError as exc:
        raise SchemaError(f"response is not valid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise SchemaError("response JSON is not an object")
    return data


def _strip_ws(text: str) -> str:
    return re.sub(r"\s+", "", text)


def parse_narrative(raw: str) -> Narrative:
    data = _extract_json(raw)
    if "overall_narrative" not in data or "chunks" not in data:
        raise SchemaError("narrative JSON must carry overall_narrative and chunks")
    overall = str(data["overall_narrative"])
    raw_chunks = data["chunks"]
    if not isinstance(raw_chunks, list) or not raw_chunks:
        raise SchemaError("chunks must be a non-empty list")
    try:
        chunks = tuple(
            NarrativeChunk(int(c["chunk_id"]), str(c["narrative"])) for c in raw_chunks
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed chunk entry: {exc}") from exc

    ids = [c.chunk_id for c in chunks]
    if ids != list(range(1, len(ids) + 1)):
        raise SchemaError(f"chunk ids must be consecutive from 1, got {ids}")
    if _strip_ws("".join(c.narrative for c in chunks)) != _strip_ws(overall):
        raise NarrativeError("chunk texts do not reassemble the overall narrative")
    if word_count(overall) > NARRATIVE_WORD_LIMIT:
        raise NarrativeError(
            f"narrative is {word_count(overall)} words, limit {NARRATIVE_WORD_LIMIT}"
        )
    return Narrative(overall, chunks)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def summarize_segments(
    segments: list[Segment],
    store: AnnotationStore,
    gateway: Gateway,
    words: Sequence[TimedWord] | None = None,
) -> list[tuple[float, str]]:
    """Fill title + summary on every segment (relevant and irrelevant) in place.

    Returns the failure report: (segment start, reason) per segment whose
    response stayed unusable; those fall back to a positional title.
    """
    failures: list[tuple[float, str]] = []
    for seg in segments:
        payload = describe_segments([seg], store, words)
        request = CompletionRequest(
            template_name="segment_summary",
            bindings={
                "video_title": store.meta.title,
                "start": repr(seg.interval.start),
                "end": repr(seg.interval.end),
                "segment_text": payload,
            },
        )
        parsed: dict | None = None
        error = ""
        for _ in range(2):  # one retry for parse failures or over-length summaries
            try:
                candidate = _extract_json(gateway.complete(request))
                if "title" not in candidate or "summary" not in candidate:
                    raise SchemaError("summary JSON must carry title and summary")
            except (SchemaError, ProviderError) as exc:
                error = str(exc)
                continue
            parsed = candidate
            if word_count(str(candidate["summary"])) <= SUMMARY_WORD_LIMIT:
                break
        if parsed is None:
            failures.append((seg.interval.start, error))
            seg.title = _fallback_title(seg)
            seg.summary = ""
            continue
        summary = str(parsed["summary"]).strip()
        if word_count(summary) > SUMMARY_WORD_LIMIT:
            logger.warning(
                "summary for segment at %s still %d words after retry; truncating",
                seg.interval.start, word_count(summary),
            )
            summary = truncate_words(summary, SUMMARY_WORD_LIMIT)
        seg.title = str(parsed["title"]).strip() or _fallback_title(seg)
        seg.summary = summary
    return failures


def _fallback_title(seg: Segment) -> str:
    return f"Segment {seg.interval.start:g}-{seg.interval.end:g}s"


def generate_narrative(
    relevant_segments: list[Segment],
    user_interest: str,
    store: AnnotationStore,
    gateway: Gateway,
    words: Sequence[TimedWord] | None = None,
) -> Narrative:
    if not relevant_segments:
        raise ValueError("narrative generation needs at least one relevant segment")
    request = CompletionRequest(
        template_name="narrative",
        bindings={
            "user_interest": user_interest,
            "segments": describe_segments(relevant_segments, store, words),
        },
    )
    last: Exception | None = None
    for attempt in range(2):
        try:
            return parse_narrative(gateway.complete(request))
        except (SchemaError, NarrativeError) as exc:
            last = exc
            if attempt == 0:
                logger.warning("narrative rejected (%s); reprompting once", exc)
    assert last is not None
    raise last


def order_segments(
    narrative: Narrative,
    segments: list[Segment],
    store: AnnotationStore,
    gateway: Gateway,
    words: Sequence[TimedWord] | None = None,
) -> PlaybackOrder:
    """Narrative-supporting playback order; falls back to chronological order."""
    spans = {(s.interval.start, s.interval.end): s.interval for s in segments}
    request = CompletionRequest(
        template_name="playback_order",
        bindings={
            "overall_narrative": narrative.overall,
            "segments": describe_segments(segments, store, words),
        },
    )
    for attempt in range(2):
        try:
            data = _extract_json(gateway.complete(request))
            return PlaybackOrder(tuple(_parse_order(data, spans)))
        except (SchemaError, ProviderError) as exc:
            if attempt == 0:
                logger.warning("playback order rejected (%s); reprompting once", exc)
            else:
                logger.warning(
                    "playback order invalid after reprompt (%s); "
                    "falling back to chronological order", exc,
                )
    chronological = sorted(spans.values())
    return PlaybackOrder(tuple(
        OrderedSegment(iv, i + 1) for i, iv in enumerate(chronological)
    ))


def _parse_order(
    data: dict, spans: dict[tuple[float, float], Interval]
) -> list[OrderedSegment]:
    raw = data.get("segments")
    if not isinstance(raw, list):
        raise SchemaError("playback order JSON must carry a segments list")
    try:
        triples = [
            (float(e["start"]), float(e["end"]), int(e["playback_order"])) for e in raw
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed playback order entry: {exc}") from exc

    listed = sorted((s, e) for s, e, _ in triples)
    if listed != sorted(spans):
        raise SchemaError(
            "playback order must list every provided segment exactly once "
            "with start/end unmodified"
        )
    orders = sorted(o for _, _, o in triples)
    if orders != list(range(1, len(triples) + 1)):
        raise SchemaError(f"playback_order values must be a permutation of 1..n, got {orders}")

    entries = [OrderedSegment(spans[(s, e)], o) for s, e, o in triples]
    entries.sort(key=lambda entry: entry.playback_order)
    return entries


def assign_chunks(
    narrative: Narrative,
    segments: list[Segment],
    store: AnnotationStore,
    gateway: Gateway,
    words: Sequence[TimedWord] | None = None,
) -> ChunkAssignment:
    """Exclusive chunk-to-segment mapping; empty chunks are allowed, segments the
    model forgot are appended to the nearest chunk by time order."""
    spans = {(s.interval.start, s.interval.end): s.interval for s in segments}
    request = CompletionRequest(
        template_name="chunk_assignment",
        bindings={
            "overall_narrative": narrative.chunk_json(),
            "segments": describe_segments(segments, store, words),
        },
    )
    last: Exception | None = None
    for attempt in range(2):
        try:
            data = _extract_json(gateway.complete(request))
            assigned = _parse_assignment(data, narrative, spans)
            return _append_unassigned(assigned, narrative, spans)
        except (SchemaError, ProviderError) as exc:
            last = exc
            if attempt == 0:
                logger.warning("chunk assignment rejected (%s); reprompting once", exc)
    raise AssignmentError(f"chunk assignment invalid after reprompt: {last}")


def _parse_assignment(
    data: dict, narrative: Narrative, spans: dict[tuple[float, float], Interval]
) -> dict[int, list[Interval]]:
    raw = data.get("chunks")
    if not isinstance(raw, list):
        raise SchemaError("assignment JSON must carry a chunks list")
    expected_ids = [c.chunk_id for c in narrative.chunks]
    seen_ids: list[int] = []
    assigned: dict[int, list[Interval]] = {}
    used: set[tuple[float, float]] = set()
    for entry in raw:
        try:
            chunk_id = int(entry["chunk_id"])
            seg_list = entry.get("segments", [])
            pairs = [(float(s["start"]), float(s["end"])) for s in seg_list]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed assignment entry: {exc}") from exc
        seen_ids.append(chunk_id)
        intervals: list[Interval] = []
        for pair in pairs:
            if pair not in spans:
                raise SchemaError(
                    f"assigned segment {pair} does not match any provided segment"
                )
            if pair in used:
                raise SchemaError(f"segment {pair} assigned to more than one chunk")
            used.add(pair)
            intervals.append(spans[pair])
        assigned[chunk_id] = intervals
    if sorted(seen_ids) != sorted(expected_ids):
        raise SchemaError(
            f"assignment chunk ids {sorted(seen_ids)} do not match narrative "
            f"chunk ids {sorted(expected_ids)}"
        )
    return assigned


def _append_unassigned(
    assigned: dict[int, list[Interval]],
    narrative: Narrative,
    spans: dict[tuple[float, float], Interval],
) -> ChunkAssignment:
    used = {(iv.start, iv.end) for ivs in assigned.values() for iv in ivs}
    leftovers = sorted(iv for key, iv in spans.items() if key not in used)
    for iv in leftovers:
        target = _nearest_chunk(iv, assigned) or narrative.chunks[0].chunk_id
        logger.warning(
            "segment [%s, %s) was left unassigned; appending to chunk %d",
            iv.start, iv.end, target,
        )
        assigned[target].append(iv)
    return ChunkAssignment(tuple(
        AssignedChunk(c.chunk_id, c.narrative, tuple(assigned[c.chunk_id]))
        for c in narrative.chunks
    ))


def _nearest_chunk(iv: Interval, assigned: dict[int, list[Interval]]) -> int | None:
    mid = (iv.start + iv.end) / 2
    best: tuple[float, int] | None = None
    for chunk_id, intervals in assigned.items():
        for other in intervals:
            distance = abs((other.start + other.end) / 2 - mid)
            if best is None or (distance, chunk_id) < best:
                best = (distance, chunk_id)
    return best[1] if best else None


def generate_title_card(
    previous: Segment | None,
    upcoming: Segment,
    gateway: Gateway,
    display_duration: float,
    after_segment: int,
) -> TitleCard:
    """Transition text between consecutive segments in playback order.

    A provider failure degrades to a plain "Next:" card so playback always
    has something to show.
    """
    request = CompletionRequest(
        template_name="title_card",
        bindings={
            "prev_title": previous.title if previous else "",
            "prev_summary": previous.summary if previous else "",
            "next_title": upcoming.title,
            "next_summary": upcoming.summary,
        },
    )
    try:
        text = gateway.complete(request).strip()
    except ProviderError as exc:
        logger.warning("title card generation failed (%s); using fallback text", exc)
        text = ""
    if not text:
        text = f"Next: {upcoming.title}"
    return TitleCard(after_segment=after_segment, text=text, display_duration=display_duration)
