"""Query-driven frame relevance via batched vision-language calls.

Frames go to the model in disjoint timestamp-ordered batches; each batch
answers with a bracketed timestamp list. A batch whose answer cannot be
parsed gets exactly one reprompt, then contributes nothing. Returned
timestamps snap to the sampled grid within half a second and must belong to
the batch that produced them.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .annotation import AnnotationStore, FrameAnnotation
from .errors import ProviderError, RetrievalError, TimestampParseError
from .gateway.core import CompletionRequest, Gateway

logger = logging.getLogger(__name__)

MODE_VIDEO_CENTRIC = "video_centric"
MODE_NARRATIVE_CENTRIC = "narrative_centric"
QUERY_MODES = (MODE_VIDEO_CENTRIC, MODE_NARRATIVE_CENTRIC)

DEFAULT_BATCH_SIZE = 100  # frames per call: 5 minutes of video at the 3 s grid
SNAP_TOLERANCE = 0.5

_BRACKETED = re.compile(r"\[([^\[\]]*)\]")
_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class Query:
    query_id: str
    video_id: str
    text: str
    mode: str = MODE_VIDEO_CENTRIC

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("query text must be non-empty")
        if self.mode not in QUERY_MODES:
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class RelevanceResult:
    query_id: str
    relevant_timestamps: list[float]
    raw_responses: list[str] = field(default_factory=list)  # audit, one per attempt
    failed_batches: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def build_frame_voice_list(batch: list[FrameAnnotation]) -> str:
    """One line per frame: ``- timestamp: <t> | description: <d> | voiceover: <v>``.

    The layout is a stable contract: the timestamp is the frame's float repr,
    and description/voiceover are whitespace-collapsed single-line text.
    """
    lines = []
    for a in batch:
        desc = " ".join(a.description.split())
        voice = " ".join(a.transcript_window.split())
        lines.append(f"- timestamp: {float(a.timestamp)!r} | description: {desc} | voiceover: {voice}")
    return "\n".join(lines)


def parse_timestamp_list(
    raw: str,
    grid: list[float] | None = None,
    tolerance: float = SNAP_TOLERANCE,
) -> list[float]:
    """Parse the first bracketed comma-separated number list in ``raw``.

    Surrounding prose is ignored; brackets holding non-numbers are skipped.
    With a ``grid``, each number snaps to the nearest grid value when within
    ``tolerance`` seconds and is dropped (with a warning) otherwise.
    """
    values: list[float] | None = None
    for match in _BRACKETED.finditer(raw):
        inner = match.group(1).strip()
        if not inner:
            values = []
            break
        tokens = [t.strip() for t in inner.split(",")]
        if all(_NUMBER.match(t) for t in tokens):
            values = [float(t) for t in tokens]
            break
    if values is None:
        raise TimestampParseError(f"no bracketed timestamp list in response: {raw[:120]!r}")
    if grid is None:
        return values

    snapped: list[float] = []
    for value in values:
        nearest = min(grid, key=lambda g: (abs(g - value), g), default=None)
        if nearest is not None and abs(nearest - value) <= tolerance:
            snapped.append(nearest)
        else:
            logger.warning("timestamp %s is not within %.1fs of the sampled grid; dropped",
                           value, tolerance)
    return snapped


def retrieve_relevant_frames(
    store: AnnotationStore,
    query: Query,
    gateway: Gateway,
    batch_size: int = DEFAULT_BATCH_SIZE,
    max_context_tokens: int = 128_000,
) -> RelevanceResult:
    if not store.annotations:
        raise RetrievalError(f"annotation store for {store.video_id} is empty")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")

    grid = store.timestamps
    result = RelevanceResult(query_id=query.query_id, relevant_timestamps=[])
    relevant: set[float] = set()
    batches = [
        list(store.annotations[i:i + batch_size])
        for i in range(0, len(store.annotations), batch_size)
    ]

    for index, batch in enumerate(batches):
        request = CompletionRequest(
            template_name="frame_retrieval",
            bindings={
                "video_title": store.meta.title,
                "user_interest": query.text,
                "frame_voice_list": build_frame_voice_list(batch),
            },
            max_context_tokens=max_context_tokens,
        )
        batch_timestamps = {a.timestamp for a in batch}
        parsed: list[float] | None = None
        for attempt in range(2):  # one reprompt on a parse failure
            try:
                raw = gateway.complete(request)
            except ProviderError as exc:
                result.raw_responses.append(f"<provider-error: {exc}>")
                logger.warning("batch %d attempt %d failed: %s", index, attempt + 1, exc)
                continue
            result.raw_responses.append(raw)
            try:
                parsed = parse_timestamp_list(raw, grid=grid)
                break
            except TimestampParseError as exc:
                if attempt == 0:
                    logger.warning("batch %d: %s; reprompting once", index, exc)
        if parsed is None:
            result.failed_batches.append(index)
            result.warnings.append(f"batch {index} failed after reprompt")
            continue
        for ts in parsed:
            if ts in batch_timestamps:
                relevant.add(ts)
            else:
                message = f"batch {index} returned timestamp {ts} outside the batch; dropped"
                logger.warning(message)
                result.warnings.append(message)

    if batches and len(result.failed_batches) == len(batches):
        raise RetrievalError(f"all {len(batches)} retrieval batches failed for {query.query_id}")

    result.relevant_timestamps = sorted(relevant)
    return result
