"""Per-frame multimodal annotation: build, enforce limits, persist.

The store keeps raw description text (no embeddings) in a line-delimited
file: a header record followed by one record per annotated frame. Failed
frames are reported explicitly, never silently skipped; retrieval treats
them as irrelevant by absence.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ProviderError, StoreLoadError
from .gateway.core import CompletionRequest, Gateway
from .ingest import FrameRef, IngestedVideo, VideoMeta, transcript_window
from .text import truncate_words, word_count

logger = logging.getLogger(__name__)

DESCRIPTION_WORD_LIMIT = 50


@dataclass(frozen=True)
class FrameAnnotation:
    timestamp: float
    description: str
    transcript_window: str


@dataclass(frozen=True)
class AnnotationStore:
    video_id: str
    meta: VideoMeta
    annotations: tuple[FrameAnnotation, ...]

    @property
    def timestamps(self) -> list[float]:
        return [a.timestamp for a in self.annotations]


@dataclass
class AnnotationReport:
    store: AnnotationStore
    failed: list[tuple[float, str]] = field(default_factory=list)  # (timestamp, reason)


def annotate_frame(
    frame: FrameRef,
    window: str,
    meta: VideoMeta,
    gateway: Gateway,
    image_path: Path | None = None,
) -> FrameAnnotation:
    """Describe one frame; over-length output gets one retry, then truncation."""
    if image_path is not None and not image_path.exists():
        raise ProviderError(f"frame image not readable: {image_path}")
    request = CompletionRequest(
        template_name="frame_annotation",
        bindings={
            "video_title": meta.title,
            "timestamp": repr(float(frame.timestamp)),
            "transcript_window": window,
        },
        images=(str(image_path),) if image_path is not None else (),
    )
    description = gateway.complete(request).strip()
    if word_count(description) > DESCRIPTION_WORD_LIMIT:
        description = gateway.complete(request).strip()
        if word_count(description) > DESCRIPTION_WORD_LIMIT:
            logger.warning(
                "frame %.3f: description still %d words after retry; truncating to %d",
                frame.timestamp, word_count(description), DESCRIPTION_WORD_LIMIT,
            )
            description = truncate_words(description, DESCRIPTION_WORD_LIMIT)
    return FrameAnnotation(frame.timestamp, description, window)


def annotate_video(
    video: IngestedVideo,
    gateway: Gateway,
    parallelism: int = 4,
    window_radius: float = 5.0,
) -> AnnotationReport:
    """Annotate every sampled frame; output order is timestamp order regardless
    of completion order, so parallelism never changes the store."""

    def _one(frame: FrameRef) -> FrameAnnotation:
        window = transcript_window(video.words, frame.timestamp, window_radius)
        return annotate_frame(frame, window, video.meta, gateway, video.frame_path(frame))

    results: dict[float, FrameAnnotation] = {}
    failed: list[tuple[float, str]] = []
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        futures = {pool.submit(_one, frame): frame for frame in video.frames}
        for future, frame in futures.items():
            try:
                results[frame.timestamp] = future.result()
            except ProviderError as exc:
                failed.append((frame.timestamp, str(exc)))

    failed.sort(key=lambda item: item[0])
    annotations = tuple(results[ts] for ts in sorted(results))
    store = AnnotationStore(video.meta.video_id, video.meta, annotations)
    if failed:
        logger.warning(
            "annotation of %s left %d frame(s) unannotated: %s",
            video.meta.video_id, len(failed), [ts for ts, _ in failed],
        )
    return AnnotationReport(store=store, failed=failed)


# ---------------------------------------------------------------------------
# Persistence: one JSON record per line, header first
# ---------------------------------------------------------------------------


def save_store(store: AnnotationStore, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({
            "record": "header",
            "video_id": store.video_id,
            "title": store.meta.title,
            "duration": store.meta.duration,
            "frame_interval": store.meta.frame_interval,
        }) + "\n")
        for a in store.annotations:
            fh.write(json.dumps({
                "record": "frame",
                "timestamp": a.timestamp,
                "description": a.description,
                "transcript_window": a.transcript_window,
            }) + "\n")


def load_store(path: Path) -> AnnotationStore:
    header: dict | None = None
    annotations: list[FrameAnnotation] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StoreLoadError(f"unparseable store record: {exc.msg}", lineno) from exc
            kind = record.get("record")
            try:
                if kind == "header":
                    header = record
                elif kind == "frame":
                    annotations.append(FrameAnnotation(
                        float(record["timestamp"]),
                        record["description"],
                        record["transcript_window"],
                    ))
                else:
                    raise StoreLoadError(f"unknown record kind {kind!r}", lineno)
            except (KeyError, TypeError, ValueError) as exc:
                raise StoreLoadError(f"bad {kind} record: {exc}", lineno) from exc
    if header is None:
        raise StoreLoadError("store has no header record", 1)
    meta = VideoMeta(
        video_id=header["video_id"],
        title=header["title"],
        duration=float(header["duration"]),
        frame_interval=float(header["frame_interval"]),
    )
    return AnnotationStore(header["video_id"], meta, tuple(annotations))
