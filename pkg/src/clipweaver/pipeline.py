"""End-to-end orchestration: ingest, annotate, query, plan, persist.

A query session walks the fixed stage chain

    pending -> retrieving -> narrating -> ready | failed

and keeps every intermediate artifact (relevance result, refined segments,
narrative, plan) so the service and CLI can expose them. Sessions and
stores persist as JSON under the storage root and reload losslessly.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path

from . import annotation as ann
from . import narrative as narr
from . import plan as planmod
from . import retrieval as retr
from . import segments as segmod
from .config import Config
from .errors import ClipweaverError, IngestError
from .gateway.core import Gateway
from .gateway.fake import FakeProvider
from .gateway.openai_http import OpenAiHttpProvider
from .gateway.templates import TemplateLibrary
from .ingest import (
    IngestedVideo,
    build_sentence_index,
    ingest_media,
    ingest_prepared,
)
from .intervals import Interval, merge_overlaps
from .retrieval import Query

logger = logging.getLogger(__name__)

STATUS_PENDING = "pending"
STATUS_RETRIEVING = "retrieving"
STATUS_NARRATING = "narrating"
STATUS_READY = "ready"
STATUS_FAILED = "failed"

_STATUS_RANK = {
    STATUS_PENDING: 0,
    STATUS_RETRIEVING: 1,
    STATUS_NARRATING: 2,
    STATUS_READY: 3,
    STATUS_FAILED: 3,
}


@dataclass
class QuerySession:
    session_id: str
    video_id: str
    query: Query
    status: str = STATUS_PENDING
    stage: str = ""  # stage name of a failure
    error: str = ""
    relevance: retr.RelevanceResult | None = None
    tiling: list[segmod.Segment] = field(default_factory=list)  # full chronology
    narrative: narr.Narrative | None = None
    order: narr.PlaybackOrder | None = None
    assignment: narr.ChunkAssignment | None = None
    plan: planmod.PlaybackPlan | None = None

    def advance(self, status: str) -> None:
        if _STATUS_RANK[status] < _STATUS_RANK[self.status]:
            raise ValueError(f"status cannot move back from {self.status} to {status}")
        self.status = status

    @property
    def relevant_segments(self) -> list[segmod.Segment]:
        return [seg for seg in self.tiling if seg.relevant]


def build_gateway(config: Config) -> Gateway:
    providers = {
        "fake": FakeProvider(rules=True, audio_dir=config.audio_dir),
        "openai": OpenAiHttpProvider(audio_dir=config.audio_dir),
    }
    return Gateway(
        templates=TemplateLibrary(config.templates_dir),
        providers=providers,
        profiles=config.providers,
    )


class Pipeline:
    """Owns storage paths and runs the stage chain for one deployment."""

    def __init__(self, config: Config, gateway: Gateway | None = None):
        self.config = config
        self.gateway = gateway or build_gateway(config)
        self.sessions: dict[str, QuerySession] = {}
        self._annotation_locks: dict[str, threading.Lock] = {}
        self._lock = threading.Lock()

    # -- ingest & annotate ---------------------------------------------------

    def ingest(self, source: Path, title: str | None = None,
               video_id: str | None = None, prepared: bool | None = None) -> IngestedVideo:
        source = Path(source)
        if prepared is None:
            prepared = source.is_dir()
        if prepared:
            return ingest_prepared(source, self.config.videos_dir, video_id)
        if title is None:
            title = source.stem
        return ingest_media(
            source, self.config.videos_dir, title, self.gateway,
            extract_command=self.config.extract_command,
            probe_command=self.config.probe_command,
            frame_interval=self.config.frame_interval,
            video_id=video_id,
        )

    def video(self, video_id: str) -> IngestedVideo:
        return IngestedVideo.load(self.config.videos_dir / video_id)

    def store_path(self, video_id: str) -> Path:
        return self.config.stores_dir / f"{video_id}.jsonl"

    def annotate(self, video_id: str) -> ann.AnnotationReport:
        # single writer per video; concurrent annotation of distinct videos is fine
        with self._lock:
            lock = self._annotation_locks.setdefault(video_id, threading.Lock())
        with lock:
            video = self.video(video_id)
            report = ann.annotate_video(
                video, self.gateway,
                parallelism=self.config.parallelism,
                window_radius=self.config.transcript_radius,
            )
            ann.save_store(report.store, self.store_path(video_id))
            return report

    def store(self, video_id: str) -> ann.AnnotationStore:
        path = self.store_path(video_id)
        if not path.exists():
            raise IngestError(f"video {video_id} has no annotation store yet")
        return ann.load_store(path)

    # -- query sessions --------------------------------------------------------

    def new_session(self, video_id: str, text: str, mode: str) -> QuerySession:
        digest = hashlib.sha1(f"{video_id}|{text}|{mode}".encode("utf-8")).hexdigest()[:12]
        session_id = digest
        with self._lock:
            n = 2
            while session_id in self.sessions:
                session_id = f"{digest}-{n}"
                n += 1
            query = Query(query_id=session_id, video_id=video_id, text=text, mode=mode)
            session = QuerySession(session_id=session_id, video_id=video_id, query=query)
            self.sessions[session_id] = session
        return session

    def run_query(self, session: QuerySession) -> QuerySession:
        try:
            self._run_query_stages(session)
        except ClipweaverError as exc:
            session.error = str(exc)
            session.status = STATUS_FAILED
            logger.warning("session %s failed at stage %s: %s",
                           session.session_id, session.stage, exc)
        self.save_session(session)
        return session

    def _run_query_stages(self, session: QuerySession) -> None:
        video = self.video(session.video_id)
        store = self.store(session.video_id)
        sentence_index = build_sentence_index(video.words)
        duration = store.meta.duration

        session.stage = "retrieval"
        session.advance(STATUS_RETRIEVING)
        session.relevance = retr.retrieve_relevant_frames(
            store, session.query, self.gateway,
            batch_size=self.config.batch_size,
            max_context_tokens=self.config.context_budget_tokens,
        )

        session.stage = "refinement"
        bitmap = segmod.frames_to_bitmap(
            store.timestamps, set(session.relevance.relevant_timestamps),
            store.meta.frame_interval,
        )
        raw_segments = segmod.bitmap_to_segments(segmod.refine_bitmap(bitmap), duration)

        session.stage = "alignment"
        aligned = [
            segmod.align_to_sentences(iv, sentence_index, duration) for iv in raw_segments
        ]
        relevant = merge_overlaps(aligned)
        session.tiling = segmod.segment_tiling(relevant, duration)

        session.stage = "summarisation"
        session.advance(STATUS_NARRATING)
        narr.summarize_segments(session.tiling, store, self.gateway, video.words)

        if not relevant:
            # nothing matched; an empty plan is still a valid, ready session
            session.plan = planmod.PlaybackPlan(
                session.query.query_id, session.query.mode, (), 0.0
            )
            session.stage = ""
            session.advance(STATUS_READY)
            return

        session.stage = "narrative"
        relevant_segments = session.relevant_segments
        session.narrative = narr.generate_narrative(
            relevant_segments, session.query.text, store, self.gateway, video.words
        )

        if session.query.mode == retr.MODE_VIDEO_CENTRIC:
            session.stage = "ordering"
            session.order = narr.order_segments(
                session.narrative, relevant_segments, store, self.gateway, video.words
            )
            session.stage = "title_cards"
            cards = None
            if self.config.include_title_cards:
                cards = self._title_cards(session.order, relevant_segments)
            session.stage = "plan"
            session.plan = planmod.compile_video_centric(
                session.query.query_id, session.order, cards
            )
        else:
            session.stage = "assignment"
            session.assignment = narr.assign_chunks(
                session.narrative, relevant_segments, store, self.gateway, video.words
            )
            session.stage = "synthesis"
            narrations = self._synthesize_narrations(session.assignment)
            session.stage = "plan"
            session.plan = planmod.compile_narrative_centric(
                session.query.query_id, session.assignment, narrations,
                rate_bounds=(self.config.rate_min, self.config.rate_max),
            )
        session.stage = ""
        session.advance(STATUS_READY)

    def _title_cards(
        self, order: narr.PlaybackOrder, segments: list[segmod.Segment]
    ) -> list[narr.TitleCard]:
        by_span = {(s.interval.start, s.interval.end): s for s in segments}
        ordered = [by_span[(iv.start, iv.end)] for iv in order.intervals_in_order()]
        cards = []
        for i, seg in enumerate(ordered):
            previous = ordered[i - 1] if i > 0 else None
            cards.append(narr.generate_title_card(
                previous, seg, self.gateway,
                display_duration=self.config.title_card_duration,
                after_segment=i - 1,
            ))
        return cards

    def _synthesize_narrations(
        self, assignment: narr.ChunkAssignment
    ) -> dict[int, planmod.ChunkNarration | None]:
        narrations: dict[int, planmod.ChunkNarration | None] = {}
        for chunk in assignment.chunks:
            video_length = sum(iv.length for iv in chunk.segments)
            target = video_length if chunk.segments else None
            try:
                result = self.gateway.synthesize(chunk.narrative, target_duration=target)
                narrations[chunk.chunk_id] = planmod.ChunkNarration(
                    result.audio_ref, result.duration
                )
            except ClipweaverError as exc:
                logger.warning("narration synthesis for chunk %d failed: %s",
                               chunk.chunk_id, exc)
                narrations[chunk.chunk_id] = None
        return narrations

    def skim_plan(self, session: QuerySession, mode: str) -> planmod.PlaybackPlan:
        if session.status != STATUS_READY:
            raise ClipweaverError(f"session {session.session_id} is not ready")
        return planmod.compile_skim(session.query.query_id, session.tiling, mode)

    # -- persistence -------------------------------------------------------------

    def session_path(self, session_id: str) -> Path:
        return self.config.sessions_dir / f"{session_id}.json"

    def save_session(self, session: QuerySession) -> None:
        path = self.session_path(session.session_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(session_to_dict(session), indent=2) + "\n", encoding="utf-8"
        )

    def load_sessions(self) -> None:
        if not self.config.sessions_dir.exists():
            return
        for path in sorted(self.config.sessions_dir.glob("*.json")):
            data = json.loads(path.read_text(encoding="utf-8"))
            session = session_from_dict(data)
            self.sessions[session.session_id] = session


# ---------------------------------------------------------------------------
# Session wire format
# ---------------------------------------------------------------------------


def session_to_dict(session: QuerySession) -> dict:
    def iv(interval: Interval) -> list[float]:
        return [interval.start, interval.end]

    data: dict = {
        "session_id": session.session_id,
        "video_id": session.video_id,
        "query": {
            "query_id": session.query.query_id,
            "video_id": session.query.video_id,
            "text": session.query.text,
            "mode": session.query.mode,
        },
        "status": session.status,
        "stage": session.stage,
        "error": session.error,
        "segments": [
            {
                "start": seg.interval.start,
                "end": seg.interval.end,
                "relevant": seg.relevant,
                "title": seg.title,
                "summary": seg.summary,
            }
            for seg in session.tiling
        ],
    }
    if session.relevance is not None:
        data["relevance"] = {
            "relevant_timestamps": session.relevance.relevant_timestamps,
            "raw_responses": session.relevance.raw_responses,
            "failed_batches": session.relevance.failed_batches,
            "warnings": session.relevance.warnings,
        }
    if session.narrative is not None:
        data["narrative"] = {
            "overall_narrative": session.narrative.overall,
            "chunks": [
                {"chunk_id": c.chunk_id, "narrative": c.narrative}
                for c in session.narrative.chunks
            ],
        }
    if session.order is not None:
        data["playback_order"] = [
            {"start": e.interval.start, "end": e.interval.end,
             "playback_order": e.playback_order}
            for e in session.order.entries
        ]
    if session.assignment is not None:
        data["assignment"] = [
            {"chunk_id": c.chunk_id, "narrative": c.narrative,
             "segments": [iv(s) for s in c.segments]}
            for c in session.assignment.chunks
        ]
    if session.plan is not None:
        data["plan"] = planmod.plan_to_dict(session.plan)
    return data


def session_from_dict(data: dict) -> QuerySession:
    query = Query(
        query_id=data["query"]["query_id"],
        video_id=data["query"]["video_id"],
        text=data["query"]["text"],
        mode=data["query"]["mode"],
    )
    session = QuerySession(
        session_id=data["session_id"],
        video_id=data["video_id"],
        query=query,
        status=data["status"],
        stage=data.get("stage", ""),
        error=data.get("error", ""),
    )
    session.tiling = [
        segmod.Segment(
            Interval(s["start"], s["end"]),
            relevant=s["relevant"],
            title=s.get("title", ""),
            summary=s.get("summary", ""),
        )
        for s in data.get("segments", [])
    ]
    if "relevance" in data:
        rel = data["relevance"]
        session.relevance = retr.RelevanceResult(
            query_id=query.query_id,
            relevant_timestamps=[float(t) for t in rel["relevant_timestamps"]],
            raw_responses=list(rel.get("raw_responses", [])),
            failed_batches=list(rel.get("failed_batches", [])),
            warnings=list(rel.get("warnings", [])),
        )
    if "narrative" in data:
        session.narrative = narr.Narrative(
            overall=data["narrative"]["overall_narrative"],
            chunks=tuple(
                narr.NarrativeChunk(c["chunk_id"], c["narrative"])
                for c in data["narrative"]["chunks"]
            ),
        )
    if "playback_order" in data:
        session.order = narr.PlaybackOrder(tuple(
            narr.OrderedSegment(Interval(e["start"], e["end"]), e["playback_order"])
            for e in data["playback_order"]
        ))
    if "assignment" in data:
        session.assignment = narr.ChunkAssignment(tuple(
            narr.AssignedChunk(
                c["chunk_id"], c["narrative"],
                tuple(Interval(s, e) for s, e in c["segments"]),
            )
            for c in data["assignment"]
        ))
    if "plan" in data:
        session.plan = planmod.plan_from_dict(data["plan"])
    return session
