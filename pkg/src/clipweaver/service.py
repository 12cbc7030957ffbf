"""REST service: ingest, annotation status, query sessions, plans, skim modes.

Ingest+annotation and query pipelines run on a background executor; clients
poll the GET endpoints for status. Multiple sessions per video are
independent, matching tabbed querying in the player. On startup the service
reloads persisted stores and sessions from the storage root.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import plan as planmod
from .config import Config
from .errors import ClipweaverError
from .pipeline import Pipeline, QuerySession, STATUS_READY, session_to_dict
from .retrieval import MODE_VIDEO_CENTRIC, QUERY_MODES

logger = logging.getLogger(__name__)


class VideoRequest(BaseModel):
    source: str
    title: str | None = None
    video_id: str | None = None


class QueryRequest(BaseModel):
    text: str = Field(min_length=1)
    mode: str = MODE_VIDEO_CENTRIC


class SkimRequest(BaseModel):
    mode: str


def create_app(config: Config | None = None, pipeline: Pipeline | None = None) -> FastAPI:
    config = config or Config()
    pipeline = pipeline or Pipeline(config)
    pipeline.load_sessions()

    app = FastAPI(title="clipweaver")
    app.state.pipeline = pipeline
    app.state.executor = ThreadPoolExecutor(max_workers=8)
    app.state.video_status: dict[str, str] = {}

    for video_dir in sorted(config.videos_dir.glob("*")) if config.videos_dir.exists() else []:
        if (video_dir / "meta.json").exists():
            vid = video_dir.name
            app.state.video_status[vid] = (
                "ready" if pipeline.store_path(vid).exists() else "ingested"
            )

    def _get_session(session_id: str) -> QuerySession:
        session = pipeline.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/videos", status_code=202)
    def create_video(body: VideoRequest) -> dict:
        source = Path(body.source)
        if not source.exists():
            raise HTTPException(status_code=400, detail=f"source not found: {body.source}")
        if source.is_dir():
            video = pipeline.ingest(source, body.title, body.video_id, prepared=True)
            video_id = video.meta.video_id
        else:
            video = pipeline.ingest(source, body.title, body.video_id, prepared=False)
            video_id = video.meta.video_id
        app.state.video_status[video_id] = "annotating"

        def _annotate() -> None:
            try:
                pipeline.annotate(video_id)
                app.state.video_status[video_id] = "ready"
            except ClipweaverError as exc:
                logger.warning("annotation of %s failed: %s", video_id, exc)
                app.state.video_status[video_id] = "failed"

        app.state.executor.submit(_annotate)
        return {"video_id": video_id}

    @app.get("/videos/{video_id}")
    def get_video(video_id: str) -> dict:
        try:
            video = pipeline.video(video_id)
        except ClipweaverError:
            raise HTTPException(status_code=404, detail=f"unknown video {video_id}") from None
        status = app.state.video_status.get(video_id)
        if status is None:
            status = "ready" if pipeline.store_path(video_id).exists() else "ingested"
        return {
            "video_id": video_id,
            "title": video.meta.title,
            "duration": video.meta.duration,
            "frame_interval": video.meta.frame_interval,
            "frame_count": len(video.frames),
            "status": status,
        }

    @app.post("/videos/{video_id}/queries", status_code=202)
    def create_query(video_id: str, body: QueryRequest) -> dict:
        try:
            pipeline.video(video_id)
        except ClipweaverError:
            raise HTTPException(status_code=404, detail=f"unknown video {video_id}") from None
        if not pipeline.store_path(video_id).exists():
            raise HTTPException(
                status_code=409, detail=f"video {video_id} is not annotated yet"
            )
        if body.mode not in QUERY_MODES:
            raise HTTPException(status_code=422, detail=f"unknown mode {body.mode!r}")
        try:
            session = pipeline.new_session(video_id, body.text, body.mode)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        app.state.executor.submit(pipeline.run_query, session)
        return {"session_id": session.session_id}

    @app.get("/queries/{session_id}")
    def get_query(session_id: str) -> dict:
        return session_to_dict(_get_session(session_id))

    @app.get("/queries/{session_id}/plan")
    def get_plan(session_id: str) -> dict:
        session = _get_session(session_id)
        if session.status != STATUS_READY or session.plan is None:
            raise HTTPException(
                status_code=409,
                detail=f"session {session_id} is {session.status}, no plan available",
            )
        return planmod.plan_to_dict(session.plan)

    @app.post("/queries/{session_id}/skim")
    def skim(session_id: str, body: SkimRequest) -> dict:
        session = _get_session(session_id)
        if body.mode not in planmod.SKIM_MODES:
            raise HTTPException(status_code=422, detail=f"unknown skim mode {body.mode!r}")
        if session.status != STATUS_READY:
            raise HTTPException(
                status_code=409, detail=f"session {session_id} is {session.status}"
            )
        return planmod.plan_to_dict(pipeline.skim_plan(session, body.mode))

    if config.storage_root.exists():
        app.mount("/media", StaticFiles(directory=config.storage_root), name="media")

    return app
