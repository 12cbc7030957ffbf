"""Command-line entry points: ingest, annotate, query, plan, eval, serve."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import evaluation as evalmod
from . import plan as planmod
from .config import Config, load_config
from .errors import ClipweaverError
from .ingest import build_sentence_index
from .intervals import merge_overlaps
from .pipeline import Pipeline
from .retrieval import MODE_VIDEO_CENTRIC, QUERY_MODES, Query, retrieve_relevant_frames
from .segments import align_to_sentences, bitmap_to_segments, frames_to_bitmap, refine_bitmap

logger = logging.getLogger(__name__)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clipweaver",
        description="Query-driven video segment retrieval and narrative playback planning",
    )
    parser.add_argument("--config", type=Path, help="YAML config file")
    parser.add_argument("--data-dir", type=Path, help="override the storage root")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest a video file or prepared directory")
    p.add_argument("source", type=Path)
    p.add_argument("--title")
    p.add_argument("--video-id")

    p = sub.add_parser("annotate", help="annotate an ingested video")
    p.add_argument("video_id")

    p = sub.add_parser("query", help="run a query against an annotated video")
    p.add_argument("video_id")
    p.add_argument("--text", required=True)
    p.add_argument("--mode", choices=QUERY_MODES, default=MODE_VIDEO_CENTRIC)

    p = sub.add_parser("plan", help="print a session's playback plan")
    p.add_argument("session_id")
    p.add_argument("--skim", choices=planmod.SKIM_MODES)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("eval", help="recall/precision evaluation against ground truth")
    p.add_argument("--truth", type=Path, required=True, action="append",
                   help="ground-truth YAML file (repeatable, one per video)")
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--report", type=Path, help="write the JSON report here")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _make_pipeline(args: argparse.Namespace) -> Pipeline:
    config = load_config(args.config) if args.config else Config()
    if args.data_dir:
        config.storage_root = args.data_dir
        config.validate()
    return Pipeline(config)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except (ClipweaverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args: argparse.Namespace) -> int:
    pipeline = _make_pipeline(args)
    command = args.command

    if command == "ingest":
        video = pipeline.ingest(args.source, args.title, args.video_id)
        print(video.meta.video_id)
        return 0

    if command == "annotate":
        report = pipeline.annotate(args.video_id)
        print(f"annotated {len(report.store.annotations)} frames")
        if report.failed:
            print(f"failed frames: {[ts for ts, _ in report.failed]}")
            return 1
        return 0

    if command == "query":
        session = pipeline.new_session(args.video_id, args.text, args.mode)
        pipeline.run_query(session)
        if session.status != "ready":
            print(f"error: query failed at stage {session.stage}: {session.error}",
                  file=sys.stderr)
            return 1
        _print_session(session)
        return 0

    if command == "plan":
        pipeline.load_sessions()
        session = pipeline.sessions.get(args.session_id)
        if session is None:
            print(f"error: unknown session {args.session_id}", file=sys.stderr)
            return 1
        plan = pipeline.skim_plan(session, args.skim) if args.skim else session.plan
        if plan is None:
            print(f"error: session {args.session_id} has no plan", file=sys.stderr)
            return 1
        payload = json.dumps(planmod.plan_to_dict(plan), indent=2)
        if args.out:
            args.out.write_text(payload + "\n", encoding="utf-8")
        else:
            print(payload)
        return 0

    if command == "eval":
        return _run_eval(pipeline, args)

    if command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(pipeline.config, pipeline), host=args.host, port=args.port)
        return 0

    raise AssertionError(f"unhandled command {command}")


def _print_session(session) -> None:
    print(f"session {session.session_id} ({session.query.mode})")
    print(f"{'start':>10}  {'end':>10}  rel  title")
    for seg in session.tiling:
        flag = " * " if seg.relevant else "   "
        print(f"{seg.interval.start:>10.2f}  {seg.interval.end:>10.2f}  {flag}  {seg.title}")
    if session.narrative is not None:
        print("\nnarrative:")
        print(f"  {session.narrative.overall}")
    if session.plan is not None:
        print(f"\nplan: {len(session.plan.items)} items, "
              f"{session.plan.total_duration:.2f}s virtual")


def _retrieved_intervals(pipeline: Pipeline, video_id: str, text: str) -> list:
    """One evaluation run: retrieval -> refinement -> sentence alignment -> merge."""
    video = pipeline.video(video_id)
    store = pipeline.store(video_id)
    index = build_sentence_index(video.words)
    query = Query(query_id=f"eval-{video_id}", video_id=video_id, text=text)
    result = retrieve_relevant_frames(
        store, query, pipeline.gateway,
        batch_size=pipeline.config.batch_size,
        max_context_tokens=pipeline.config.context_budget_tokens,
    )
    bitmap = frames_to_bitmap(
        store.timestamps, set(result.relevant_timestamps), store.meta.frame_interval
    )
    segments = bitmap_to_segments(refine_bitmap(bitmap), store.meta.duration)
    aligned = [align_to_sentences(iv, index, store.meta.duration) for iv in segments]
    return merge_overlaps(aligned)


def _run_eval(pipeline: Pipeline, args: argparse.Namespace) -> int:
    if args.runs < 1:
        print("error: --runs must be >= 1", file=sys.stderr)
        return 2
    query_evals = []
    for truth_path in args.truth:
        truth = evalmod.load_ground_truth(truth_path)
        for gt_query in truth.queries:
            runs = [
                _retrieved_intervals(pipeline, truth.video_id, gt_query.text)
                for _ in range(args.runs)
            ]
            metrics = evalmod.evaluate_runs(list(gt_query.intervals), runs)
            tags = evalmod.QueryTags(
                genre=truth.genre,
                content_type=truth.content_type,
                query_type=gt_query.query_type,
                segment_bucket=evalmod.segment_bucket(len(gt_query.intervals)),
            )
            query_evals.append(evalmod.QueryEval(
                video_id=truth.video_id,
                query_text=gt_query.text,
                tags=tags,
                runs=tuple(metrics),
            ))
    report = evalmod.aggregate(query_evals)
    print(evalmod.render_report_table(report))
    if args.report:
        args.report.write_text(
            json.dumps(evalmod.report_to_dict(report), indent=2) + "\n", encoding="utf-8"
        )
        print(f"report written to {args.report}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
