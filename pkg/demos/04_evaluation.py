"""Score retrieval quality against hand-written ground truth.

Runs the retrieval chain five times per query (identical here, since the
fake provider is deterministic), computes overlap recall and precision per
run, and prints the grouped best-of-runs report.
"""

from _support import build_workspace

from clipweaver.evaluation import (
    QueryEval,
    QueryTags,
    aggregate,
    evaluate_runs,
    render_report_table,
    segment_bucket,
)
from clipweaver.ingest import build_sentence_index
from clipweaver.intervals import Interval, merge_overlaps
from clipweaver.retrieval import Query, retrieve_relevant_frames
from clipweaver.segments import align_to_sentences, bitmap_to_segments, frames_to_bitmap, refine_bitmap

pipeline, _ = build_workspace()
video = pipeline.video("demo")
store = pipeline.store("demo")
index = build_sentence_index(video.words)

TRUTH = {
    "battery life": [Interval(15.0, 36.0)],
    "camera photos": [Interval(36.0, 49.0)],
}


def one_run(text: str) -> list[Interval]:
    query = Query(query_id="eval", video_id="demo", text=text)
    result = retrieve_relevant_frames(store, query, pipeline.gateway)
    bitmap = frames_to_bitmap(store.timestamps, set(result.relevant_timestamps),
                              store.meta.frame_interval)
    segments = bitmap_to_segments(refine_bitmap(bitmap), store.meta.duration)
    return merge_overlaps(
        align_to_sentences(iv, index, store.meta.duration) for iv in segments
    )


evals = []
for text, truth in TRUTH.items():
    runs = [one_run(text) for _ in range(5)]
    metrics = evaluate_runs(truth, runs)
    print(f"{text!r}: retrieved {[(iv.start, iv.end) for iv in runs[0]]}, "
          f"recall={metrics[0].recall:.3f} precision={metrics[0].precision:.3f}")
    evals.append(QueryEval(
        video_id="demo",
        query_text=text,
        tags=QueryTags("product_review", "conceptual", "conceptual",
                       segment_bucket(len(truth))),
        runs=tuple(metrics),
    ))

print()
print(render_report_table(aggregate(evals)))
