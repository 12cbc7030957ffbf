"""From a query to refined, sentence-aligned segments.

Shows the deterministic middle of the pipeline: relevance judgement per
frame, the two refinement rules (fill single-frame gaps, drop single-frame
isolates), and completion of segment boundaries to full sentences.
"""

from _support import build_workspace

from clipweaver.ingest import build_sentence_index
from clipweaver.intervals import merge_overlaps
from clipweaver.retrieval import Query, retrieve_relevant_frames
from clipweaver.segments import (
    align_to_sentences,
    bitmap_to_segments,
    frames_to_bitmap,
    refine_bitmap,
)

pipeline, _ = build_workspace()
video = pipeline.video("demo")
store = pipeline.store("demo")

query = Query(query_id="demo-q", video_id="demo", text="battery life")
result = retrieve_relevant_frames(store, query, pipeline.gateway)
print(f"query {query.text!r} -> relevant frame timestamps: {result.relevant_timestamps}")

bitmap = frames_to_bitmap(store.timestamps, set(result.relevant_timestamps),
                          store.meta.frame_interval)
print("bitmap:        ", "".join("x" if f else "." for f in bitmap.flags))
refined = refine_bitmap(bitmap)
print("after refine:  ", "".join("x" if f else "." for f in refined.flags))

segments = bitmap_to_segments(refined, store.meta.duration)
print(f"raw segments:   {[(iv.start, iv.end) for iv in segments]}")

index = build_sentence_index(video.words)
aligned = merge_overlaps(
    align_to_sentences(iv, index, store.meta.duration) for iv in segments
)
print(f"sentence-aligned: {[(iv.start, iv.end) for iv in aligned]}")
print("\nboundary sentences now play out in full instead of cutting mid-word.")
