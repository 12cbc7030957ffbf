"""Ingest a video and build its frame annotation database.

Walks the first pipeline stage: sample a frame every 3 seconds, collect the
transcript window around each frame (5 seconds either side), and ask the
vision-language provider for a description of at most 50 words per frame.
"""

from _support import build_workspace

from clipweaver.ingest import build_sentence_index

pipeline, _ = build_workspace()
video = pipeline.video("demo")
store = pipeline.store("demo")

print(f"video: {video.meta.title!r}, {video.meta.duration:.0f}s, "
      f"{len(video.frames)} sampled frames, {len(video.words)} transcript words")

print("\nfirst four annotations (timestamp, description, transcript window):")
for annotation in store.annotations[:4]:
    print(f"  t={annotation.timestamp:>5.1f}  {annotation.description}")
    print(f"          window: {annotation.transcript_window}")

index = build_sentence_index(video.words)
print(f"\nsentence index ({len(index.sentences)} sentences):")
for sentence in index.sentences:
    print(f"  [{sentence.start:>4.1f}, {sentence.end:>4.1f})  {sentence.text}")
