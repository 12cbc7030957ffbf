"""Shared scaffolding for the demo scripts: a synthetic 60-second "video".

One spoken word per second, nine sentences, with battery talk in the middle
and camera talk after it. No media files or network needed: frames are stub
stills and all model calls go to the deterministic rule-based fake provider.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from clipweaver.config import Config
from clipweaver.pipeline import Pipeline

SENTENCES = [
    "Welcome back to our full review of this phone.",
    "The design feels premium and light.",
    "Battery life is the real story here.",
    "The battery lasts two full days easily.",
    "Charging the battery takes under one hour.",
    "The camera shoots sharp photos at night.",
    "Video recording stays steady while walking.",
    "Overall this phone is an easy recommendation.",
    "Thanks for watching today.",
]


def build_workspace() -> tuple[Pipeline, Path]:
    """A throwaway pipeline over the synthetic review video, fully annotated."""
    root = Path(tempfile.mkdtemp(prefix="clipweaver-demo-"))
    words, index = [], 0
    for sentence in SENTENCES:
        for token in sentence.split():
            words.append([token, float(index), float(index + 1)])
            index += 1
    source = root / "source"
    source.mkdir()
    (source / "ingest.json").write_text(json.dumps({
        "video_id": "demo",
        "title": "Phone Review",
        "duration": 60.0,
        "frame_interval": 3.0,
        "words": words,
    }))

    pipeline = Pipeline(Config(storage_root=root / "data"))
    video = pipeline.ingest(source)
    report = pipeline.annotate(video.meta.video_id)
    print(f"workspace at {root}: {len(report.store.annotations)} frames annotated\n")
    return pipeline, root
