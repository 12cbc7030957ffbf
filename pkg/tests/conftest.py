"""Shared fixtures: fake-backed gateways, synthetic videos, tiny stores."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from clipweaver.annotation import AnnotationStore, FrameAnnotation
from clipweaver.config import Config
from clipweaver.gateway.core import Gateway
from clipweaver.gateway.fake import FakeProvider
from clipweaver.gateway.providers import (
    CAPABILITY_SYNTHESIS,
    CAPABILITY_TRANSCRIPTION,
    CAPABILITY_VISION_LANGUAGE,
    ProviderProfile,
    RetryPolicy,
)
from clipweaver.gateway.templates import TemplateLibrary
from clipweaver.ingest import VideoMeta

def make_profiles(max_attempts: int = 3) -> dict[str, ProviderProfile]:
    retry = RetryPolicy(max_attempts=max_attempts, backoff_base=0.0)
    return {
        cap: ProviderProfile(capability=cap, provider="fake", retry=retry)
        for cap in (CAPABILITY_VISION_LANGUAGE, CAPABILITY_TRANSCRIPTION, CAPABILITY_SYNTHESIS)
    }


def make_gateway(provider: FakeProvider, max_attempts: int = 3) -> Gateway:
    return Gateway(
        templates=TemplateLibrary(),
        providers={"fake": provider},
        profiles=make_profiles(max_attempts),
    )


@pytest.fixture
def rule_gateway(tmp_path) -> Gateway:
    return make_gateway(FakeProvider(rules=True, audio_dir=tmp_path / "audio"))


def make_store(
    entries: list[tuple[float, str, str]],
    video_id: str = "vid",
    title: str = "A Test Video",
    duration: float | None = None,
    frame_interval: float = 3.0,
) -> AnnotationStore:
    if duration is None:
        duration = (max(t for t, _, _ in entries) + frame_interval) if entries else 0.0
    meta = VideoMeta(video_id, title, duration, frame_interval)
    annotations = tuple(FrameAnnotation(t, desc, voice) for t, desc, voice in entries)
    return AnnotationStore(video_id, meta, annotations)


# ---------------------------------------------------------------------------
# The synthetic 60-second review video: one word per second, nine sentences.
# Battery talk spans words 15-35, camera talk words 36-48.
# ---------------------------------------------------------------------------

SYNTH_SENTENCES = [
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

SYNTH_DURATION = 60.0


def synth_words() -> list[list]:
    words = []
    index = 0
    for sentence in SYNTH_SENTENCES:
        for token in sentence.split():
            words.append([token, float(index), float(index + 1)])
            index += 1
    assert index == 60
    return words


def write_synth_source(source_dir: Path, video_id: str = "demo") -> Path:
    source_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "video_id": video_id,
        "title": "Phone Review",
        "duration": SYNTH_DURATION,
        "frame_interval": 3.0,
        "words": synth_words(),
    }
    (source_dir / "ingest.json").write_text(json.dumps(manifest, indent=2))
    return source_dir


def make_config(tmp_path: Path, **overrides) -> Config:
    defaults = dict(storage_root=tmp_path / "data", providers=make_profiles())
    defaults.update(overrides)
    return Config(**defaults)
