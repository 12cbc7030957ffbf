"""Video ingest: frame sampling, frame extraction, timed transcripts, sentences.

A video enters the system either as a media file (frames pulled out by an
external command, transcript fetched from the transcription provider) or as a
"prepared" directory that already carries frame images and word timings.
Both paths produce the same on-disk layout under ``<data>/videos/<video_id>/``:

    meta.json     video_id, title, duration, frame_interval, frame list
    frames/       one still image per sampled timestamp
    words.jsonl   one record per transcript word: {"text", "start", "end"}

All image and audio references stored in artifacts are relative to the data
root so stores stay byte-identical when the tree is relocated.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import shlex
import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IngestError, StoreLoadError

logger = logging.getLogger(__name__)

# Minimal valid 1x1 grey PNG, used when a prepared source ships no images.
_STUB_PNG = bytes.fromhex(
    "89504e470d0a1a0a0000000d4948445200000001000000010802000000907753de"
    "0000000c4944415408d763a8a9a90700030c01a14a43cf0000000049454e44ae426082"
)


@dataclass(frozen=True)
class VideoMeta:
    video_id: str
    title: str
    duration: float
    frame_interval: float = 3.0

    def __post_init__(self) -> None:
        if self.duration < 0:
            raise ValueError(f"negative duration {self.duration}")
        if self.frame_interval <= 0:
            raise ValueError(f"non-positive frame interval {self.frame_interval}")


@dataclass(frozen=True)
class FrameRef:
    timestamp: float
    image_ref: str  # path relative to the video directory


@dataclass(frozen=True)
class TimedWord:
    text: str
    start: float
    end: float

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"word {self.text!r} ends before it starts")


@dataclass(frozen=True)
class Sentence:
    text: str
    start: float
    end: float


@dataclass(frozen=True)
class SentenceIndex:
    sentences: tuple[Sentence, ...]


def sample_frame_timestamps(duration: float, interval: float) -> list[float]:
    """Sampling grid {k*interval | k >= 0, k*interval < duration}, ascending."""
    if interval <= 0:
        raise ValueError(f"non-positive interval {interval}")
    if duration < 0:
        raise ValueError(f"negative duration {duration}")
    out: list[float] = []
    k = 0
    while k * interval < duration:
        out.append(k * interval)
        k += 1
    return out


def transcript_window(words: list[TimedWord], center: float, radius: float) -> str:
    """Words whose [start, end] touches [max(0, center-radius), center+radius].

    A function of the word *set*: input order does not matter. Zero-length
    words count when their instant lies in the window.
    """
    if radius <= 0:
        raise ValueError(f"non-positive radius {radius}")
    lo = max(0.0, center - radius)
    hi = center + radius
    hits = [w for w in words if w.end >= lo and w.start <= hi]
    hits.sort(key=lambda w: (w.start, w.end, w.text))
    return " ".join(w.text for w in hits)


_TERMINAL = (".", "?", "!")


def build_sentence_index(words: list[TimedWord]) -> SentenceIndex:
    """Split time-sorted words into sentences at terminal punctuation.

    A sentence closes after any token ending in ``.``/``?``/``!``; trailing
    unterminated words form a final sentence. Sentence span = first word's
    start to last word's end.
    """
    sentences: list[Sentence] = []
    current: list[TimedWord] = []
    for word in words:
        current.append(word)
        if word.text.rstrip().endswith(_TERMINAL):
            sentences.append(_close_sentence(current))
            current = []
    if current:
        sentences.append(_close_sentence(current))
    return SentenceIndex(tuple(sentences))


def _close_sentence(run: list[TimedWord]) -> Sentence:
    return Sentence(
        text=" ".join(w.text for w in run),
        start=run[0].start,
        end=run[-1].end,
    )


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_timed_words(words: list[TimedWord], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for w in words:
            fh.write(json.dumps({"text": w.text, "start": w.start, "end": w.end}) + "\n")


def load_timed_words(path: Path) -> list[TimedWord]:
    words: list[TimedWord] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                words.append(TimedWord(rec["text"], float(rec["start"]), float(rec["end"])))
            except (ValueError, KeyError, TypeError) as exc:
                raise StoreLoadError(f"bad word record: {exc}", lineno) from exc
    return words


@dataclass
class IngestedVideo:
    """A video's on-disk ingest result: metadata, frame refs, timed words."""

    meta: VideoMeta
    video_dir: Path
    frames: list[FrameRef]
    words: list[TimedWord] = field(default_factory=list)

    def frame_path(self, frame: FrameRef) -> Path:
        return self.video_dir / frame.image_ref

    def save(self) -> None:
        self.video_dir.mkdir(parents=True, exist_ok=True)
        meta = {
            "video_id": self.meta.video_id,
            "title": self.meta.title,
            "duration": self.meta.duration,
            "frame_interval": self.meta.frame_interval,
            "frames": [{"timestamp": f.timestamp, "image_ref": f.image_ref} for f in self.frames],
        }
        (self.video_dir / "meta.json").write_text(
            json.dumps(meta, indent=2) + "\n", encoding="utf-8"
        )
        save_timed_words(self.words, self.video_dir / "words.jsonl")

    @classmethod
    def load(cls, video_dir: Path) -> "IngestedVideo":
        meta_path = video_dir / "meta.json"
        if not meta_path.exists():
            raise IngestError(f"no ingested video at {video_dir}")
        raw = json.loads(meta_path.read_text(encoding="utf-8"))
        meta = VideoMeta(
            video_id=raw["video_id"],
            title=raw["title"],
            duration=float(raw["duration"]),
            frame_interval=float(raw["frame_interval"]),
        )
        frames = [FrameRef(float(f["timestamp"]), f["image_ref"]) for f in raw["frames"]]
        words_path = video_dir / "words.jsonl"
        words = load_timed_words(words_path) if words_path.exists() else []
        return cls(meta=meta, video_dir=video_dir, frames=frames, words=words)


# ---------------------------------------------------------------------------
# Frame extraction via an external command
# ---------------------------------------------------------------------------

_CMD_PLACEHOLDER = re.compile(r"\{(input|timestamp|output)\}")


def _render_command(template: str, **values: str) -> list[str]:
    rendered = _CMD_PLACEHOLDER.sub(lambda m: values[m.group(1)], template)
    return shlex.split(rendered)


def _frame_filename(timestamp: float) -> str:
    return f"{timestamp:010.3f}.jpg"


def extract_frames(
    video_path: Path,
    timestamps: list[float],
    frames_dir: Path,
    command_template: str,
) -> list[FrameRef]:
    """Persist one still per timestamp by running the configured command.

    The template carries {input}, {timestamp} and {output} placeholders.
    """
    if timestamps and not video_path.exists():
        raise IngestError(f"video source not readable: {video_path}")
    frames_dir.mkdir(parents=True, exist_ok=True)
    refs: list[FrameRef] = []
    for ts in timestamps:
        out_path = frames_dir / _frame_filename(ts)
        argv = _render_command(
            command_template,
            input=str(video_path),
            timestamp=repr(float(ts)),
            output=str(out_path),
        )
        proc = subprocess.run(argv, capture_output=True, text=True)
        if proc.returncode != 0 or not out_path.exists():
            tail = (proc.stderr or proc.stdout or "").strip()[-400:]
            raise IngestError(f"frame extraction failed at t={ts}: {tail or 'no output file'}")
        refs.append(FrameRef(ts, f"frames/{out_path.name}"))
    return refs


def probe_duration(video_path: Path, probe_command: str) -> float:
    """Ask the configured probe command for the video duration in seconds."""
    if not video_path.exists():
        raise IngestError(f"video source not readable: {video_path}")
    argv = _render_command(probe_command, input=str(video_path), timestamp="0", output="")
    proc = subprocess.run(argv, capture_output=True, text=True)
    if proc.returncode != 0:
        raise IngestError(f"duration probe failed: {(proc.stderr or '').strip()[-400:]}")
    try:
        return float(proc.stdout.strip().splitlines()[0])
    except (ValueError, IndexError) as exc:
        raise IngestError(f"duration probe printed no number: {proc.stdout!r}") from exc


def derive_video_id(title: str, source: str) -> str:
    digest = hashlib.sha1(f"{title}|{source}".encode("utf-8")).hexdigest()[:10]
    slug = re.sub(r"[^a-z0-9]+", "-", title.lower()).strip("-")[:24] or "video"
    return f"{slug}-{digest}"


# ---------------------------------------------------------------------------
# Ingest entry points
# ---------------------------------------------------------------------------


def ingest_prepared(source_dir: Path, videos_dir: Path, video_id: str | None = None) -> IngestedVideo:
    """Ingest from a prepared directory holding ``ingest.json`` and optional frames.

    The manifest carries title, duration, optional frame_interval, and words
    either inline (``words: [[text, start, end], ...]``) or as a file name.
    Missing frame images are filled with stub stills so downstream stages can
    run against synthetic videos.
    """
    manifest_path = source_dir / "ingest.json"
    if not manifest_path.exists():
        raise IngestError(f"no ingest.json in {source_dir}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))

    title = manifest.get("title", source_dir.name)
    vid = video_id or manifest.get("video_id") or derive_video_id(title, source_dir.name)
    meta = VideoMeta(
        video_id=vid,
        title=title,
        duration=float(manifest["duration"]),
        frame_interval=float(manifest.get("frame_interval", 3.0)),
    )

    if "words" in manifest:
        words = [TimedWord(str(t), float(s), float(e)) for t, s, e in manifest["words"]]
    elif "words_file" in manifest:
        words = load_timed_words(source_dir / manifest["words_file"])
    else:
        words = []
    words.sort(key=lambda w: (w.start, w.end))

    video_dir = videos_dir / vid
    frames_dir = video_dir / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    src_frames = source_dir / manifest.get("frames_dir", "frames")

    frames: list[FrameRef] = []
    for ts in sample_frame_timestamps(meta.duration, meta.frame_interval):
        name = _frame_filename(ts)
        dest = frames_dir / name
        src = src_frames / name
        if src.exists():
            shutil.copyfile(src, dest)
        elif not dest.exists():
            dest.write_bytes(_STUB_PNG)
        frames.append(FrameRef(ts, f"frames/{name}"))

    video = IngestedVideo(meta=meta, video_dir=video_dir, frames=frames, words=words)
    video.save()
    logger.info("ingested prepared video %s (%d frames, %d words)", vid, len(frames), len(words))
    return video


def ingest_media(
    video_path: Path,
    videos_dir: Path,
    title: str,
    gateway,
    extract_command: str,
    probe_command: str,
    frame_interval: float = 3.0,
    video_id: str | None = None,
) -> IngestedVideo:
    """Ingest a media file: probe duration, extract stills, transcribe audio."""
    duration = probe_duration(video_path, probe_command)
    vid = video_id or derive_video_id(title, str(video_path))
    meta = VideoMeta(video_id=vid, title=title, duration=duration, frame_interval=frame_interval)

    video_dir = videos_dir / vid
    timestamps = sample_frame_timestamps(duration, frame_interval)
    frames = extract_frames(video_path, timestamps, video_dir / "frames", extract_command)

    words = gateway.transcribe(str(video_path))
    words = sorted(words, key=lambda w: (w.start, w.end))

    video = IngestedVideo(meta=meta, video_dir=video_dir, frames=frames, words=words)
    video.save()

    # link the original asset into the data tree so the player can range-request it
    link = video_dir / f"source{video_path.suffix or '.mp4'}"
    try:
        if not link.exists():
            link.symlink_to(video_path.resolve())
    except OSError:
        logger.info("could not link %s into %s; serve the asset separately", video_path, link)

    logger.info("ingested media %s (%d frames, %d words)", vid, len(frames), len(words))
    return video


__all__ = [
    "VideoMeta",
    "FrameRef",
    "TimedWord",
    "Sentence",
    "SentenceIndex",
    "IngestedVideo",
    "sample_frame_timestamps",
    "transcript_window",
    "build_sentence_index",
    "save_timed_words",
    "load_timed_words",
    "extract_frames",
    "probe_duration",
    "ingest_prepared",
    "ingest_media",
    "derive_video_id",
]
