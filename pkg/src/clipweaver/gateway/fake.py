"""Deterministic offline provider for tests, demos and the evaluation harness.

Two modes, combinable:

* ``script`` - maps request fingerprints (or bare template names) to canned
  responses. A value may be a string, an exception to raise, or a list of
  either consumed call by call. Unscripted requests fail loudly.
* ``rules`` - template-aware deterministic behaviour, so a full pipeline run
  needs no recorded responses. Frame relevance is judged per line by
  substring match between the query's words and the line's description +
  voiceover text.

Everything is a pure function of the request, so repeated runs are
bit-identical regardless of threading.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from pathlib import Path
from typing import Mapping, Sequence

from ..errors import FakeMissError, ProviderError
from ..ingest import TimedWord
from .providers import ProviderProfile

ScriptValue = str | Exception | list  # list of str | Exception, consumed in order

SECONDS_PER_WORD = 0.4  # synthesis duration rule when no target is given

_VOICE_LINE = re.compile(r"^- timestamp: ([0-9.eE+-]+) \| (.*)$")
_SEGMENT_LINE = re.compile(
    r"^Segment \d+ \[start=([0-9.eE+-]+), end=([0-9.eE+-]+)\](.*)$"
)


def request_fingerprint(
    template_name: str, bindings: Mapping[str, str], images: Sequence[str] = ()
) -> str:
    payload = json.dumps(
        {"template": template_name, "bindings": dict(sorted(bindings.items())),
         "images": list(images)},
        sort_keys=True,
    )
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
    return f"{template_name}:{digest}"


class FakeProvider:
    def __init__(
        self,
        script: Mapping[str, ScriptValue] | None = None,
        rules: bool = False,
        transcripts: Mapping[str, list[TimedWord]] | None = None,
        honor_synthesis_target: bool = True,
        audio_dir: Path | None = None,
    ):
        # a scalar value answers every call; a list is consumed call by call
        self._script: dict[str, ScriptValue] = dict(script or {})
        self._consumed: dict[str, int] = {}
        self._rules = rules
        self._transcripts = dict(transcripts or {})
        self._honor_target = honor_synthesis_target
        self._audio_dir = audio_dir
        self._lock = threading.Lock()

    # -- completion ----------------------------------------------------------

    def complete(
        self,
        template_name: str,
        bindings: Mapping[str, str],
        rendered: str,
        images: Sequence[str],
        profile: ProviderProfile,
    ) -> str:
        fingerprint = request_fingerprint(template_name, bindings, images)
        scripted = self._next_scripted(fingerprint) or self._next_scripted(template_name)
        if scripted is not None:
            if isinstance(scripted, Exception):
                raise scripted
            if isinstance(scripted, type) and issubclass(scripted, Exception):
                raise scripted(f"scripted failure for {fingerprint}")
            return scripted
        if self._rules:
            return self._apply_rule(template_name, bindings)
        raise FakeMissError(f"no script entry and rules disabled for {fingerprint}")

    def _next_scripted(self, key: str):
        with self._lock:
            if key not in self._script:
                return None
            value = self._script[key]
            if not isinstance(value, list):
                return value
            index = self._consumed.get(key, 0)
            if index >= len(value):
                raise FakeMissError(f"script for {key!r} exhausted after {index} calls")
            self._consumed[key] = index + 1
            return value[index]

    # -- transcription / synthesis -------------------------------------------

    def transcribe(self, audio_ref: str, profile: ProviderProfile) -> list[TimedWord]:
        if audio_ref not in self._transcripts:
            raise ProviderError(f"audio ref not readable by fake provider: {audio_ref!r}")
        return list(self._transcripts[audio_ref])

    def synthesize(
        self, text: str, target_duration: float | None, profile: ProviderProfile
    ) -> tuple[str, float]:
        if target_duration is not None and self._honor_target:
            duration = float(target_duration)
        else:
            duration = len(text.split()) * SECONDS_PER_WORD
        name = hashlib.sha1(text.encode("utf-8")).hexdigest()[:12] + ".wav"
        ref = f"audio/{name}"
        if self._audio_dir is not None:
            self._audio_dir.mkdir(parents=True, exist_ok=True)
            (self._audio_dir / name).write_bytes(
                f"fake-audio duration={duration}\n".encode("utf-8")
            )
        return ref, duration

    # -- rule behaviours -------------------------------------------------------

    def _apply_rule(self, template_name: str, bindings: Mapping[str, str]) -> str:
        handler = getattr(self, f"_rule_{template_name}", None)
        if handler is None:
            raise FakeMissError(f"no rule behaviour for template {template_name!r}")
        return handler(bindings)

    def _rule_frame_retrieval(self, bindings: Mapping[str, str]) -> str:
        tokens = [
            t for t in re.findall(r"[a-z0-9]+", bindings["user_interest"].lower())
            if len(t) >= 3
        ]
        hits: list[str] = []
        for line in bindings["frame_voice_list"].splitlines():
            match = _VOICE_LINE.match(line)
            if not match:
                continue
            haystack = match.group(2).lower()
            if any(tok in haystack for tok in tokens):
                hits.append(match.group(1))
        return "[" + ", ".join(hits) + "]"

    def _rule_frame_annotation(self, bindings: Mapping[str, str]) -> str:
        words = bindings["transcript_window"].split()
        if not words:
            return "A frame with no narration nearby."
        return "Narration here says: " + " ".join(words[:12])

    def _rule_segment_summary(self, bindings: Mapping[str, str]) -> str:
        transcript = _transcript_tail(bindings["segment_text"])
        words = transcript.split()
        if words:
            title = " ".join(w.strip(".,!?") for w in words[:4]).title()
            summary = " ".join(words[:20])
        else:
            title = "Quiet Scene"
            summary = "A stretch of the video without narration."
        return json.dumps({"title": title, "summary": summary})

    def _rule_narrative(self, bindings: Mapping[str, str]) -> str:
        snippets = []
        for line in bindings["segments"].splitlines():
            match = _SEGMENT_LINE.match(line)
            if match:
                snippets.append(_transcript_tail(line))
        sentences = None
        for width in (8, 3, 1):
            candidate = [
                f"Part {i + 1} looks at {' '.join(s.split()[:width]) or 'this span of the video'}."
                for i, s in enumerate(snippets)
            ]
            if sum(len(c.split()) for c in candidate) <= 300:
                sentences = candidate
                break
        if sentences is None:
            sentences = ["This video covers the retrieved segments."]
        overall = " ".join(sentences)
        chunks = [
            {"chunk_id": i + 1, "narrative": sentence}
            for i, sentence in enumerate(sentences)
        ]
        return json.dumps({"overall_narrative": overall, "chunks": chunks})

    def _rule_playback_order(self, bindings: Mapping[str, str]) -> str:
        entries = []
        for i, match in enumerate(_iter_segment_matches(bindings["segments"])):
            start, end = match.group(1), match.group(2)
            entries.append(
                f'{{"start": {start}, "end": {end}, "playback_order": {i + 1}}}'
            )
        return '{"segments": [' + ", ".join(entries) + "]}"

    def _rule_chunk_assignment(self, bindings: Mapping[str, str]) -> str:
        chunks = json.loads(bindings["overall_narrative"])
        segments = [
            (m.group(1), m.group(2)) for m in _iter_segment_matches(bindings["segments"])
        ]
        # segment i belongs to chunk i; extras pile onto the last chunk
        buckets: list[list[tuple[str, str]]] = [[] for _ in chunks]
        for i, seg in enumerate(segments):
            buckets[min(i, len(chunks) - 1)].append(seg)
        rendered = []
        for chunk, bucket in zip(chunks, buckets):
            seg_json = ", ".join(f'{{"start": {s}, "end": {e}}}' for s, e in bucket)
            rendered.append(
                f'{{"chunk_id": {chunk["chunk_id"]}, '
                f'"narrative": {json.dumps(chunk["narrative"])}, '
                f'"segments": [{seg_json}]}}'
            )
        return '{"chunks": [' + ", ".join(rendered) + "]}"

    def _rule_title_card(self, bindings: Mapping[str, str]) -> str:
        prev_title = bindings.get("prev_title", "").strip()
        next_title = bindings.get("next_title", "").strip()
        if prev_title:
            return f"That covered {prev_title}. Up next: {next_title}."
        return f"Up next: {next_title}."


def _transcript_tail(segment_line: str) -> str:
    _, sep, tail = segment_line.partition(" | transcript: ")
    return tail.strip() if sep else ""


def _iter_segment_matches(segments_text: str):
    for line in segments_text.splitlines():
        match = _SEGMENT_LINE.match(line)
        if match:
            yield match


def fake_provider(
    script: Mapping[str, ScriptValue] | None = None, **kwargs
) -> FakeProvider:
    """Convenience constructor mirroring the scripted-fake contract."""
    return FakeProvider(script=script, **kwargs)
