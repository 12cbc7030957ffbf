"""OpenAI-compatible HTTP provider.

Serves all three capabilities against a ``/v1``-style API. Endpoints, model
names and the API-key environment variable come from the profile; nothing is
hard-coded. Only exercised when a real endpoint is configured - the test
suite runs entirely on the fake provider.
"""

from __future__ import annotations

import base64
import hashlib
import os
from pathlib import Path
from typing import Mapping, Sequence

import httpx

from ..errors import ProviderError
from ..ingest import TimedWord
from .providers import ProviderProfile


class OpenAiHttpProvider:
    def __init__(self, audio_dir: Path | None = None):
        self._audio_dir = audio_dir

    def _headers(self, profile: ProviderProfile) -> dict[str, str]:
        key = os.environ.get(profile.api_key_env, "") if profile.api_key_env else ""
        headers = {}
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(
        self,
        template_name: str,
        bindings: Mapping[str, str],
        rendered: str,
        images: Sequence[str],
        profile: ProviderProfile,
    ) -> str:
        content: list[dict] = [{"type": "text", "text": rendered}]
        for image_path in images:
            data = Path(image_path).read_bytes()
            encoded = base64.b64encode(data).decode("ascii")
            content.append(
                {"type": "image_url",
                 "image_url": {"url": f"data:image/jpeg;base64,{encoded}"}}
            )
        body = {
            "model": profile.model,
            "messages": [{"role": "user", "content": content}],
        }
        data = self._post_json(profile, "/chat/completions", body)
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed completion response: {data!r}") from exc

    def transcribe(self, audio_ref: str, profile: ProviderProfile) -> list[TimedWord]:
        path = Path(audio_ref)
        if not path.exists():
            raise ProviderError(f"audio file not readable: {audio_ref}")
        with httpx.Client(timeout=profile.timeout) as client:
            response = client.post(
                profile.endpoint.rstrip("/") + "/audio/transcriptions",
                headers=self._headers(profile),
                data={
                    "model": profile.model,
                    "response_format": "verbose_json",
                    "timestamp_granularities[]": "word",
                },
                files={"file": (path.name, path.read_bytes())},
            )
        data = self._check(response)
        words = data.get("words", [])
        return [TimedWord(w["word"], float(w["start"]), float(w["end"])) for w in words]

    def synthesize(
        self, text: str, target_duration: float | None, profile: ProviderProfile
    ) -> tuple[str, float]:
        body = {"model": profile.model, "input": text, "voice": "alloy",
                "response_format": "wav"}
        if target_duration is not None:
            # nearest supported rate for the requested duration
            natural = len(text.split()) * 0.4
            body["speed"] = max(0.25, min(4.0, natural / target_duration))
        with httpx.Client(timeout=profile.timeout) as client:
            response = client.post(
                profile.endpoint.rstrip("/") + "/audio/speech",
                headers=self._headers(profile),
                json=body,
            )
        if response.status_code >= 400:
            raise ProviderError(f"synthesis failed: HTTP {response.status_code}")
        audio = response.content
        duration = _wav_duration(audio)
        name = hashlib.sha1(text.encode("utf-8")).hexdigest()[:12] + ".wav"
        ref = f"audio/{name}"
        if self._audio_dir is not None:
            self._audio_dir.mkdir(parents=True, exist_ok=True)
            (self._audio_dir / name).write_bytes(audio)
        return ref, duration

    def _post_json(self, profile: ProviderProfile, path: str, body: dict) -> dict:
        with httpx.Client(timeout=profile.timeout) as client:
            response = client.post(
                profile.endpoint.rstrip("/") + path,
                headers=self._headers(profile),
                json=body,
            )
        return self._check(response)

    @staticmethod
    def _check(response: httpx.Response) -> dict:
        if response.status_code >= 400:
            raise ProviderError(
                f"provider returned HTTP {response.status_code}: {response.text[:200]}"
            )
        return response.json()


def _wav_duration(data: bytes) -> float:
    """Duration of a PCM WAV payload; falls back to a size heuristic."""
    if len(data) > 44 and data[:4] == b"RIFF":
        byte_rate = int.from_bytes(data[28:32], "little")
        if byte_rate > 0:
            return (len(data) - 44) / byte_rate
    return max(0.1, len(data) / 32_000)
