"""Provider interface and per-capability profiles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Protocol, Sequence

from ..ingest import TimedWord

CAPABILITY_VISION_LANGUAGE = "vision_language"
CAPABILITY_TRANSCRIPTION = "transcription"
CAPABILITY_SYNTHESIS = "synthesis"

CAPABILITIES = (
    CAPABILITY_VISION_LANGUAGE,
    CAPABILITY_TRANSCRIPTION,
    CAPABILITY_SYNTHESIS,
)


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_base: float = 1.0  # seconds; attempt k waits base * 2**(k-1)

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.backoff_base < 0:
            raise ValueError("backoff_base must be >= 0")


@dataclass(frozen=True)
class ProviderProfile:
    capability: str
    provider: str = "fake"
    model: str = ""
    endpoint: str = ""
    api_key_env: str = ""
    timeout: float = 60.0
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    max_concurrency: int = 4

    def __post_init__(self) -> None:
        if self.capability not in CAPABILITIES:
            raise ValueError(f"unknown capability {self.capability!r}")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")


class Provider(Protocol):
    """One backend able to serve some subset of the three capabilities."""

    def complete(
        self,
        template_name: str,
        bindings: Mapping[str, str],
        rendered: str,
        images: Sequence[str],
        profile: ProviderProfile,
    ) -> str: ...

    def transcribe(self, audio_ref: str, profile: ProviderProfile) -> list[TimedWord]: ...

    def synthesize(
        self, text: str, target_duration: float | None, profile: ProviderProfile
    ) -> tuple[str, float]: ...
