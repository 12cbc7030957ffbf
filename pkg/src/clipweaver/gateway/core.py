"""The gateway: budget checks, retries, audit trail, capability routing."""

from __future__ import annotations

import logging
import math
import threading
import time
from dataclasses import dataclass, field
from typing import Mapping

from ..errors import BudgetError, ProviderError
from ..ingest import TimedWord
from .providers import (
    CAPABILITY_SYNTHESIS,
    CAPABILITY_TRANSCRIPTION,
    CAPABILITY_VISION_LANGUAGE,
    Provider,
    ProviderProfile,
)
from .templates import TemplateLibrary, render_prompt

logger = logging.getLogger(__name__)

CHARS_PER_TOKEN = 4  # rough budget estimate; images are not counted


@dataclass(frozen=True)
class CompletionRequest:
    template_name: str
    bindings: Mapping[str, str]
    images: tuple[str, ...] = ()
    max_context_tokens: int = 128_000


@dataclass(frozen=True)
class SynthesisResult:
    audio_ref: str
    duration: float


@dataclass
class AuditEntry:
    capability: str
    template_name: str
    attempts: int
    response: str | None
    error: str | None = None


@dataclass
class Gateway:
    """Shared front door to every model capability.

    Thread-safe: batches and per-frame calls may run concurrently, capped per
    profile by ``max_concurrency``.
    """

    templates: TemplateLibrary
    providers: Mapping[str, Provider]
    profiles: Mapping[str, ProviderProfile]  # keyed by capability
    audit: list[AuditEntry] = field(default_factory=list)
    _semaphores: dict[str, threading.BoundedSemaphore] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def estimate_tokens(self, text: str) -> int:
        return math.ceil(len(text) / CHARS_PER_TOKEN)

    def render(self, request: CompletionRequest) -> str:
        template = self.templates.get(request.template_name)
        return render_prompt(template, request.bindings)

    def complete(self, request: CompletionRequest, profile: ProviderProfile | None = None) -> str:
        profile = profile or self._profile(CAPABILITY_VISION_LANGUAGE)
        rendered = self.render(request)

        estimate = self.estimate_tokens(rendered)
        if estimate > request.max_context_tokens:
            raise BudgetError(
                f"request for {request.template_name!r} needs ~{estimate} tokens, "
                f"budget is {request.max_context_tokens}"
            )

        provider = self._provider(profile)
        attempts = 0
        last_error: Exception | None = None
        with self._semaphore(profile):
            while attempts < profile.retry.max_attempts:
                attempts += 1
                try:
                    response = provider.complete(
                        request.template_name, request.bindings, rendered,
                        request.images, profile,
                    )
                    self._record(AuditEntry(profile.capability, request.template_name,
                                            attempts, response))
                    return response
                except Exception as exc:  # noqa: BLE001 - provider faults are opaque
                    last_error = exc
                    if attempts < profile.retry.max_attempts:
                        wait = profile.retry.backoff_base * 2 ** (attempts - 1)
                        logger.warning(
                            "completion attempt %d/%d for %s failed (%s); retrying in %.1fs",
                            attempts, profile.retry.max_attempts,
                            request.template_name, exc, wait,
                        )
                        if wait > 0:
                            time.sleep(wait)
        self._record(AuditEntry(profile.capability, request.template_name,
                                attempts, None, error=str(last_error)))
        raise ProviderError(
            f"completion for {request.template_name!r} failed after {attempts} attempts: {last_error}"
        ) from last_error

    def transcribe(self, audio_ref: str, profile: ProviderProfile | None = None) -> list[TimedWord]:
        profile = profile or self._profile(CAPABILITY_TRANSCRIPTION)
        provider = self._provider(profile)
        try:
            words = provider.transcribe(audio_ref, profile)
        except ProviderError:
            raise
        except Exception as exc:  # noqa: BLE001
            raise ProviderError(f"transcription of {audio_ref!r} failed: {exc}") from exc
        words = sorted(words, key=lambda w: (w.start, w.end))
        if words and words[0].start < 0:
            raise ProviderError(f"transcription of {audio_ref!r} returned negative timings")
        self._record(AuditEntry(profile.capability, "<transcription>", 1, f"{len(words)} words"))
        return words

    def synthesize(
        self,
        text: str,
        target_duration: float | None = None,
        profile: ProviderProfile | None = None,
    ) -> SynthesisResult:
        if not text.strip():
            raise ValueError("cannot synthesize empty text")
        profile = profile or self._profile(CAPABILITY_SYNTHESIS)
        provider = self._provider(profile)
        try:
            ref, duration = provider.synthesize(text, target_duration, profile)
        except ProviderError:
            raise
        except Exception as exc:  # noqa: BLE001
            raise ProviderError(f"speech synthesis failed: {exc}") from exc
        if duration <= 0:
            raise ProviderError(f"synthesis returned non-positive duration {duration}")
        self._record(AuditEntry(profile.capability, "<synthesis>", 1, ref))
        return SynthesisResult(audio_ref=ref, duration=duration)

    # -- internals ---------------------------------------------------------

    def _profile(self, capability: str) -> ProviderProfile:
        try:
            return self.profiles[capability]
        except KeyError:
            raise ProviderError(f"no provider profile configured for {capability!r}") from None

    def _provider(self, profile: ProviderProfile) -> Provider:
        try:
            return self.providers[profile.provider]
        except KeyError:
            raise ProviderError(f"unknown provider {profile.provider!r}") from None

    def _semaphore(self, profile: ProviderProfile) -> threading.BoundedSemaphore:
        key = f"{profile.capability}:{profile.provider}:{profile.model}"
        with self._lock:
            if key not in self._semaphores:
                self._semaphores[key] = threading.BoundedSemaphore(profile.max_concurrency)
            return self._semaphores[key]

    def _record(self, entry: AuditEntry) -> None:
        with self._lock:
            self.audit.append(entry)
