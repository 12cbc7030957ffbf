"""Runtime configuration: YAML file plus CLIPWEAVER_* environment overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .errors import ConfigError
from .gateway.providers import (
    CAPABILITY_SYNTHESIS,
    CAPABILITY_TRANSCRIPTION,
    CAPABILITY_VISION_LANGUAGE,
    ProviderProfile,
    RetryPolicy,
)

ENV_PREFIX = "CLIPWEAVER_"

DEFAULT_EXTRACT_COMMAND = "ffmpeg -y -loglevel error -ss {timestamp} -i {input} -frames:v 1 -q:v 2 {output}"
DEFAULT_PROBE_COMMAND = "ffprobe -v error -show_entries format=duration -of csv=p=0 {input}"


@dataclass
class Config:
    storage_root: Path = Path("data")
    frame_interval: float = 3.0
    transcript_radius: float = 5.0
    batch_size: int = 100
    context_budget_tokens: int = 128_000
    title_card_duration: float = 4.0
    include_title_cards: bool = True
    rate_min: float = 0.75
    rate_max: float = 1.25
    parallelism: int = 4
    extract_command: str = DEFAULT_EXTRACT_COMMAND
    probe_command: str = DEFAULT_PROBE_COMMAND
    templates_dir: Path | None = None
    providers: dict[str, ProviderProfile] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.providers:
            self.providers = default_profiles()
        self.validate()

    def validate(self) -> None:
        positive = {
            "frame_interval": self.frame_interval,
            "transcript_radius": self.transcript_radius,
            "batch_size": self.batch_size,
            "context_budget_tokens": self.context_budget_tokens,
            "title_card_duration": self.title_card_duration,
            "rate_min": self.rate_min,
            "rate_max": self.rate_max,
            "parallelism": self.parallelism,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.rate_min > self.rate_max:
            raise ConfigError(f"rate_min {self.rate_min} exceeds rate_max {self.rate_max}")
        for capability in (
            CAPABILITY_VISION_LANGUAGE, CAPABILITY_TRANSCRIPTION, CAPABILITY_SYNTHESIS
        ):
            if capability not in self.providers:
                raise ConfigError(f"no provider profile for {capability}")

    # storage layout
    @property
    def videos_dir(self) -> Path:
        return self.storage_root / "videos"

    @property
    def stores_dir(self) -> Path:
        return self.storage_root / "stores"

    @property
    def sessions_dir(self) -> Path:
        return self.storage_root / "sessions"

    @property
    def audio_dir(self) -> Path:
        return self.storage_root / "audio"


def default_profiles() -> dict[str, ProviderProfile]:
    """Fake provider everywhere, so a fresh checkout runs offline."""
    return {
        capability: ProviderProfile(capability=capability, provider="fake")
        for capability in (
            CAPABILITY_VISION_LANGUAGE, CAPABILITY_TRANSCRIPTION, CAPABILITY_SYNTHESIS
        )
    }


_SCALAR_FIELDS = {
    "storage_root": Path,
    "frame_interval": float,
    "transcript_radius": float,
    "batch_size": int,
    "context_budget_tokens": int,
    "title_card_duration": float,
    "include_title_cards": lambda v: str(v).lower() in ("1", "true", "yes"),
    "rate_min": float,
    "rate_max": float,
    "parallelism": int,
    "extract_command": str,
    "probe_command": str,
    "templates_dir": Path,
}


def load_config(path: Path | None = None, env: dict | None = None) -> Config:
    env = os.environ if env is None else env
    raw: dict = {}
    if path is not None:
        loaded = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must hold a mapping")
        raw = loaded

    kwargs: dict = {}
    for name, cast in _SCALAR_FIELDS.items():
        value = env.get(ENV_PREFIX + name.upper(), raw.get(name))
        if value is not None:
            try:
                kwargs[name] = cast(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {name}: {value!r}") from exc

    profiles: dict[str, ProviderProfile] = {}
    for capability, settings in (raw.get("providers") or {}).items():
        retry = settings.get("retry", {})
        try:
            profiles[capability] = ProviderProfile(
                capability=capability,
                provider=settings.get("provider", "fake"),
                model=settings.get("model", ""),
                endpoint=settings.get("endpoint", ""),
                api_key_env=settings.get("api_key_env", ""),
                timeout=float(settings.get("timeout", 60.0)),
                retry=RetryPolicy(
                    max_attempts=int(retry.get("max_attempts", 3)),
                    backoff_base=float(retry.get("backoff_base", 1.0)),
                ),
                max_concurrency=int(settings.get("max_concurrency", 4)),
            )
        except ValueError as exc:
            raise ConfigError(f"bad provider profile for {capability}: {exc}") from exc
    if profiles:
        merged = default_profiles()
        merged.update(profiles)
        kwargs["providers"] = merged

    try:
        return Config(**kwargs)
    except TypeError as exc:
        known = {f.name for f in fields(Config)}
        unknown = set(raw) - known - {"providers"}
        raise ConfigError(f"unknown config keys {sorted(unknown)}" if unknown else str(exc)) from exc
