"""Prompt templates with explicit placeholders.

Templates live as plain-text files, one per model task, in the package's
``templates/`` directory (overridable with a user directory). Placeholders
are ``{lower_snake_case}`` tokens; braces that open anything else (for
example the JSON shapes embedded in several templates) pass through
untouched, so ``str.format`` is deliberately not used.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from ..errors import TemplateError

_PLACEHOLDER = re.compile(r"\{([a-z_][a-z0-9_]*)\}")


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str

    @property
    def placeholders(self) -> frozenset[str]:
        return frozenset(_PLACEHOLDER.findall(self.body))


def render_prompt(template: PromptTemplate, bindings: Mapping[str, str]) -> str:
    """Substitute every placeholder verbatim; missing bindings are an error."""
    missing = sorted(template.placeholders - set(bindings))
    if missing:
        raise TemplateError(
            f"template {template.name!r} is missing bindings for: {', '.join(missing)}"
        )

    def _sub(match: re.Match[str]) -> str:
        return str(bindings[match.group(1)])

    return _PLACEHOLDER.sub(_sub, template.body)


class TemplateLibrary:
    """Loads templates by name from a directory (defaults to the packaged set)."""

    def __init__(self, directory: Path | None = None):
        self._directory = directory
        self._cache: dict[str, PromptTemplate] = {}

    def get(self, name: str) -> PromptTemplate:
        if name not in self._cache:
            self._cache[name] = PromptTemplate(name, self._read(name))
        return self._cache[name]

    def _read(self, name: str) -> str:
        filename = f"{name}.txt"
        if self._directory is not None:
            path = self._directory / filename
            if path.exists():
                return path.read_text(encoding="utf-8")
        packaged = resources.files("clipweaver").joinpath("templates", filename)
        try:
            return packaged.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise TemplateError(f"unknown prompt template {name!r}") from None
