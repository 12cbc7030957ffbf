"""Word-count helpers. A word is a whitespace-delimited token."""

from __future__ import annotations

import re

_WS = re.compile(r"\s+")


def word_count(text: str) -> int:
    return len(text.split())


def truncate_words(text: str, limit: int) -> str:
    words = text.split()
    if len(words) <= limit:
        return text.strip()
    return " ".join(words[:limit])


def collapse_whitespace(text: str) -> str:
    return _WS.sub(" ", text).strip()
