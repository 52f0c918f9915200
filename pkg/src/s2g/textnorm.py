"""Text normalisation helpers used for name and sentence matching.

Names are matched case-insensitively with leading articles stripped;
sentences are matched with punctuation and all articles removed so that
"The adventurer sets the bush on fire." and "adventurer sets bush on fire"
compare equal.
"""

from __future__ import annotations

import re

ARTICLES = frozenset({"the", "a", "an"})

_PUNCT_RE = re.compile(r"[^\w\s]")
_WS_RE = re.compile(r"\s+")


def collapse_ws(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


def normalize_name(surface: str) -> str:
    """Lowercase, collapse whitespace, and strip leading articles."""
    tokens = collapse_ws(surface.lower()).split(" ")
    while tokens and tokens[0] in ARTICLES:
        tokens = tokens[1:]
    return " ".join(tokens)


def normalize_sentence(sentence: str) -> str:
    """Lowercase, drop punctuation, and remove every article token."""
    cleaned = _PUNCT_RE.sub(" ", sentence.lower())
    tokens = [t for t in cleaned.split() if t not in ARTICLES]
    return " ".join(tokens)
