"""Text cleaning shared by the rule matcher and the featurizers."""

from __future__ import annotations

import re
from importlib import resources

__all__ = ["STOP_WORDS", "clean_text"]

_NON_WORD = re.compile(r"[^A-Za-z0-9_]+")


def _load_stop_words() -> frozenset[str]:
    text = resources.files("sigtriage.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(word for word in text.split() if word)


# Pinned English stop-word list shipped with the package.
STOP_WORDS = _load_stop_words()


def clean_text(text: str) -> list[str]:
    """Lowercased word tokens with symbols blanked and stop words removed.

    Every character outside [A-Za-z0-9_] becomes a space, so e.g.
    "PROTOCOL-FINGER 0 query" yields [protocol, finger, 0, query].
    Corpus-frequency filtering is a fit-time concern, not done here.
    """
    tokens = _NON_WORD.sub(" ", text).lower().split()
    return [t for t in tokens if t not in STOP_WORDS]
