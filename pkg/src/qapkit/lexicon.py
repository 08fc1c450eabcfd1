"""Word and phrase lists used by the feature extractor.

A lexicon is a set of token sequences: single words ("really") or short
phrases ("you know"). Matching is case-insensitive because entries and
probe text go through the same tokenizer. Files are UTF-8, one entry per
line, blank lines and ``#`` comments ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

from .text import tokenize


class EmptyLexicon(ValueError):
    """A lexicon source contained no usable entries."""


@dataclass(frozen=True)
class Lexicon:
    name: str
    entries: frozenset[tuple[str, ...]]

    def __post_init__(self) -> None:
        if not self.entries:
            raise EmptyLexicon(f"lexicon {self.name!r} has no entries")

    @classmethod
    def from_phrases(cls, name: str, phrases: Iterable[str]) -> "Lexicon":
        """Build a lexicon by tokenizing each phrase."""
        entries = frozenset(t for t in (tuple(tokenize(p)) for p in phrases) if t)
        return cls(name, entries)

    def _lengths(self) -> set[int]:
        return {len(e) for e in self.entries}

    def contains_token(self, token: str) -> bool:
        return (token.lower(),) in self.entries

    def contains(self, tokens: Sequence[str]) -> bool:
        """True if any entry occurs as a contiguous run inside ``tokens``."""
        for n in self._lengths():
            if n > len(tokens):
                continue
            for i in range(len(tokens) - n + 1):
                if tuple(tokens[i : i + n]) in self.entries:
                    return True
        return False

    def matches_end(self, tokens: Sequence[str]) -> bool:
        """True if some entry equals the final tokens of the sequence."""
        for n in self._lengths():
            if 0 < n <= len(tokens) and tuple(tokens[-n:]) in self.entries:
                return True
        return False


def load_lexicon(source: Union[str, Path, Iterable[str]], name: str | None = None) -> Lexicon:
    """Read a lexicon from a path or an iterable of lines.

    Raises EmptyLexicon when nothing but blanks and comments is left.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        with open(path, encoding="utf-8") as f:
            lines = f.readlines()
        if name is None:
            name = path.stem
    else:
        lines = list(source)
        if name is None:
            name = "lexicon"
    phrases = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        phrases.append(line)
    return Lexicon.from_phrases(name, phrases)


DEFAULT_WH = Lexicon.from_phrases(
    "wh",
    ["who", "whom", "whose", "what", "which", "where", "when", "why", "how"],
)

DEFAULT_AUX = Lexicon.from_phrases(
    "aux",
    [
        "am", "is", "are", "was", "were",
        "do", "does", "did",
        "have", "has", "had",
        "can", "could", "will", "would", "shall", "should", "may", "might", "must",
    ],
)

DEFAULT_TAG = Lexicon.from_phrases("tag", ["isn't it", "right"])

DEFAULT_CLICHE = Lexicon.from_phrases(
    "cliche",
    ["you know", "really", "oh yeah", "right", "okay", "huh"],
)
