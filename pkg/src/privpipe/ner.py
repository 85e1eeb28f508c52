"""Entity masking: find gazetteer mentions and replace them with category tags.

The recognizer is a deterministic longest-match scan over a gazetteer rather
than a learned model, so every downstream number is reproducible. Anything
with the same call shape (text in, spans out) can be swapped in later.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

from .audit import AuditRecord
from .corpus import LabeledExample
from .errors import ValidationError
from .resources import default_gazetteer_path

CATEGORIES = ("PER", "ORG", "LOC", "GPE")

MASK_TAGS = {
    "PER": "[PERSON]",
    "ORG": "[ORG]",
    "LOC": "[LOC]",
    "GPE": "[GPE]",
}

Recognizer = Callable[[str], "list[EntitySpan]"]

_ASCII_SEPARATORS = frozenset(" \t\n\r\v\f" + "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")


def _is_separator(ch: str) -> bool:
    if ch in _ASCII_SEPARATORS:
        return True
    if ch.isascii():
        return False
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[tuple[str, int, int]]:
    """Token spans (token, start, end); whitespace and punctuation separate."""
    tokens = []
    start = None
    for i, ch in enumerate(text):
        if _is_separator(ch):
            if start is not None:
                tokens.append((text[start:i], start, i))
                start = None
        elif start is None:
            start = i
    if start is not None:
        tokens.append((text[start:], start, len(text)))
    return tokens


@dataclass(frozen=True)
class EntitySpan:
    start: int  # inclusive character offset
    end: int  # exclusive character offset
    category: str
    surface: str


class Gazetteer:
    """Surface-form -> category lookup table, possibly with multi-word keys."""

    def __init__(self, entries: dict[str, str], case_sensitive: bool = True):
        self.case_sensitive = case_sensitive
        self.entries = dict(entries)
        by_first: dict[str, list[tuple[tuple[str, ...], str]]] = {}
        keyed: dict[tuple[str, ...], str] = {}
        for surface, category in self.entries.items():
            if category not in CATEGORIES:
                raise ValidationError(f"unknown entity category {category!r} for {surface!r}")
            words = tuple(tok for tok, _, _ in tokenize(surface))
            if not words:
                raise ValidationError(f"gazetteer surface {surface!r} has no tokens")
            key = words if case_sensitive else tuple(w.casefold() for w in words)
            if key in keyed and keyed[key] != category:
                raise ValidationError(
                    f"surface {surface!r} maps to both {keyed[key]} and {category}"
                )
            keyed[key] = category
            by_first.setdefault(key[0], []).append((key, category))
        for candidates in by_first.values():
            candidates.sort(key=lambda item: len(item[0]), reverse=True)
        self._by_first = by_first

    def __len__(self) -> int:
        return len(self.entries)

    def recognizer(self) -> Recognizer:
        return lambda text: recognize(text, self)


def load_gazetteer(path: str | Path, case_sensitive: bool = True) -> Gazetteer:
    """Load a gazetteer file: JSONL with "surface" and "category" keys."""
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            surface = obj.get("surface")
            category = obj.get("category")
            if not isinstance(surface, str) or not surface:
                raise ValidationError(f"gazetteer line {i}: bad surface")
            if surface in entries and entries[surface] != category:
                raise ValidationError(f"gazetteer line {i}: {surface!r} maps to two categories")
            entries[surface] = category
    return Gazetteer(entries, case_sensitive=case_sensitive)


@lru_cache(maxsize=4)
def default_gazetteer(case_sensitive: bool = True) -> Gazetteer:
    return load_gazetteer(default_gazetteer_path(), case_sensitive=case_sensitive)


def recognize(text: str, gazetteer: Gazetteer) -> list[EntitySpan]:
    """Leftmost, longest-match, non-overlapping gazetteer scan."""
    tokens = tokenize(text)
    if gazetteer.case_sensitive:
        keys = [tok for tok, _, _ in tokens]
    else:
        keys = [tok.casefold() for tok, _, _ in tokens]
    spans: list[EntitySpan] = []
    i = 0
    n = len(tokens)
    while i < n:
        matched = None
        for key, category in gazetteer._by_first.get(keys[i], ()):
            width = len(key)
            if i + width <= n and tuple(keys[i : i + width]) == key:
                matched = (width, category)
                break  # candidates are sorted longest first
        if matched is None:
            i += 1
            continue
        width, category = matched
        start = tokens[i][1]
        end = tokens[i + width - 1][2]
        spans.append(EntitySpan(start, end, category, text[start:end]))
        i += width
    return spans


def mask(text: str, spans: Sequence[EntitySpan]) -> str:
    """Replace each span with its category tag; everything else is untouched."""
    last_end = 0
    for span in spans:
        if not (0 <= span.start < span.end <= len(text)):
            raise ValueError(f"span {span} out of range for text of length {len(text)}")
        if span.start < last_end:
            raise ValueError(f"span {span} overlaps an earlier span or is unsorted")
        last_end = span.end
    out = text
    for span in reversed(spans):
        out = out[: span.start] + MASK_TAGS[span.category] + out[span.end :]
    return out


def mask_example(
    ex: LabeledExample, gazetteer: Gazetteer
) -> tuple[LabeledExample, list[AuditRecord]]:
    """Recognize-and-mask one example; the label is never touched."""
    spans = recognize(ex.text, gazetteer)
    if not spans:
        return ex, []
    records = [
        AuditRecord(
            example_id=ex.id,
            tier="ner",
            op=f"mask:{span.category}",
            position=span.start,
            original=span.surface,
            emitted=MASK_TAGS[span.category],
        )
        for span in spans
    ]
    return ex.with_text(mask(ex.text, spans)), records


def contains_surface(text: str, surface: str, case_sensitive: bool = True) -> bool:
    """True when the surface occurs in the text as a whole token sequence."""
    want = tuple(tok for tok, _, _ in tokenize(surface))
    have = [tok for tok, _, _ in tokenize(text)]
    if not case_sensitive:
        want = tuple(w.casefold() for w in want)
        have = [t.casefold() for t in have]
    width = len(want)
    if width == 0 or width > len(have):
        return False
    return any(tuple(have[i : i + width]) == want for i in range(len(have) - width + 1))
