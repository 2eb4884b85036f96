"""Vocabulary decks: loading, validation, exclusion filtering, study-set selection.

Deck files are line-oriented UTF-8 text, one word per line, pipe-delimited:

    id|romanized|native|gloss|pos|loanword

The leading ``id`` column may be omitted (5 fields), in which case the
1-based record number becomes the id. ``native`` may be empty. ``pos``
must be ``noun``; ``loanword`` is ``0`` or ``1``. Lines starting with
``#`` and blank lines are ignored.

Decks are immutable after load and safe to share across threads.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass


class DeckError(ValueError):
    """Malformed deck file or invalid deck operation."""


@dataclass(frozen=True)
class WordEntry:
    """One vocabulary item: a romanized word paired with its English gloss."""

    id: str
    romanized: str
    gloss: str
    native: str | None = None
    pos: str = "noun"
    loanword: bool = False


@dataclass(frozen=True)
class Deck:
    """An ordered, validated collection of word entries.

    Order is the source order of the deck file; the scheduler introduces
    new words in this order, so it must be deterministic.
    """

    name: str
    entries: tuple[WordEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.entries)

    def by_id(self, word_id: str) -> WordEntry:
        for e in self.entries:
            if e.id == word_id:
                return e
        raise DeckError(f"unknown word id {word_id!r}")


def _parse_record(line: str, lineno: int, ordinal: int) -> WordEntry:
    fields = line.split("|")
    if len(fields) == 5:
        fields = [str(ordinal)] + fields
    if len(fields) != 6:
        raise DeckError(
            f"line {lineno}: expected 5 or 6 pipe-delimited fields, got {len(fields)}"
        )
    word_id, romanized, native, gloss, pos, loanword = (f.strip() for f in fields)
    if not word_id:
        raise DeckError(f"line {lineno}: empty id")
    if any(ch.isspace() for ch in word_id) or "|" in word_id:
        raise DeckError(f"line {lineno}: id {word_id!r} contains whitespace or '|'")
    if not romanized:
        raise DeckError(f"line {lineno}: empty romanized form")
    if not gloss:
        raise DeckError(f"line {lineno}: empty gloss")
    if pos != "noun":
        raise DeckError(f"line {lineno}: unsupported part of speech {pos!r}")
    if loanword not in ("0", "1"):
        raise DeckError(f"line {lineno}: loanword flag must be 0 or 1, got {loanword!r}")
    return WordEntry(
        id=word_id,
        romanized=romanized,
        gloss=gloss,
        native=native or None,
        pos=pos,
        loanword=loanword == "1",
    )


def load_deck(text: str, name: str = "deck") -> Deck:
    """Parse deck-file content into a Deck, preserving source order.

    Raises DeckError for malformed records, duplicate ids, or an empty deck.
    """
    entries: list[WordEntry] = []
    seen: set[str] = set()
    ordinal = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        ordinal += 1
        entry = _parse_record(line, lineno, ordinal)
        if entry.id in seen:
            raise DeckError(f"line {lineno}: duplicate id {entry.id!r}")
        seen.add(entry.id)
        entries.append(entry)
    if not entries:
        raise DeckError("empty deck")
    return Deck(name=name, entries=tuple(entries))


def load_deck_file(path) -> Deck:
    with open(path, encoding="utf-8") as fh:
        return load_deck(fh.read(), name=str(path))


def apply_exclusions(deck: Deck) -> Deck:
    """Drop loanwords, then drop every entry whose romanized form collides.

    Loanwords are removed first; homograph detection then runs over the
    remainder, and removes *all* colliding entries rather than keeping one,
    so no ambiguous romanized form survives. Order is otherwise preserved.
    Idempotent.
    """
    kept = [e for e in deck.entries if not e.loanword]
    counts = Counter(e.romanized for e in kept)
    kept = [e for e in kept if counts[e.romanized] == 1]
    if not kept:
        raise DeckError("deck exhausted by exclusions")
    return Deck(name=deck.name, entries=tuple(kept))


def select_study_set(deck: Deck, n: int, seed: int) -> Deck:
    """Pick a deterministic pseudo-random n-subset, keeping source order."""
    if n < 1:
        raise DeckError("study set size must be at least 1")
    if n > len(deck):
        raise DeckError(f"study set size {n} exceeds deck size {len(deck)}")
    rng = random.Random(seed)
    picks = sorted(rng.sample(range(len(deck.entries)), n))
    return Deck(name=deck.name, entries=tuple(deck.entries[i] for i in picks))
