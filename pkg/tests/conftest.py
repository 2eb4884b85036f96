from __future__ import annotations

import pytest

from wordfeed.simulate import bundled_deck
from wordfeed.vocab import Deck, WordEntry


@pytest.fixture(scope="session")
def deck_ja() -> Deck:
    return bundled_deck()


def make_deck(*pairs: tuple[str, str], name: str = "test", loanwords: set[str] = frozenset()) -> Deck:
    """Deck from (romanized, gloss) pairs; ids are w1, w2, ..."""
    entries = tuple(
        WordEntry(id=f"w{i+1}", romanized=rom, gloss=gloss, loanword=rom in loanwords)
        for i, (rom, gloss) in enumerate(pairs)
    )
    return Deck(name=name, entries=entries)
