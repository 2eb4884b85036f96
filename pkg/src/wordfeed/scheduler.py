"""Spaced-repetition state and feed-recency word selection.

Selection rule: among introduced words whose due time has passed, show the
one that appeared least recently in the feed; if none is overdue,
introduce the next new word in deck order; once the deck is exhausted,
fall back to the earliest-due word. Ties break by deck order, and a word
that has never appeared in the feed sorts as least recent.

Review outcomes move a word along a strictly increasing duration ladder:
a correct answer advances one box (saturating at the top), an incorrect
answer resets to box 0. Impressions only refresh feed recency; they never
touch the box or due time.

State mutations must be serialized per user by the caller; selection is a
read-only function of (state, now).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .vocab import Deck

#: 30s, 5m, 30m, 2h, 12h, 2d, 7d — spans a one-week study at desk scale.
DEFAULT_LADDER: tuple[float, ...] = (30.0, 300.0, 1800.0, 7200.0, 43200.0, 172800.0, 604800.0)

_ABSENT = "-"


class SchedulerError(ValueError):
    """Invalid scheduler operation or corrupt serialized state."""


@dataclass
class WordScheduleState:
    word_id: str
    introduced: bool = False
    box: int = 0
    due_at: float = 0.0
    last_feed_at: float | None = None
    answers: int = 0
    correct: int = 0


@dataclass
class SchedulerState:
    words: tuple[str, ...]  # deck order
    ladder: tuple[float, ...]
    states: dict[str, WordScheduleState]
    new_word_cursor: int = 0


@dataclass(frozen=True)
class NextWord:
    word_id: str
    is_new: bool


def init_state(deck: Deck, ladder: tuple[float, ...] = DEFAULT_LADDER, now: float = 0.0) -> SchedulerState:
    """Fresh state: every word unintroduced and due immediately upon
    introduction, cursor at the start of the deck."""
    if len(deck) == 0:
        raise SchedulerError("empty deck")
    ladder = tuple(float(x) for x in ladder)
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])) or ladder[0] <= 0:
        raise SchedulerError("ladder must be strictly increasing and positive")
    states = {e.id: WordScheduleState(word_id=e.id, due_at=float(now)) for e in deck}
    return SchedulerState(words=deck.ids(), ladder=ladder, states=states)


def _best(candidates, key):
    best = None
    best_key = None
    for cand in candidates:
        k = key(cand)
        if best_key is None or k < best_key:
            best, best_key = cand, k
    return best


def next_word(state: SchedulerState, now: float, exclude: str | None = None) -> NextWord:
    """Select the word to display. Read-only and deterministic.

    `exclude` suppresses one word (used right after it was answered
    correctly, so the next quiz tests a different word); when it is the
    only candidate in the whole deck it is returned anyway.
    """
    sel = _select(state, now, exclude)
    if sel is None and exclude is not None:
        sel = _select(state, now, None)
    if sel is None:
        raise SchedulerError("no selectable word")
    return sel


def _select(state: SchedulerState, now: float, exclude: str | None) -> NextWord | None:
    neg_inf = float("-inf")
    overdue = [
        (i, ws)
        for i, wid in enumerate(state.words)
        if (ws := state.states[wid]).introduced and ws.due_at <= now and wid != exclude
    ]
    if overdue:
        i, ws = _best(overdue, key=lambda c: (c[1].last_feed_at if c[1].last_feed_at is not None else neg_inf, c[0]))
        return NextWord(ws.word_id, is_new=False)
    if state.new_word_cursor < len(state.words):
        wid = state.words[state.new_word_cursor]
        if wid != exclude:
            return NextWord(wid, is_new=True)
    introduced = [
        (i, ws)
        for i, wid in enumerate(state.words)
        if (ws := state.states[wid]).introduced and wid != exclude
    ]
    if introduced:
        i, ws = _best(
            introduced,
            key=lambda c: (c[1].due_at, c[1].last_feed_at if c[1].last_feed_at is not None else neg_inf, c[0]),
        )
        return NextWord(ws.word_id, is_new=False)
    return None


def record_impression(state: SchedulerState, word_id: str, now: float, introducing: bool = False) -> None:
    """Mark a feed appearance. Introductions flip the word to introduced and
    advance the new-word cursor; box and due time are never touched."""
    ws = state.states.get(word_id)
    if ws is None:
        raise SchedulerError(f"unknown word {word_id!r}")
    if introducing:
        if ws.introduced:
            raise SchedulerError(f"word {word_id!r} already introduced")
        if state.new_word_cursor >= len(state.words) or state.words[state.new_word_cursor] != word_id:
            raise SchedulerError(f"word {word_id!r} is not next in deck order")
        ws.introduced = True
        state.new_word_cursor += 1
    elif not ws.introduced:
        raise SchedulerError(f"impression of unintroduced word {word_id!r}")
    ws.last_feed_at = now


def record_answer(state: SchedulerState, word_id: str, correct: bool, now: float) -> None:
    ws = state.states.get(word_id)
    if ws is None:
        raise SchedulerError(f"unknown word {word_id!r}")
    if not ws.introduced:
        raise SchedulerError(f"answer for unintroduced word {word_id!r}")
    ws.answers += 1
    if correct:
        ws.correct += 1
        ws.box = min(ws.box + 1, len(state.ladder) - 1)
    else:
        ws.box = 0
    ws.due_at = now + state.ladder[ws.box]
    ws.last_feed_at = now


def _fmt_opt(value: float | None) -> str:
    return _ABSENT if value is None else repr(value)


def snapshot(state: SchedulerState) -> str:
    """Serialize to versioned line-oriented text. repr() floats round-trip
    exactly, so restore(snapshot(s)) == s field for field."""
    lines = [
        "wordfeed-scheduler v1",
        "ladder " + " ".join(repr(x) for x in state.ladder),
        f"cursor {state.new_word_cursor}",
    ]
    for wid in state.words:
        ws = state.states[wid]
        lines.append(
            f"word {wid} introduced={int(ws.introduced)} box={ws.box}"
            f" due_at={repr(ws.due_at)} last_feed_at={_fmt_opt(ws.last_feed_at)}"
            f" answers={ws.answers} correct={ws.correct}"
        )
    return "\n".join(lines) + "\n"


def restore(text: str) -> SchedulerState:
    lines = text.splitlines()
    if not lines or lines[0] != "wordfeed-scheduler v1":
        raise SchedulerError("snapshot line 1: bad or missing header")
    try:
        _, ladder_text = lines[1].split(" ", 1)
        ladder = tuple(float(x) for x in ladder_text.split())
        if lines[1].split(" ", 1)[0] != "ladder" or not ladder:
            raise ValueError
    except (IndexError, ValueError):
        raise SchedulerError("snapshot line 2: expected ladder") from None
    try:
        tag, cursor_text = lines[2].split(" ", 1)
        if tag != "cursor":
            raise ValueError
        cursor = int(cursor_text)
    except (IndexError, ValueError):
        raise SchedulerError("snapshot line 3: expected cursor") from None

    words: list[str] = []
    states: dict[str, WordScheduleState] = {}
    for lineno, line in enumerate(lines[3:], start=4):
        parts = line.split(" ")
        if len(parts) != 8 or parts[0] != "word":
            raise SchedulerError(f"snapshot line {lineno}: malformed word record")
        wid = parts[1]
        fields: dict[str, str] = {}
        for part in parts[2:]:
            key, _, value = part.partition("=")
            fields[key] = value
        try:
            ws = WordScheduleState(
                word_id=wid,
                introduced=bool(int(fields["introduced"])),
                box=int(fields["box"]),
                due_at=float(fields["due_at"]),
                last_feed_at=None if fields["last_feed_at"] == _ABSENT else float(fields["last_feed_at"]),
                answers=int(fields["answers"]),
                correct=int(fields["correct"]),
            )
        except (KeyError, ValueError):
            raise SchedulerError(f"snapshot line {lineno}: malformed word record") from None
        if ws.box >= len(ladder) or ws.correct > ws.answers:
            raise SchedulerError(f"snapshot line {lineno}: invariant violation")
        if wid in states:
            raise SchedulerError(f"snapshot line {lineno}: duplicate word {wid!r}")
        words.append(wid)
        states[wid] = ws
    if not words:
        raise SchedulerError("snapshot holds no words")
    if not 0 <= cursor <= len(words):
        raise SchedulerError("snapshot cursor out of range")
    return SchedulerState(words=tuple(words), ladder=ladder, states=states, new_word_cursor=cursor)
