"""Append-only engagement event log, sessionization, and study metrics.

Events are newline-delimited tab-separated records, one per line, UTF-8,
timestamps in ISO 8601 with a UTC offset (study days are counted in the
event's own local time). Field order per kind:

    ts  user  impression   word_id
    ts  user  engage       quiz_id
    ts  user  answer       quiz_id  word_id  chosen_index  correct(0|1)
    ts  user  link_click
    ts  user  intro_shown  word_id
    ts  user  feed_render  items

Within one user's log timestamps never decrease, and an answer must
reference a quiz_id seen in an earlier engage record for that user.

A study session opens at a qualifying event (link click, engage, or
answer) that is not within the timeout of the previous qualifying event,
and closes when the timeout elapses; impressions and feed renders neither
open nor extend sessions.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path

DEFAULT_SESSION_TIMEOUT = 30 * 60.0  # web-analytics convention
LEARNED_BOX = 3  # three spaced correct recalls


class EventLogError(ValueError):
    """Malformed, out-of-order, or referentially invalid event data."""


class EventKind(Enum):
    IMPRESSION = "impression"
    ENGAGE = "engage"
    ANSWER = "answer"
    LINK_CLICK = "link_click"
    INTRO_SHOWN = "intro_shown"
    FEED_RENDER = "feed_render"


_SESSION_OPENERS = {EventKind.LINK_CLICK, EventKind.ENGAGE, EventKind.ANSWER}


@dataclass(frozen=True)
class Event:
    ts: datetime
    user: str
    kind: EventKind
    word_id: str | None = None
    quiz_id: str | None = None
    chosen_index: int | None = None
    correct: bool | None = None
    items: int | None = None

    def __post_init__(self):
        if self.ts.tzinfo is None:
            raise EventLogError("event timestamp must carry a UTC offset")
        need = {
            EventKind.IMPRESSION: ("word_id",),
            EventKind.ENGAGE: ("quiz_id",),
            EventKind.ANSWER: ("quiz_id", "word_id", "chosen_index", "correct"),
            EventKind.LINK_CLICK: (),
            EventKind.INTRO_SHOWN: ("word_id",),
            EventKind.FEED_RENDER: ("items",),
        }[self.kind]
        for name in need:
            if getattr(self, name) is None:
                raise EventLogError(f"{self.kind.value} event missing {name}")

    def to_line(self) -> str:
        head = [self.ts.isoformat(), self.user, self.kind.value]
        tail = {
            EventKind.IMPRESSION: lambda: [self.word_id],
            EventKind.ENGAGE: lambda: [self.quiz_id],
            EventKind.ANSWER: lambda: [
                self.quiz_id,
                self.word_id,
                str(self.chosen_index),
                "1" if self.correct else "0",
            ],
            EventKind.LINK_CLICK: lambda: [],
            EventKind.INTRO_SHOWN: lambda: [self.word_id],
            EventKind.FEED_RENDER: lambda: [str(self.items)],
        }[self.kind]()
        return "\t".join(head + tail)

    @classmethod
    def from_line(cls, line: str) -> "Event":
        parts = line.rstrip("\n").split("\t")
        if len(parts) < 3:
            raise EventLogError("event record needs at least ts, user, kind")
        ts_text, user, kind_text = parts[0], parts[1], parts[2]
        try:
            ts = datetime.fromisoformat(ts_text)
        except ValueError:
            raise EventLogError(f"bad timestamp {ts_text!r}") from None
        try:
            kind = EventKind(kind_text)
        except ValueError:
            raise EventLogError(f"unknown event kind {kind_text!r}") from None
        rest = parts[3:]
        try:
            if kind is EventKind.IMPRESSION or kind is EventKind.INTRO_SHOWN:
                (word_id,) = rest
                return cls(ts, user, kind, word_id=word_id)
            if kind is EventKind.ENGAGE:
                (quiz_id,) = rest
                return cls(ts, user, kind, quiz_id=quiz_id)
            if kind is EventKind.ANSWER:
                quiz_id, word_id, idx_text, correct_text = rest
                if correct_text not in ("0", "1"):
                    raise ValueError
                return cls(
                    ts, user, kind,
                    quiz_id=quiz_id, word_id=word_id,
                    chosen_index=int(idx_text), correct=correct_text == "1",
                )
            if kind is EventKind.LINK_CLICK:
                if rest:
                    raise ValueError
                return cls(ts, user, kind)
            (items_text,) = rest
            return cls(ts, user, kind, items=int(items_text))
        except ValueError:
            raise EventLogError(f"bad {kind.value} record: {line!r}") from None


class EventLog:
    """Strictly append-only event store, optionally file-backed.

    Validates per-user timestamp monotonicity and quiz referential
    integrity on every append. With a path, each append is flushed and
    fsynced before returning.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.events: list[Event] = []
        self._last_ts: dict[str, datetime] = {}
        self._engaged: dict[str, set[str]] = {}
        self._fh = None
        self._lock = threading.Lock()
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "a", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "EventLog":
        """Read and validate an existing log, then keep appending to it.

        Fails fast on a corrupt or truncated line, naming its line number.
        """
        log = cls.__new__(cls)
        log.path = Path(path)
        log.events = []
        log._last_ts = {}
        log._engaged = {}
        log._fh = None
        log._lock = threading.Lock()
        if log.path.exists():
            with open(log.path, encoding="utf-8", newline="") as fh:
                data = fh.read()
            lines = data.split("\n")
            if data and lines[-1] != "":
                raise EventLogError(
                    f"{path} line {len(lines)}: truncated final line (missing newline)"
                )
            for lineno, line in enumerate(lines[:-1] if data else [], start=1):
                try:
                    event = Event.from_line(line)
                    log._validate(event)
                except EventLogError as exc:
                    raise EventLogError(f"{path} line {lineno}: {exc}") from None
                log._remember(event)
        log.path.parent.mkdir(parents=True, exist_ok=True)
        log._fh = open(log.path, "a", encoding="utf-8")
        return log

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def _validate(self, event: Event) -> None:
        last = self._last_ts.get(event.user)
        if last is not None and event.ts < last:
            raise EventLogError(
                f"timestamp regression for user {event.user!r}: {event.ts.isoformat()} < {last.isoformat()}"
            )
        if event.kind is EventKind.ANSWER:
            if event.quiz_id not in self._engaged.get(event.user, ()):
                raise EventLogError(f"answer references unknown quiz {event.quiz_id!r}")

    def _remember(self, event: Event) -> None:
        self.events.append(event)
        self._last_ts[event.user] = event.ts
        if event.kind is EventKind.ENGAGE:
            self._engaged.setdefault(event.user, set()).add(event.quiz_id)

    def append(self, event: Event) -> None:
        with self._lock:
            self._validate(event)
            if self._fh is not None:
                self._fh.write(event.to_line() + "\n")
                self._fh.flush()
                os.fsync(self._fh.fileno())
            self._remember(event)

    def last_ts(self, user: str) -> datetime | None:
        return self._last_ts.get(user)

    def for_user(self, user: str) -> list[Event]:
        with self._lock:
            return [e for e in self.events if e.user == user]

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


class SessionTrigger(Enum):
    LINK_CLICK = "link_click"
    FIRST_ENGAGEMENT = "first_engagement"


@dataclass(frozen=True)
class Session:
    user: str
    start_ts: datetime
    end_ts: datetime
    events: int
    trigger: SessionTrigger


@dataclass(frozen=True)
class Metrics:
    quizzes_answered: int
    study_sessions: int
    distinct_study_days: int
    days_visited: int
    words_learned: int


def sessionize(events, timeout: float = DEFAULT_SESSION_TIMEOUT) -> list[Session]:
    """Group qualifying events into gap-delimited sessions per user.

    Users are processed in order of first appearance; sessions are
    chronological within a user. Raises on per-user timestamp disorder.
    """
    by_user: dict[str, list[Event]] = {}
    for event in events:
        by_user.setdefault(event.user, []).append(event)

    sessions: list[Session] = []
    for user, stream in by_user.items():
        for prev, cur in zip(stream, stream[1:]):
            if cur.ts < prev.ts:
                raise EventLogError(f"events not time-ordered for user {user!r}")
        current: list[Event] = []
        for event in stream:
            if event.kind not in _SESSION_OPENERS:
                continue
            if current and (event.ts - current[-1].ts).total_seconds() < timeout:
                current.append(event)
                continue
            if current:
                sessions.append(_close_session(user, current))
            current = [event]
        if current:
            sessions.append(_close_session(user, current))
    return sessions


def _close_session(user: str, batch: list[Event]) -> Session:
    trigger = (
        SessionTrigger.LINK_CLICK
        if batch[0].kind is EventKind.LINK_CLICK
        else SessionTrigger.FIRST_ENGAGEMENT
    )
    return Session(
        user=user,
        start_ts=batch[0].ts,
        end_ts=batch[-1].ts,
        events=len(batch),
        trigger=trigger,
    )


def compute_metrics(
    events,
    scheduler_final=None,
    timeout: float = DEFAULT_SESSION_TIMEOUT,
    learned_box: int = LEARNED_BOX,
) -> Metrics:
    """Derive study metrics from an event stream.

    A quiz counts as answered when solved (correct terminal answer);
    incorrect attempts stay in the log but are not counted here. Learned
    means the word's spacing box reached `learned_box` — an estimate of
    retention, not a post-test.
    """
    events = list(events)
    solved = sum(1 for e in events if e.kind is EventKind.ANSWER and e.correct)
    study_days = {e.ts.date() for e in events if e.kind is EventKind.ANSWER}
    visit_days = {e.ts.date() for e in events if e.kind is EventKind.FEED_RENDER}
    learned = 0
    if scheduler_final is not None:
        learned = sum(1 for ws in scheduler_final.states.values() if ws.box >= learned_box)
    return Metrics(
        quizzes_answered=solved,
        study_sessions=len(sessionize(events, timeout)),
        distinct_study_days=len(study_days),
        days_visited=len(visit_days),
        words_learned=learned,
    )
