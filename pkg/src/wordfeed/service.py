"""Event-sourced study service binding the engine modules together.

Per-user state (scheduler, display counter, open quizzes) is derived
entirely from an append-only event log plus a small append-only user
registry, so killing the process and replaying the log reconstructs the
exact pre-shutdown state. Periodic snapshots short-circuit replay; a
snapshot at event N plus the remaining events equals a straight run.

Data directory layout:

    users.tsv                 enrollment registry (user, condition, created)
    events.log                analytics event log (see analytics module)
    snapshots/snapshot-<N>.txt  state after the first N events

Concurrency: mutations for one user are serialized by a per-user lock;
operations for distinct users proceed independently. The log writer has
its own lock. All scheduler arithmetic uses the timestamp recorded in the
event, never the wall clock, so live execution and replay see identical
numbers.
"""

from __future__ import annotations

import re
import threading
import time
import zlib
from contextlib import ExitStack
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

from . import quizgen, scheduler as sched
from .analytics import Event, EventKind, EventLog, EventLogError, Metrics, compute_metrics
from .config import ConfigError, ServiceConfig
from .filters import (
    FilterSet,
    MatchDecision,
    load_filter_file,
    matches,
    registrable_domain,
    split_url,
)
from .placement import Condition, FeedPlan, SlotFill, fit_slot, plan_feed
from .quizgen import AnswerResult, IntroCard, Quiz
from .vocab import Deck, apply_exclusions, load_deck_file, select_study_set

_USER_ID_RE = re.compile(r"^[A-Za-z0-9_.-]{1,64}$")

USERS_FILE = "users.tsv"
EVENTS_FILE = "events.log"
SNAPSHOT_DIR = "snapshots"
_SNAPSHOT_RE = re.compile(r"^snapshot-(\d{8})\.txt$")


class ServiceError(ValueError):
    """Base class for request-level service failures."""


class UnknownUserError(ServiceError):
    pass


class ConditionError(ServiceError):
    """Operation not available under the user's study condition."""


class QuizStateError(ServiceError):
    """Quiz id unknown, already resolved, or otherwise unanswerable."""


class RecoveryError(RuntimeError):
    """Persisted state cannot be rebuilt; names the offending file/line."""


@dataclass
class OpenQuiz:
    quiz: Quiz
    seed: int
    engaged: bool = False


@dataclass
class UserRecord:
    user_id: str
    condition: Condition
    created: datetime
    scheduler: sched.SchedulerState
    display_counter: int = 0  # quizzes displayed; drives direction alternation
    open_quizzes: dict[str, OpenQuiz] = field(default_factory=dict)
    exclude_word: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)


class StudyService:
    """All engine modules behind one object; see module docstring."""

    def __init__(
        self,
        config: ServiceConfig,
        deck: Deck | None = None,
        filter_set: FilterSet | None = None,
    ):
        self.config = config
        self._tz = timezone(timedelta(minutes=config.tz_offset_minutes))
        self._users_lock = threading.Lock()
        self.users: dict[str, UserRecord] = {}

        if deck is None:
            if config.deck_path is None:
                raise ConfigError("no deck configured")
            if not Path(config.deck_path).exists():
                raise ConfigError(f"deck file not found: {config.deck_path}")
            deck = load_deck_file(config.deck_path)
        study = apply_exclusions(deck)
        if config.study_words is not None:
            study = select_study_set(study, config.study_words, seed=config.seed)
        self.study_set = study

        if filter_set is None:
            if config.filter_path is not None:
                if not Path(config.filter_path).exists():
                    raise ConfigError(f"filter list not found: {config.filter_path}")
                filter_set = load_filter_file(config.filter_path)
            else:
                filter_set = FilterSet((), (), 0)
        self.filter_set = filter_set

        if not 1 <= config.option_count <= len(self.study_set):
            raise ConfigError(
                f"option count {config.option_count} exceeds study set size {len(self.study_set)}"
            )

        self.data_dir = Path(config.data_dir) if config.data_dir is not None else None
        self._users_fh = None
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            (self.data_dir / SNAPSHOT_DIR).mkdir(exist_ok=True)
            self._recover()
            self._users_fh = open(self.data_dir / USERS_FILE, "a", encoding="utf-8")
        else:
            self.log = EventLog(None)

    # ------------------------------------------------------------------
    # enrollment

    def enroll(self, user_id: str, condition: Condition, now: float | None = None) -> UserRecord:
        if not _USER_ID_RE.match(user_id):
            raise ServiceError(f"invalid user id {user_id!r}")
        with self._users_lock:
            if user_id in self.users:
                raise ServiceError(f"user {user_id!r} already enrolled")
            created = self._stamp(user_id, now)
            user = self._make_user(user_id, condition, created)
            if self._users_fh is not None:
                self._users_fh.write(f"{user_id}\t{condition.value}\t{created.isoformat()}\n")
                self._users_fh.flush()
            self.users[user_id] = user
            return user

    def get_or_enroll(self, user_id: str, condition: Condition | None = None, now: float | None = None) -> UserRecord:
        """Fetch a user, enrolling on first contact. The condition is fixed
        at creation; a conflicting later value is an error."""
        user = self.users.get(user_id)
        if user is None:
            return self.enroll(user_id, condition or Condition.IN_FEED_QUIZ, now)
        if condition is not None and condition is not user.condition:
            raise ConditionError(
                f"user {user_id!r} is in the {user.condition.value} condition"
            )
        return user

    def _make_user(self, user_id: str, condition: Condition, created: datetime) -> UserRecord:
        state = sched.init_state(self.study_set, self.config.ladder, now=created.timestamp())
        return UserRecord(user_id=user_id, condition=condition, created=created, scheduler=state)

    def _user(self, user_id: str) -> UserRecord:
        user = self.users.get(user_id)
        if user is None:
            raise UnknownUserError(f"unknown user {user_id!r}")
        return user

    def _stamp(self, user_id: str, now: float | None) -> datetime:
        """Event timestamp: wall clock (or injected now), clamped so one
        user's log never goes backwards."""
        ts = datetime.fromtimestamp(time.time() if now is None else now, tz=self._tz)
        last = self.log.last_ts(user_id) if hasattr(self, "log") else None
        if last is not None and ts < last:
            ts = last
        return ts

    # ------------------------------------------------------------------
    # study flow

    def get_next_item(self, user_id: str, now: float | None = None) -> Quiz | IntroCard:
        """Next feed item for an in-feed-quiz user: an introduction card when
        the scheduler wants a new word, else a quiz on the due word."""
        user = self._user(user_id)
        if user.condition is not Condition.IN_FEED_QUIZ:
            raise ConditionError(f"user {user_id!r} receives links, not in-feed items")
        with user.lock:
            ts = self._stamp(user_id, now)
            sel = sched.next_word(user.scheduler, ts.timestamp(), exclude=user.exclude_word)
            if sel.is_new:
                event = Event(ts, user_id, EventKind.INTRO_SHOWN, word_id=sel.word_id)
            else:
                event = Event(ts, user_id, EventKind.IMPRESSION, word_id=sel.word_id)
            item = self._commit(user, event)
        self._maybe_snapshot()
        return item

    def post_answer(self, user_id: str, quiz_id: str, chosen_index: int, now: float | None = None) -> AnswerResult:
        """Check an answer. Wrong answers leave the quiz open for retry;
        the correct answer resolves it and advances the word's spacing."""
        user = self._user(user_id)
        with user.lock:
            open_quiz = user.open_quizzes.get(quiz_id)
            if open_quiz is None:
                raise QuizStateError(f"quiz {quiz_id!r} is unknown or already resolved")
            result = quizgen.check_answer(open_quiz.quiz, chosen_index)
            ts = self._stamp(user_id, now)
            if not open_quiz.engaged:
                self._commit(user, Event(ts, user_id, EventKind.ENGAGE, quiz_id=quiz_id))
            self._commit(
                user,
                Event(
                    ts,
                    user_id,
                    EventKind.ANSWER,
                    quiz_id=quiz_id,
                    word_id=open_quiz.quiz.prompt_word,
                    chosen_index=chosen_index,
                    correct=result.correct,
                ),
            )
        self._maybe_snapshot()
        return result

    def get_link_item(self, user_id: str) -> str:
        user = self._user(user_id)
        if user.condition is not Condition.LINK:
            raise ConditionError(f"user {user_id!r} receives in-feed items, not links")
        return self.config.link_url

    def post_link_click(self, user_id: str, now: float | None = None) -> None:
        user = self._user(user_id)
        if user.condition is not Condition.LINK:
            raise ConditionError(f"user {user_id!r} receives in-feed items, not links")
        with user.lock:
            ts = self._stamp(user_id, now)
            self._commit(user, Event(ts, user_id, EventKind.LINK_CLICK))
        self._maybe_snapshot()

    # ------------------------------------------------------------------
    # read-mostly wrappers

    def get_match(self, url: str, page: str | None = None, third_party: bool | None = None) -> MatchDecision:
        page_host = split_url(page).hostname if page and "://" in page else page
        if not page_host:
            page_host = split_url(url).hostname
        if third_party is None:
            src_host = split_url(url).hostname
            third_party = registrable_domain(src_host) != registrable_domain(page_host)
        return matches(self.filter_set, url, page_host, third_party)

    def get_layout(self, width: float, height: float) -> SlotFill | None:
        return fit_slot(width, height, self.config.ad_units)

    def get_plan(self, user_id: str, feed_length: int, now: float | None = None) -> FeedPlan:
        """Insertion plan for a feed render. Rendering a feed is the
        visit signal, so this logs a feed_render event."""
        user = self._user(user_id)
        with user.lock:
            ts = self._stamp(user_id, now)
            self._commit(user, Event(ts, user_id, EventKind.FEED_RENDER, items=feed_length))
            plan = plan_feed(feed_length, self.config.rate, user.condition)
        self._maybe_snapshot()
        return plan

    def get_metrics(self, user_id: str) -> Metrics:
        user = self._user(user_id)
        return compute_metrics(
            self.log.for_user(user_id), user.scheduler, timeout=self.config.session_timeout
        )

    # ------------------------------------------------------------------
    # event application (shared by live path and replay)

    def _commit(self, user: UserRecord, event: Event):
        self.log.append(event)
        return self._apply(user, event)

    def _apply(self, user: UserRecord, event: Event):
        """Apply one event's state transition. This is the single source of
        truth for how events change state; recovery replays through it."""
        epoch = event.ts.timestamp()
        kind = event.kind
        if kind is EventKind.INTRO_SHOWN:
            card = quizgen.make_intro_card(event.word_id, self.study_set)
            sched.record_impression(user.scheduler, event.word_id, epoch, introducing=True)
            user.exclude_word = None
            return card
        if kind is EventKind.IMPRESSION:
            seed = self._quiz_seed(user.user_id, user.display_counter)
            quiz = quizgen.make_quiz(
                event.word_id,
                self.study_set,
                quizgen.alternate_direction(user.display_counter),
                k=self.config.option_count,
                seed=seed,
            )
            user.open_quizzes[quiz.quiz_id] = OpenQuiz(quiz=quiz, seed=seed)
            sched.record_impression(user.scheduler, event.word_id, epoch)
            user.display_counter += 1
            user.exclude_word = None
            return quiz
        if kind is EventKind.ENGAGE:
            open_quiz = user.open_quizzes.get(event.quiz_id)
            if open_quiz is None:
                raise QuizStateError(f"quiz {event.quiz_id!r} is unknown or already resolved")
            open_quiz.engaged = True
            return None
        if kind is EventKind.ANSWER:
            open_quiz = user.open_quizzes.get(event.quiz_id)
            if open_quiz is None:
                raise QuizStateError(f"quiz {event.quiz_id!r} is unknown or already resolved")
            if event.correct:
                sched.record_answer(user.scheduler, event.word_id, True, epoch)
                del user.open_quizzes[event.quiz_id]
                user.exclude_word = event.word_id
            return None
        # LINK_CLICK and FEED_RENDER carry no per-user state beyond the log.
        return None

    def _quiz_seed(self, user_id: str, counter: int) -> int:
        return zlib.crc32(f"{user_id}|{counter}".encode()) ^ (self.config.seed & 0xFFFFFFFF)

    # ------------------------------------------------------------------
    # persistence

    def state_snapshot_text(self) -> str:
        """Canonical serialized service state. Users appear in enrollment
        order; equal states serialize to identical bytes."""
        lines = ["wordfeed-service v1", f"events_applied {len(self.log)}"]
        for user_id, user in self.users.items():
            lines.append(
                f"user {user_id} condition={user.condition.value}"
                f" display_counter={user.display_counter}"
                f" exclude_word={user.exclude_word if user.exclude_word is not None else '-'}"
            )
            for quiz_id, oq in user.open_quizzes.items():
                lines.append(
                    f"open {user_id} {quiz_id} word={oq.quiz.prompt_word}"
                    f" direction={oq.quiz.direction.value} k={len(oq.quiz.options)}"
                    f" seed={oq.seed} engaged={int(oq.engaged)}"
                )
            for line in sched.snapshot(user.scheduler).splitlines():
                lines.append(f"sched {user_id} {line}")
        return "\n".join(lines) + "\n"

    def write_snapshot(self) -> Path | None:
        if self.data_dir is None:
            return None
        with ExitStack() as stack:
            for user in list(self.users.values()):
                stack.enter_context(user.lock)
            text = self.state_snapshot_text()
            n = len(self.log)
        path = self.data_dir / SNAPSHOT_DIR / f"snapshot-{n:08d}.txt"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(path)
        return path

    def _maybe_snapshot(self) -> None:
        if self.data_dir is None or self.config.snapshot_every <= 0:
            return
        if len(self.log) and len(self.log) % self.config.snapshot_every == 0:
            self.write_snapshot()

    def close(self) -> None:
        if self.data_dir is not None:
            self.write_snapshot()
        if self._users_fh is not None:
            self._users_fh.close()
            self._users_fh = None
        self.log.close()

    # ------------------------------------------------------------------
    # recovery

    def _recover(self) -> None:
        users_path = self.data_dir / USERS_FILE
        if users_path.exists():
            self._load_registry(users_path)
        try:
            self.log = EventLog.load(self.data_dir / EVENTS_FILE)
        except EventLogError as exc:
            raise RecoveryError(str(exc)) from None

        applied = self._load_latest_snapshot()
        for n, event in enumerate(self.log.events[applied:], start=applied + 1):
            user = self.users.get(event.user)
            if user is None:
                raise RecoveryError(f"{EVENTS_FILE} event {n}: unregistered user {event.user!r}")
            try:
                self._apply(user, event)
            except (ServiceError, sched.SchedulerError, quizgen.QuizError) as exc:
                raise RecoveryError(f"{EVENTS_FILE} event {n}: {exc}") from None

    def _load_registry(self, path: Path) -> None:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise RecoveryError(f"{USERS_FILE} line {lineno}: expected 3 fields")
                user_id, condition_text, created_text = parts
                try:
                    condition = Condition(condition_text)
                    created = datetime.fromisoformat(created_text)
                except ValueError as exc:
                    raise RecoveryError(f"{USERS_FILE} line {lineno}: {exc}") from None
                if user_id in self.users:
                    raise RecoveryError(f"{USERS_FILE} line {lineno}: duplicate user {user_id!r}")
                self.users[user_id] = self._make_user(user_id, condition, created)

    def _load_latest_snapshot(self) -> int:
        snap_dir = self.data_dir / SNAPSHOT_DIR
        best: tuple[int, Path] | None = None
        for entry in snap_dir.iterdir() if snap_dir.exists() else ():
            m = _SNAPSHOT_RE.match(entry.name)
            if m:
                n = int(m.group(1))
                if best is None or n > best[0]:
                    best = (n, entry)
        if best is None:
            return 0
        n, path = best
        if n > len(self.log):
            raise RecoveryError(f"{path.name}: snapshot ahead of event log ({n} > {len(self.log)})")
        self._restore_snapshot(path)
        return n

    def _restore_snapshot(self, path: Path) -> None:
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines or lines[0] != "wordfeed-service v1":
            raise RecoveryError(f"{path.name} line 1: bad or missing header")
        sched_lines: dict[str, list[str]] = {}
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split(" ")
            tag = parts[0]
            try:
                if tag == "events_applied":
                    continue
                if tag == "user":
                    user = self._registered(parts[1], path, lineno)
                    fields = dict(p.split("=", 1) for p in parts[2:])
                    if Condition(fields["condition"]) is not user.condition:
                        raise RecoveryError(
                            f"{path.name} line {lineno}: condition mismatch for {parts[1]!r}"
                        )
                    user.display_counter = int(fields["display_counter"])
                    user.exclude_word = None if fields["exclude_word"] == "-" else fields["exclude_word"]
                    user.open_quizzes = {}
                elif tag == "open":
                    user = self._registered(parts[1], path, lineno)
                    quiz_id = parts[2]
                    fields = dict(p.split("=", 1) for p in parts[3:])
                    quiz = quizgen.make_quiz(
                        fields["word"],
                        self.study_set,
                        quizgen.Direction(fields["direction"]),
                        k=int(fields["k"]),
                        seed=int(fields["seed"]),
                    )
                    if quiz.quiz_id != quiz_id:
                        raise RecoveryError(
                            f"{path.name} line {lineno}: open quiz {quiz_id!r} does not regenerate"
                        )
                    user.open_quizzes[quiz_id] = OpenQuiz(
                        quiz=quiz, seed=int(fields["seed"]), engaged=fields["engaged"] == "1"
                    )
                elif tag == "sched":
                    self._registered(parts[1], path, lineno)
                    sched_lines.setdefault(parts[1], []).append(line.split(" ", 2)[2])
                else:
                    raise RecoveryError(f"{path.name} line {lineno}: unknown record {tag!r}")
            except RecoveryError:
                raise
            except (KeyError, ValueError, IndexError, quizgen.QuizError) as exc:
                raise RecoveryError(f"{path.name} line {lineno}: {exc}") from None
        for user_id, block in sched_lines.items():
            try:
                self.users[user_id].scheduler = sched.restore("\n".join(block) + "\n")
            except sched.SchedulerError as exc:
                raise RecoveryError(f"{path.name}: scheduler for {user_id!r}: {exc}") from None

    def _registered(self, user_id: str, path: Path, lineno: int) -> UserRecord:
        user = self.users.get(user_id)
        if user is None:
            raise RecoveryError(f"{path.name} line {lineno}: unregistered user {user_id!r}")
        return user
