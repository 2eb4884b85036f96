"""Desk-scale replay of the week-long study: synthetic feed exposure under
the in-feed-quiz and link conditions, a simple engagement model, and an
exponential-forgetting learner producing post-test-style expected scores.

The simulated learner browses on random days (defaulting to the observed
5.7 visit-days per week), in several browsing episodes per day. Every
`rate`-th feed slot carries a study item. In the in-feed condition each
inserted item is engaged with probability p_engage, and an engagement is
a burst of quizzes: the learner keeps answering (retrying after wrong
choices until solved) while a per-quiz continuation draw passes. In the
link condition each inserted link is clicked with probability p_link_click
and a click opens a study session on the quiz site with a sampled number
of quizzes.

Memory model: recall(dt, S) = exp(-dt / S). First exposure (introduction
card) sets strength S to initial_strength; every solved review multiplies
S by strength_multiplier and re-anchors the clock. Answer correctness on
each attempt is recall-or-guess over the remaining options. Defaults are
calibrated so the in-feed condition lands near the magnitudes observed in
deployment (tens of sessions, low hundreds of answers per week); they are
calibrated values, not measurements.

All activity drives the real scheduler and emits real analytics events
with exactly the service's semantics (introduction/impression records,
engage-before-answer, scheduler advanced once per solved quiz), so
compute_metrics over the emitted log reproduces the report's counts.
Every random draw comes from a stream keyed by (seed, site), which makes
runs reproducible and engagement counts monotone in the engagement
probabilities for a fixed seed.
"""

from __future__ import annotations

import dataclasses
import math
import random
import zlib
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from importlib import resources

from . import quizgen, scheduler as sched
from .analytics import Event, EventKind, EventLog, Metrics, compute_metrics
from .placement import Condition, plan_feed
from .vocab import Deck, apply_exclusions, load_deck, select_study_set


class SimulationError(ValueError):
    """Invalid simulation parameters."""


@dataclass(frozen=True)
class LearnerModel:
    initial_strength: float = 3600.0  # seconds of memory after introduction
    strength_multiplier: float = 4.0  # growth per solved review

    def recall(self, elapsed: float, strength: float) -> float:
        if elapsed <= 0:
            return 1.0
        return math.exp(-elapsed / strength)


@dataclass(frozen=True)
class SimConfig:
    condition: Condition = Condition.IN_FEED_QUIZ
    days: int = 7
    feed_items_per_day: int = 250
    visits_per_day: int = 5          # browsing episodes on a day the feed is read
    p_visit: float = 5.7 / 7.0       # chance a given day is a visit day
    p_engage: float = 0.2            # per inserted in-feed item
    p_continue: float = 0.75         # keep answering after a solved quiz
    max_chain: int = 20              # quizzes per engagement burst, at most
    p_link_click: float = 0.02       # per inserted link
    link_quizzes_mean: float = 8.0   # quizzes per link-site session (approx mean)
    learner: LearnerModel = field(default_factory=LearnerModel)
    rate: int = 10
    option_count: int = 4
    ladder: tuple[float, ...] = sched.DEFAULT_LADDER
    study_words: int | None = 50
    seed: int = 0
    tz_offset_minutes: int = -420    # UTC-7; study days count in local time

    def validate(self) -> None:
        for name in ("p_visit", "p_engage", "p_continue", "p_link_click"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise SimulationError(f"{name} must be within [0, 1], got {p}")
        if self.days < 1:
            raise SimulationError("days must be at least 1")
        if self.visits_per_day < 1 or self.feed_items_per_day < 0:
            raise SimulationError("bad feed volume parameters")
        if self.learner.initial_strength <= 0 or self.learner.strength_multiplier < 1:
            raise SimulationError("bad learner parameters")


@dataclass(frozen=True)
class SimReport:
    condition: Condition
    seed: int
    metrics: Metrics
    posttest_expected_words: float
    attempts: int                 # all answer events, wrong tries included
    words_introduced: int
    events: tuple[Event, ...]
    final_scheduler: sched.SchedulerState

    @property
    def quizzes_answered(self) -> int:
        return self.metrics.quizzes_answered

    @property
    def study_sessions(self) -> int:
        return self.metrics.study_sessions


def bundled_deck() -> Deck:
    text = resources.files("wordfeed.data").joinpath("deck_ja.txt").read_text("utf-8")
    return load_deck(text, name="deck_ja")


_DAY = 86400.0
_FIRST_EPISODE_HOUR = 8.0
_EPISODE_SPAN_HOURS = 14.0
_SCROLL_SECONDS = 1.5   # per organic feed item
_ANSWER_SECONDS = 8.0   # reading + clicking a quiz
_RETRY_SECONDS = 4.0
_INTRO_SECONDS = 3.0


class _SimRun:
    def __init__(self, config: SimConfig, deck: Deck):
        config.validate()
        self.config = config
        study = apply_exclusions(deck)
        if config.study_words is not None:
            study = select_study_set(study, config.study_words, seed=config.seed)
        self.study_set = study
        self.tz = timezone(timedelta(minutes=config.tz_offset_minutes))
        # Fixed anchor date; only day arithmetic matters.
        self.start = datetime(2026, 3, 2, 0, 0, tzinfo=self.tz).timestamp()
        self.user = "sim"
        self.log = EventLog(None)
        self.state = sched.init_state(study, config.ladder, now=self.start)
        self.display_counter = 0
        self.exclude_word: str | None = None
        self.clock = self.start
        self.attempts = 0
        self.strength: dict[str, float] = {}
        self.anchor: dict[str, float] = {}
        self.reviewed: set[str] = set()

    # -- seeded substreams ---------------------------------------------

    def _rng(self, *key) -> random.Random:
        material = "|".join(str(k) for k in (self.config.seed, *key))
        return random.Random(zlib.crc32(material.encode("utf-8")))

    # -- event plumbing (mirrors the service's semantics) ----------------

    def _log(self, kind: EventKind, t: float, **fields) -> None:
        self.clock = max(self.clock, t)
        self.log.append(Event(datetime.fromtimestamp(self.clock, self.tz), self.user, kind, **fields))

    def _next_item(self, t: float):
        sel = sched.next_word(self.state, max(self.clock, t), exclude=self.exclude_word)
        if sel.is_new:
            card = quizgen.make_intro_card(sel.word_id, self.study_set)
            self._log(EventKind.INTRO_SHOWN, t, word_id=sel.word_id)
            sched.record_impression(self.state, sel.word_id, self.clock, introducing=True)
            self.display_counter += 1
            self.exclude_word = None
            self._expose(sel.word_id, self.clock)
            return card
        seed = zlib.crc32(f"quiz|{self.display_counter}".encode()) ^ (self.config.seed & 0xFFFFFFFF)
        quiz = quizgen.make_quiz(
            sel.word_id,
            self.study_set,
            quizgen.alternate_direction(self.display_counter),
            k=self.config.option_count,
            seed=seed,
        )
        self._log(EventKind.IMPRESSION, t, word_id=sel.word_id)
        sched.record_impression(self.state, sel.word_id, self.clock)
        self.display_counter += 1
        self.exclude_word = None
        return quiz

    def _expose(self, word_id: str, t: float) -> None:
        if word_id not in self.strength:
            self.strength[word_id] = self.config.learner.initial_strength
            self.anchor[word_id] = t

    def _solve(self, quiz: quizgen.Quiz, t: float, rng: random.Random) -> float:
        """Answer a quiz, retrying after feedback until solved. Logs one
        engage record plus one answer record per attempt; the scheduler
        advances once, when the quiz resolves."""
        word = quiz.prompt_word
        self._log(EventKind.ENGAGE, t, quiz_id=quiz.quiz_id)
        remaining = list(range(len(quiz.options)))
        while True:
            p_know = self.config.learner.recall(
                t - self.anchor.get(word, t), self.strength.get(word, 1e-9)
            ) if word in self.strength else 0.0
            p_hit = p_know + (1.0 - p_know) / len(remaining)
            if len(remaining) == 1 or rng.random() < p_hit:
                t += _ANSWER_SECONDS
                self._log(
                    EventKind.ANSWER, t,
                    quiz_id=quiz.quiz_id, word_id=word,
                    chosen_index=quiz.correct_index, correct=True,
                )
                self.attempts += 1
                sched.record_answer(self.state, word, True, self.clock)
                self.exclude_word = word
                self._expose(word, self.clock)
                self.strength[word] *= self.config.learner.strength_multiplier
                self.anchor[word] = self.clock
                self.reviewed.add(word)
                return self.clock
            wrong = [i for i in remaining if i != quiz.correct_index]
            chosen = wrong[rng.randrange(len(wrong))]
            t += _RETRY_SECONDS
            self._log(
                EventKind.ANSWER, t,
                quiz_id=quiz.quiz_id, word_id=word,
                chosen_index=chosen, correct=False,
            )
            self.attempts += 1
            remaining.remove(chosen)

    def _burst(self, first_item, t: float, day: int, episode: int, slot: int) -> float:
        """An engagement: solve quizzes while the continuation draw passes.
        Introduction cards read along the way do not consume the budget."""
        item = first_item
        solved = 0
        while True:
            if isinstance(item, quizgen.IntroCard):
                t += _INTRO_SECONDS
                self.clock = max(self.clock, t)
            else:
                t = self._solve(item, t, self._rng("attempt", day, episode, slot, solved))
                solved += 1
                if solved >= self.config.max_chain:
                    return t
                if self._rng("chain", day, episode, slot, solved).random() >= self.config.p_continue:
                    return t
            item = self._next_item(t)

    # -- top-level day loop ----------------------------------------------

    def run(self) -> SimReport:
        cfg = self.config
        items_per_episode = cfg.feed_items_per_day // cfg.visits_per_day
        for day in range(cfg.days):
            if self._rng("visit", day).random() >= cfg.p_visit:
                continue
            day_base = self.start + day * _DAY
            for episode in range(cfg.visits_per_day):
                hour = _FIRST_EPISODE_HOUR + episode * (_EPISODE_SPAN_HOURS / cfg.visits_per_day)
                t = max(self.clock, day_base + hour * 3600.0)
                self._log(EventKind.FEED_RENDER, t, items=items_per_episode)
                plan = plan_feed(items_per_episode, cfg.rate, cfg.condition)
                for slot, position in enumerate(plan.positions):
                    t_item = max(self.clock, t + position * _SCROLL_SECONDS)
                    if cfg.condition is Condition.IN_FEED_QUIZ:
                        self._feed_slot(t_item, day, episode, slot)
                    else:
                        self._link_slot(t_item, day, episode, slot)
        return self._report()

    def _feed_slot(self, t: float, day: int, episode: int, slot: int) -> None:
        item = self._next_item(t)
        engaged = self._rng("engage", day, episode, slot).random() < self.config.p_engage
        if engaged:
            self._burst(item, t, day, episode, slot)

    def _link_slot(self, t: float, day: int, episode: int, slot: int) -> None:
        if self._rng("click", day, episode, slot).random() >= self.config.p_link_click:
            return
        self._log(EventKind.LINK_CLICK, t)
        mean = self.config.link_quizzes_mean
        if mean > 1.0:
            volume = 1 + int(self._rng("volume", day, episode, slot).expovariate(1.0 / (mean - 1.0)))
        else:
            volume = 1
        volume = min(volume, 60)
        t += 5.0
        solved = 0
        while solved < volume:
            item = self._next_item(t)
            if isinstance(item, quizgen.IntroCard):
                t = self.clock + _INTRO_SECONDS
                continue
            t = self._solve(item, t, self._rng("attempt", day, episode, slot, solved))
            solved += 1

    def _report(self) -> SimReport:
        cfg = self.config
        test_time = self.start + cfg.days * _DAY
        posttest = sum(
            cfg.learner.recall(test_time - self.anchor[w], self.strength[w])
            for w in self.reviewed
        )
        metrics = compute_metrics(self.log.events, self.state)
        return SimReport(
            condition=cfg.condition,
            seed=cfg.seed,
            metrics=metrics,
            posttest_expected_words=posttest,
            attempts=self.attempts,
            words_introduced=self.state.new_word_cursor,
            events=tuple(self.log.events),
            final_scheduler=self.state,
        )


def run_sim(config: SimConfig, deck: Deck | None = None) -> SimReport:
    """One user's study period under `config`. Identical configs produce
    identical reports."""
    if deck is None:
        deck = bundled_deck()
    return _SimRun(config, deck).run()


def _set_param(config: SimConfig, param: str, value) -> SimConfig:
    if param.startswith("learner."):
        leaf = param.split(".", 1)[1]
        if leaf not in {f.name for f in dataclasses.fields(LearnerModel)}:
            raise SimulationError(f"unknown parameter {param!r}")
        return dataclasses.replace(config, learner=dataclasses.replace(config.learner, **{leaf: value}))
    if param not in {f.name for f in dataclasses.fields(SimConfig)}:
        raise SimulationError(f"unknown parameter {param!r}")
    return dataclasses.replace(config, **{param: value})


def sweep(param: str, values, config: SimConfig, deck: Deck | None = None) -> list[tuple[object, SimReport]]:
    """One seeded run per value of `param` (SimConfig field, or a
    learner.* field), all other parameters fixed. Deterministic."""
    if deck is None:
        deck = bundled_deck()
    results = []
    for value in values:
        results.append((value, run_sim(_set_param(config, param, value), deck)))
    return results
