"""Multiple-choice quiz construction, answer checking, and intro cards.

Quizzes run in both directions: an English gloss prompting for the
romanized word, or the reverse. A wrong choice reveals the meaning of the
word the learner actually picked and leaves the same quiz open for
another try; a correct choice advances to a quiz on a different word.

All functions are pure over immutable inputs; the only state handoff is
the scheduler consulted by next_after_correct.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from enum import Enum

from . import scheduler as sched
from .vocab import Deck, WordEntry


class QuizError(ValueError):
    """Invalid quiz construction or answer submission."""


class Direction(Enum):
    EN_TO_TARGET = "en_to_target"  # prompt: gloss, options: romanized forms
    TARGET_TO_EN = "target_to_en"  # prompt: romanized, options: glosses


class NextAction(Enum):
    RETRY = "retry"
    ADVANCE = "advance"


@dataclass(frozen=True)
class QuizOption:
    word_id: str
    text: str
    gloss: str  # meaning revealed as feedback when this option is chosen wrongly


@dataclass(frozen=True)
class Quiz:
    quiz_id: str
    direction: Direction
    prompt_word: str
    prompt_text: str
    options: tuple[QuizOption, ...]
    correct_index: int

    @property
    def k(self) -> int:
        return len(self.options)


@dataclass(frozen=True)
class AnswerFeedback:
    chosen_word_id: str
    chosen_meaning: str


@dataclass(frozen=True)
class AnswerResult:
    correct: bool
    feedback: AnswerFeedback | None
    next_action: NextAction


@dataclass(frozen=True)
class IntroCard:
    word_id: str
    romanized: str
    gloss: str


def alternate_direction(display_counter: int) -> Direction:
    """Even displays quiz gloss→word, odd displays word→gloss."""
    return Direction.EN_TO_TARGET if display_counter % 2 == 0 else Direction.TARGET_TO_EN


def _display_text(entry: WordEntry, direction: Direction) -> str:
    return entry.romanized if direction is Direction.EN_TO_TARGET else entry.gloss


def _quiz_id(word_id: str, direction: Direction, k: int, seed: int, study_set: Deck) -> str:
    material = "|".join([direction.value, word_id, str(k), str(seed), *study_set.ids()])
    return "q" + hashlib.sha1(material.encode("utf-8")).hexdigest()[:12]


def make_quiz(word_id: str, study_set: Deck, direction: Direction, k: int = 4, seed: int = 0) -> Quiz:
    """Build a quiz for `word_id` with k-1 seeded distractors.

    Distractor candidates are deduplicated by display text (glosses may
    repeat across a deck even after exclusions), so option texts are
    always pairwise distinct.
    """
    try:
        entry = study_set.by_id(word_id)
    except Exception:
        raise QuizError(f"word {word_id!r} not in study set") from None
    if k < 1:
        raise QuizError("option count must be at least 1")

    prompt_display = _display_text(entry, direction)
    pool: list[WordEntry] = []
    seen_texts = {prompt_display}
    for other in study_set:
        if other.id == word_id:
            continue
        text = _display_text(other, direction)
        if text in seen_texts:
            continue
        seen_texts.add(text)
        pool.append(other)
    if len(pool) < k - 1:
        raise QuizError(f"study set too small for {k} distinct options")

    rng = random.Random(seed)
    distractors = rng.sample(pool, k - 1)
    correct_index = rng.randrange(k)
    chosen = distractors[:correct_index] + [entry] + distractors[correct_index:]

    if direction is Direction.EN_TO_TARGET:
        prompt_text = entry.gloss
    else:
        prompt_text = entry.romanized
    options = tuple(
        QuizOption(word_id=e.id, text=_display_text(e, direction), gloss=e.gloss) for e in chosen
    )
    return Quiz(
        quiz_id=_quiz_id(word_id, direction, k, seed, study_set),
        direction=direction,
        prompt_word=word_id,
        prompt_text=prompt_text,
        options=options,
        correct_index=correct_index,
    )


def check_answer(quiz: Quiz, chosen_index: int) -> AnswerResult:
    """Correct choices advance; wrong ones reveal the chosen word's meaning
    and keep the same quiz open for retry."""
    if not 0 <= chosen_index < len(quiz.options):
        raise QuizError(f"chosen index {chosen_index} out of range 0..{len(quiz.options) - 1}")
    if chosen_index == quiz.correct_index:
        return AnswerResult(correct=True, feedback=None, next_action=NextAction.ADVANCE)
    opt = quiz.options[chosen_index]
    return AnswerResult(
        correct=False,
        feedback=AnswerFeedback(chosen_word_id=opt.word_id, chosen_meaning=opt.gloss),
        next_action=NextAction.RETRY,
    )


def next_after_correct(
    current: Quiz,
    state: sched.SchedulerState,
    now: float,
    study_set: Deck,
    seed: int = 0,
    k: int | None = None,
    direction: Direction | None = None,
) -> Quiz:
    """Quiz on the scheduler's next pick, guaranteed to differ from the word
    just answered unless the deck holds a single word. Direction flips from
    the current quiz unless given explicitly."""
    if direction is None:
        direction = (
            Direction.TARGET_TO_EN
            if current.direction is Direction.EN_TO_TARGET
            else Direction.EN_TO_TARGET
        )
    if k is None:
        k = len(current.options)
    sel = sched.next_word(state, now, exclude=current.prompt_word)
    return make_quiz(sel.word_id, study_set, direction, k=k, seed=seed)


def make_intro_card(word_id: str, study_set: Deck) -> IntroCard:
    try:
        entry = study_set.by_id(word_id)
    except Exception:
        raise QuizError(f"word {word_id!r} not in study set") from None
    return IntroCard(word_id=entry.id, romanized=entry.romanized, gloss=entry.gloss)
