"""Slot fitting for ad replacement and feed insertion planning.

Widgets come in standard ad-unit sizes (regular 300x250, small 200x90 by
default). A detected ad slot is filled by tiling one unit: tile counts per
axis are what fits at native size (at least one), and the whole grid is
then scaled uniformly, never above 1.0 and never below 0.5, to fit the
slot. Among candidates the fill covering the most area wins, so a 728x90
banner takes three small units side by side at full size rather than
more, shrunken ones.

Feed insertion is one study item per `rate` organic items (default 10),
placed before the organic item at each multiple of the rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class PlacementError(ValueError):
    """Invalid slot dimensions or feed-plan parameters."""


class Condition(Enum):
    IN_FEED_QUIZ = "in_feed_quiz"
    LINK = "link"


class ItemKind(Enum):
    QUIZ = "quiz"
    INTRO_CARD = "intro_card"
    LINK = "link"


@dataclass(frozen=True)
class AdUnit:
    name: str
    width: int
    height: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise PlacementError(f"ad unit {self.name!r} must have positive dimensions")

    @property
    def area(self) -> int:
        return self.width * self.height


DEFAULT_UNITS: tuple[AdUnit, ...] = (AdUnit("regular", 300, 250), AdUnit("small", 200, 90))

MIN_SCALE = 0.5


@dataclass(frozen=True)
class SlotFill:
    slot_w: float
    slot_h: float
    unit: AdUnit
    columns: int
    rows: int
    scale: float

    @property
    def tile_w(self) -> float:
        return self.unit.width * self.scale

    @property
    def tile_h(self) -> float:
        return self.unit.height * self.scale

    @property
    def covered_area(self) -> float:
        return self.columns * self.rows * self.unit.area * self.scale * self.scale


@dataclass(frozen=True)
class FeedPlan:
    feed_length: int
    rate: int
    condition: Condition
    positions: tuple[int, ...]
    kinds: tuple[ItemKind, ...]


def candidate_scale(slot_w: float, slot_h: float, unit: AdUnit, columns: int, rows: int) -> float:
    return min(1.0, slot_w / (columns * unit.width), slot_h / (rows * unit.height))


def fit_slot(slot_w: float, slot_h: float, units: tuple[AdUnit, ...] = DEFAULT_UNITS) -> SlotFill | None:
    """Best homogeneous tiling of one unit into the slot, or None.

    Candidates: per unit, 1..floor(slot/unit) tiles per axis (one tile per
    axis is always considered so undersized slots can still take a single
    scaled widget); scale = min(1, slot_w/(c*w), slot_h/(r*h)), admitted
    when >= 0.5. Maximizes covered area c*r*w*h*scale^2; ties prefer the
    larger unit, then fewer tiles, then more columns. Output never
    overflows the slot and never upscales.
    """
    if slot_w <= 0 or slot_h <= 0:
        raise PlacementError("slot dimensions must be positive")
    if not units:
        raise PlacementError("no ad units configured")

    best: SlotFill | None = None
    best_key: tuple | None = None
    for unit in units:
        max_c = max(1, math.floor(slot_w / unit.width))
        max_r = max(1, math.floor(slot_h / unit.height))
        for columns in range(1, max_c + 1):
            for rows in range(1, max_r + 1):
                scale = candidate_scale(slot_w, slot_h, unit, columns, rows)
                if scale < MIN_SCALE:
                    continue
                fill = SlotFill(slot_w, slot_h, unit, columns, rows, scale)
                key = (fill.covered_area, unit.area, -(columns * rows), columns)
                if best_key is None or key > best_key:
                    best, best_key = fill, key
    return best


def plan_feed(
    feed_length: int,
    rate: int = 10,
    condition: Condition = Condition.IN_FEED_QUIZ,
    intro_ratio: float = 0.0,
) -> FeedPlan:
    """Insertion positions and item kinds for a feed of `feed_length`
    organic items.

    Insertions go before the organic item at indices rate, 2*rate, ...,
    so |positions| = floor(feed_length / rate). In the link condition all
    items are links. In the in-feed condition the planned kinds are
    placeholders: the leading floor(intro_ratio * n) insertions are marked
    introductions, the rest quizzes, and the actual kind is resolved by the
    scheduler when each slot is displayed (the plan cannot know future
    answer outcomes).
    """
    if rate < 1:
        raise PlacementError("rate must be at least 1")
    if feed_length < 0:
        raise PlacementError("feed length must be non-negative")
    if not 0.0 <= intro_ratio <= 1.0:
        raise PlacementError("intro_ratio must be within [0, 1]")
    n = feed_length // rate
    positions = tuple(rate * (i + 1) for i in range(n))
    if condition is Condition.LINK:
        kinds = tuple(ItemKind.LINK for _ in range(n))
    else:
        intro_count = math.floor(intro_ratio * n + 1e-9)
        kinds = tuple(
            ItemKind.INTRO_CARD if i < intro_count else ItemKind.QUIZ for i in range(n)
        )
    return FeedPlan(feed_length=feed_length, rate=rate, condition=condition, positions=positions, kinds=kinds)
