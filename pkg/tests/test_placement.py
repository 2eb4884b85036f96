from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from oracles import oracle_fit
from wordfeed.placement import (
    AdUnit,
    Condition,
    DEFAULT_UNITS,
    ItemKind,
    PlacementError,
    fit_slot,
    plan_feed,
)


def test_banner_takes_three_small_units():
    fill = fit_slot(728, 90)
    assert (fill.unit.width, fill.unit.height) == (200, 90)
    assert (fill.columns, fill.rows) == (3, 1)
    assert fill.scale == 1.0


def test_exact_regular_slot():
    fill = fit_slot(300, 250)
    assert (fill.unit.width, fill.unit.height) == (300, 250)
    assert (fill.columns, fill.rows, fill.scale) == (1, 1, 1.0)


def test_tiny_slot_has_no_fit():
    assert fit_slot(10, 10) is None
    assert fit_slot(99, 44) is None


def test_skyscraper_matches_oracle_frozen():
    # 160x600: a column of small units scaled to the slot width.
    fill = fit_slot(160, 600)
    expected = oracle_fit(160, 600, DEFAULT_UNITS)
    assert expected is not None
    unit, columns, rows, scale = expected
    assert (fill.unit, fill.columns, fill.rows, fill.scale) == (unit, columns, rows, scale)
    # frozen values so the oracle itself is pinned
    assert (fill.unit.width, fill.unit.height, fill.columns, fill.rows) == (200, 90, 1, 6)
    assert fill.scale == pytest.approx(0.8)


def test_bad_inputs():
    with pytest.raises(PlacementError):
        fit_slot(0, 100)
    with pytest.raises(PlacementError):
        fit_slot(100, -5)
    with pytest.raises(PlacementError):
        fit_slot(100, 100, ())
    with pytest.raises(PlacementError):
        AdUnit("zero", 0, 10)


@given(
    st.integers(min_value=1, max_value=2000),
    st.integers(min_value=1, max_value=2000),
)
def test_fill_never_overflows_never_upscales(w, h):
    fill = fit_slot(w, h)
    if fill is None:
        return
    assert fill.scale <= 1.0
    assert fill.columns * fill.unit.width * fill.scale <= w + 1e-9
    assert fill.rows * fill.unit.height * fill.scale <= h + 1e-9
    assert fill.scale >= 0.5


def test_grid_agreement_with_oracle_sample():
    for w in range(50, 1001, 150):
        for h in range(50, 1001, 150):
            mine = fit_slot(w, h)
            ref = oracle_fit(w, h, DEFAULT_UNITS)
            if ref is None:
                assert mine is None, (w, h)
            else:
                assert mine is not None, (w, h)
                assert (mine.unit, mine.columns, mine.rows, mine.scale) == ref, (w, h)


def test_monotone_covered_area_in_slot_size():
    prev_rows: list[float] = []
    for h in range(50, 1001, 50):
        row = []
        for w in range(50, 1001, 50):
            fill = fit_slot(w, h)
            row.append(0.0 if fill is None else fill.covered_area)
        assert row == sorted(row), f"h={h}"
        if prev_rows:
            assert all(b >= a for a, b in zip(prev_rows[-1], row)), f"h={h}"
        prev_rows.append(row)


def test_plan_positions_every_tenth():
    plan = plan_feed(25, 10, Condition.IN_FEED_QUIZ)
    assert plan.positions == (10, 20)
    assert plan.kinds == (ItemKind.QUIZ, ItemKind.QUIZ)


def test_plan_short_feed_empty():
    assert plan_feed(9, 10, Condition.IN_FEED_QUIZ).positions == ()


def test_plan_link_condition_all_links():
    plan = plan_feed(30, 10, Condition.LINK)
    assert plan.positions == (10, 20, 30)
    assert plan.kinds == (ItemKind.LINK,) * 3


def test_plan_intro_ratio_marks_leading_positions():
    plan = plan_feed(50, 10, Condition.IN_FEED_QUIZ, intro_ratio=0.4)
    assert plan.kinds == (
        ItemKind.INTRO_CARD,
        ItemKind.INTRO_CARD,
        ItemKind.QUIZ,
        ItemKind.QUIZ,
        ItemKind.QUIZ,
    )


def test_plan_errors():
    with pytest.raises(PlacementError):
        plan_feed(10, 0, Condition.LINK)
    with pytest.raises(PlacementError):
        plan_feed(-1, 10, Condition.LINK)
    with pytest.raises(PlacementError):
        plan_feed(10, 10, Condition.IN_FEED_QUIZ, intro_ratio=1.5)


@given(st.integers(min_value=0, max_value=500), st.integers(min_value=1, max_value=30))
def test_plan_count_property(length, rate):
    plan = plan_feed(length, rate, Condition.IN_FEED_QUIZ)
    assert len(plan.positions) == length // rate
    assert list(plan.positions) == sorted(set(plan.positions))
    assert len(plan.kinds) == len(plan.positions)
    assert all(p <= length for p in plan.positions)
