"""A hand-scripted week of engagement events with hand-computed totals.

The log below was replayed by hand to freeze the expected metrics:

- feed renders on Mar 2, 3, 4, 6, 8            -> days_visited = 5
- correct answers on Mar 2 (5), Mar 4 (4), Mar 6 (3)
                                               -> quizzes_answered = 12,
                                                  distinct_study_days = 3
- qualifying-event clusters (30 min timeout):
    Mar 2 09:00:30..09:04:06   first engagement
    Mar 2 20:01:00..20:03:05   first engagement
    Mar 4 08:35:00..08:37:08   opened by a link click
    Mar 4 09:30:00..09:32:04   first engagement (52 min gap)
    Mar 6 19:05:00..19:08:09   first engagement
                                               -> study_sessions = 5
- impressions and renders never open sessions.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

from wordfeed.analytics import Event, EventKind, SessionTrigger

TZ = timezone(timedelta(hours=-7))
USER = "u1"

EXPECTED = {
    "quizzes_answered": 12,
    "study_sessions": 5,
    "distinct_study_days": 3,
    "days_visited": 5,
}

EXPECTED_TRIGGERS = [
    SessionTrigger.FIRST_ENGAGEMENT,
    SessionTrigger.FIRST_ENGAGEMENT,
    SessionTrigger.LINK_CLICK,
    SessionTrigger.FIRST_ENGAGEMENT,
    SessionTrigger.FIRST_ENGAGEMENT,
]


def _ts(day: int, hh: int, mm: int, ss: int) -> datetime:
    return datetime(2026, 3, 2 + day, hh, mm, ss, tzinfo=TZ)


def build_fixture_events() -> list[Event]:
    ev: list[Event] = []

    def render(day, hh, mm, ss, items):
        ev.append(Event(_ts(day, hh, mm, ss), USER, EventKind.FEED_RENDER, items=items))

    def impression(day, hh, mm, ss, word):
        ev.append(Event(_ts(day, hh, mm, ss), USER, EventKind.IMPRESSION, word_id=word))

    def engage(day, hh, mm, ss, quiz):
        ev.append(Event(_ts(day, hh, mm, ss), USER, EventKind.ENGAGE, quiz_id=quiz))

    def answer(day, hh, mm, ss, quiz, word, idx, correct):
        ev.append(
            Event(
                _ts(day, hh, mm, ss), USER, EventKind.ANSWER,
                quiz_id=quiz, word_id=word, chosen_index=idx, correct=correct,
            )
        )

    def click(day, hh, mm, ss):
        ev.append(Event(_ts(day, hh, mm, ss), USER, EventKind.LINK_CLICK))

    # Mar 2: morning burst (3 solved), evening burst (2 solved)
    render(0, 9, 0, 0, 40)
    impression(0, 9, 0, 20, "kasa")
    engage(0, 9, 0, 30, "q01")
    answer(0, 9, 0, 34, "q01", "kasa", 2, False)
    answer(0, 9, 0, 40, "q01", "kasa", 1, True)
    engage(0, 9, 2, 0, "q02")
    answer(0, 9, 2, 5, "q02", "fukuro", 0, True)
    engage(0, 9, 4, 0, "q03")
    answer(0, 9, 4, 6, "q03", "jikan", 3, True)
    render(0, 20, 0, 0, 25)
    engage(0, 20, 1, 0, "q04")
    answer(0, 20, 1, 4, "q04", "inu", 2, False)
    answer(0, 20, 1, 10, "q04", "inu", 0, True)
    engage(0, 20, 3, 0, "q05")
    answer(0, 20, 3, 5, "q05", "neko", 1, True)

    # Mar 3: visited, did not study
    render(1, 11, 0, 0, 30)

    # Mar 4: link-click session, then a separate morning session
    render(2, 8, 30, 0, 50)
    click(2, 8, 35, 0)
    engage(2, 8, 36, 0, "q06")
    answer(2, 8, 36, 10, "q06", "hon", 0, True)
    engage(2, 8, 37, 0, "q07")
    answer(2, 8, 37, 8, "q07", "mizu", 2, True)
    engage(2, 9, 30, 0, "q08")
    answer(2, 9, 30, 5, "q08", "yama", 1, False)
    answer(2, 9, 30, 12, "q08", "yama", 3, True)
    engage(2, 9, 32, 0, "q09")
    answer(2, 9, 32, 4, "q09", "kawa", 0, True)

    # Mar 5: away (no events). Mar 6: one evening session.
    render(4, 19, 0, 0, 20)
    engage(4, 19, 5, 0, "q10")
    answer(4, 19, 5, 6, "q10", "sora", 2, True)
    engage(4, 19, 6, 0, "q11")
    answer(4, 19, 6, 5, "q11", "umi", 1, True)
    engage(4, 19, 8, 0, "q12")
    answer(4, 19, 8, 3, "q12", "hoshi", 0, False)
    answer(4, 19, 8, 9, "q12", "hoshi", 2, True)
    impression(4, 19, 10, 0, "tsuki")

    # Mar 7: away. Mar 8: visited, scrolled past everything.
    render(6, 21, 0, 0, 10)

    return ev
