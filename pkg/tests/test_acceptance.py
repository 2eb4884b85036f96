"""Contract-level acceptance suite.

Each test enforces one release criterion at its stated tolerance and
prints one `ACCEPTANCE <name>: PASS/FAIL` line (run with -s to watch).
Budgets are asserted where the contract states one.
"""

from __future__ import annotations

import functools
import itertools
import random
import time

from conftest import make_deck
from fixture_log import EXPECTED, EXPECTED_TRIGGERS, build_fixture_events
from oracles import oracle_fit, oracle_matches
from test_service import Driver, make_config
from wordfeed.analytics import compute_metrics, sessionize
from wordfeed.placement import Condition, DEFAULT_UNITS, fit_slot, plan_feed
from wordfeed.quizgen import Direction, check_answer, make_quiz
from wordfeed.scheduler import (
    DEFAULT_LADDER,
    init_state,
    next_word,
    record_answer,
    record_impression,
)
from wordfeed.service import StudyService
from wordfeed.simulate import SimConfig, bundled_deck, run_sim
from wordfeed.vocab import Deck, WordEntry, apply_exclusions
from wordfeed.filters import Verdict, matches, parse_filter_list


def criterion(name: str, budget_s: float | None = None):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.monotonic()
            try:
                detail = fn(*args, **kwargs) or ""
            except BaseException:
                elapsed = time.monotonic() - start
                print(f"ACCEPTANCE {name}: FAIL ({elapsed:.1f}s)", flush=True)
                raise
            elapsed = time.monotonic() - start
            if budget_s is not None:
                assert elapsed < budget_s, f"{name}: {elapsed:.1f}s exceeds {budget_s}s budget"
            suffix = f" [{detail}]" if detail else ""
            print(f"ACCEPTANCE {name}: PASS{suffix} ({elapsed:.2f}s)", flush=True)
        return wrapper
    return decorate


# ---------------------------------------------------------------------------
# 1. filter matcher vs naive regex-translation oracle

CORPUS_RULES = [
    "||ads.example.com^",
    "||example.com/ads/",
    "||adserver.net^",
    "||tracker.example^$third-party",
    "||cdn.example^$~third-party",
    "||media.example/banner/*.gif",
    "||example.com^$domain=news.example|~tech.news.example",
    "||wide.example/*/creative^",
    "|http://static.example/promos/",
    "|https://exact.example/ad.js|",
    "/adbanner/*",
    "/ads/popup^",
    "-banner-300x250.",
    "_ad_block*",
    "*banners*",
    "^ads^",
    "track/pixel^",
    "promo.example/creative/|",
    "@@||ads.example.com/acceptable/",
    "@@||example.com/ads/allowed$domain=news.example",
    "@@||adserver.net/house^$~third-party",
    "@@|http://static.example/promos/ok/",
]

CORPUS_URLS = [
    "http://ads.example.com/b.png",
    "http://ads.example.com",
    "http://ads.example.com/acceptable/x.js",
    "https://sub.ads.example.com/img-banner-300x250.png",
    "http://example.com/ads/allowed/x.js",
    "http://example.com/ads/app.js",
    "http://badexample.com/ads/app.js",
    "http://example.com/adsx/app.js",
    "http://example.com:8080/ads/a.js",
    "http://static.example/promos/p1.gif",
    "http://static.example/promos/ok/p2.gif",
    "https://static.example/promos/p1.gif",
    "https://exact.example/ad.js",
    "https://exact.example/ad.js?x=1",
    "http://media.example/banner/sky.gif",
    "http://media.example/banner/deep/sky.gif",
    "http://media.example/banner/sky.jpg",
    "http://tracker.example/t.gif",
    "http://cdn.example/app.css",
    "http://adserver.net/house/promo.png",
    "http://adserver.net/x.gif",
    "http://site.example/track/pixel?i=1",
    "http://site.example/assets/adbanner/x",
    "http://site.example/page",
    "http://x.example/path_ad_blocker.js",
    "http://x.example/a^b/ads/c",
    "http://promo.example/creative/",
    "http://wide.example/2026/03/creative?id=9",
]

CORPUS_PAGES = ["news.example", "tech.news.example", "site.example", "b.example"]


@criterion("filter-oracle-agreement", budget_s=5.0)
def test_filter_matcher_agrees_with_regex_oracle():
    filter_set = parse_filter_list("\n".join(CORPUS_RULES))
    assert len(filter_set) == len(CORPUS_RULES), "corpus rule failed to parse"
    cases = 0
    for url, page, third_party in itertools.product(CORPUS_URLS, CORPUS_PAGES, (False, True)):
        mine = matches(filter_set, url, page, third_party)
        verdict, raw = oracle_matches(filter_set, url, page, third_party)
        assert mine.verdict is verdict, (url, page, third_party)
        assert (mine.rule.raw if mine.rule else None) == raw, (url, page, third_party)
        cases += 1
    # per-rule agreement too, so every syntax feature is exercised alone
    for line in CORPUS_RULES:
        single = parse_filter_list(line)
        for url in CORPUS_URLS:
            for third_party in (False, True):
                mine = matches(single, url, "news.example", third_party)
                verdict, _ = oracle_matches(single, url, "news.example", third_party)
                assert mine.verdict is verdict, (line, url, third_party)
                cases += 1
    assert cases >= 200
    return f"{cases} cases, 100% agreement"


# ---------------------------------------------------------------------------
# 2. layout

@criterion("layout-oracle-and-banner", budget_s=10.0)
def test_layout_pinned_banner_and_grid_oracle():
    fill = fit_slot(728, 90)
    assert (fill.unit.width, fill.unit.height) == (200, 90)
    assert (fill.columns, fill.rows) == (3, 1)
    assert fill.scale == 1.0

    checked = 0
    for w in range(50, 1001, 50):
        for h in range(50, 1001, 50):
            mine = fit_slot(w, h)
            ref = oracle_fit(w, h, DEFAULT_UNITS)
            if ref is None:
                assert mine is None, (w, h)
            else:
                unit, columns, rows, scale = ref
                assert mine is not None, (w, h)
                assert (mine.unit, mine.columns, mine.rows, mine.scale) == (unit, columns, rows, scale), (w, h)
                assert mine.columns * mine.unit.width * mine.scale <= w + 1e-9
                assert mine.rows * mine.unit.height * mine.scale <= h + 1e-9
                assert 0.5 <= mine.scale <= 1.0
            checked += 1
    return f"banner=3x(200x90)@1.0, {checked} grid slots agree"


# ---------------------------------------------------------------------------
# 3. insertion rate

@criterion("insertion-rate", budget_s=1.0)
def test_insertion_rate_all_feed_lengths():
    for length in range(0, 501):
        plan = plan_feed(length, 10, Condition.IN_FEED_QUIZ)
        assert len(plan.positions) == length // 10, length
        assert list(plan.positions) == sorted(set(plan.positions)), length
    return "lengths 0..500 at rate 10"


# ---------------------------------------------------------------------------
# 4. scheduler rotation and precedence

@criterion("scheduler-rotation")
def test_rotation_and_precedence_randomized():
    deck = make_deck(*[(f"r{i:02d}", f"g{i:02d}") for i in range(50)])
    rng = random.Random(20260309)
    trials = 0
    for k in range(1, 51):
        for _ in range(20):
            state = init_state(deck, DEFAULT_LADDER, now=0.0)
            now = 1000.0
            introduced = list(deck.ids())
            rng.shuffle(introduced)
            overdue_ids = set()
            for wid in deck.ids():  # introductions must follow deck order
                if len(overdue_ids) < k:
                    record_impression(state, wid, now, introducing=True)
                    ws = state.states[wid]
                    ws.due_at = now - rng.uniform(1.0, 500.0)
                    ws.last_feed_at = None if rng.random() < 0.2 else now - rng.uniform(0.0, 900.0)
                    overdue_ids.add(wid)
            # precedence: something is overdue, so never a new word
            sel = next_word(state, now)
            assert not sel.is_new

            seen = []
            for _ in range(k):
                sel = next_word(state, now)
                assert not sel.is_new
                assert sel.word_id in overdue_ids
                record_impression(state, sel.word_id, now)
                seen.append(sel.word_id)
                now += 1.0
            assert len(set(seen)) == k, f"rotation repeated a word at k={k}"

            # push everything into the future: a new word must come next
            for wid in overdue_ids:
                state.states[wid].due_at = now + 10_000.0
            sel = next_word(state, now)
            if state.new_word_cursor < len(deck):
                assert sel.is_new
            else:
                assert not sel.is_new
            trials += 1
    assert trials == 1000
    return f"{trials} randomized trials, k=1..50"


# ---------------------------------------------------------------------------
# 5. spacing monotonicity

@criterion("spacing-monotonicity")
def test_spacing_monotonicity_every_ladder_length():
    for length in range(1, len(DEFAULT_LADDER) + 1):
        ladder = DEFAULT_LADDER[:length]
        deck = make_deck(("solo", "only"))
        state = init_state(deck, ladder, now=0.0)
        record_impression(state, "w1", 0.0, introducing=True)
        ws = state.states["w1"]
        now, gaps = 0.0, []
        for _ in range(length + 2):
            record_answer(state, "w1", True, now)
            gaps.append(ws.due_at - now)
            now = ws.due_at
        below_top = gaps[: length - 1]
        assert all(b > a for a, b in zip(below_top, below_top[1:])), ladder
        assert all(g == ladder[-1] for g in gaps[length - 1 :]), ladder
        record_answer(state, "w1", False, now)
        assert ws.box == 0 and ws.due_at - now == ladder[0]
    return f"ladder lengths 1..{len(DEFAULT_LADDER)}"


# ---------------------------------------------------------------------------
# 6. quiz integrity over 10,000 draws

@criterion("quiz-integrity")
def test_quiz_integrity_ten_thousand_draws():
    rng = random.Random(97)
    pool = [(f"rom{i}", f"gloss{i}") for i in range(40)]
    draws = 10_000
    for _ in range(draws):
        size = rng.randint(4, 16)
        words = rng.sample(pool, size)
        deck = Deck(
            name="draw",
            entries=tuple(
                WordEntry(id=f"w{i}", romanized=r, gloss=g) for i, (r, g) in enumerate(words)
            ),
        )
        word = rng.choice(deck.ids())
        direction = rng.choice((Direction.EN_TO_TARGET, Direction.TARGET_TO_EN))
        k = rng.randint(2, min(6, size))
        quiz = make_quiz(word, deck, direction, k=k, seed=rng.randrange(2**31))
        assert sum(1 for o in quiz.options if o.word_id == word) == 1
        assert quiz.options[quiz.correct_index].word_id == word
        assert len({o.text for o in quiz.options}) == k
        assert check_answer(quiz, quiz.correct_index).correct
        wrong = rng.randrange(k)
        if wrong != quiz.correct_index:
            result = check_answer(quiz, wrong)
            assert not result.correct
            chosen = quiz.options[wrong]
            expected_gloss = next(e.gloss for e in deck if e.id == chosen.word_id)
            assert result.feedback.chosen_meaning == expected_gloss
    return f"{draws} draws"


# ---------------------------------------------------------------------------
# 7. exclusion rules

@criterion("exclusion-rules")
def test_exclusions_homographs_loanwords_idempotent():
    deck = make_deck(
        ("hana", "flower"),
        ("hana", "nose"),
        ("pinku", "pink"),
        ("kasa", "umbrella"),
        ("jikan", "time"),
        loanwords={"pinku"},
    )
    result = apply_exclusions(deck)
    romanized = [e.romanized for e in result]
    assert "hana" not in romanized, "homograph pair must be removed entirely"
    assert "pinku" not in romanized, "loanword must be removed"
    assert romanized == ["kasa", "jikan"]
    assert apply_exclusions(result) == result
    # idempotence on the shipped deck too
    bundled = apply_exclusions(bundled_deck())
    assert apply_exclusions(bundled) == bundled
    return "hana pair + pinku removed; idempotent"


# ---------------------------------------------------------------------------
# 8. event sourcing: kill/recover dual run over 1,000 mixed events

@criterion("event-sourcing-dual-run")
def test_event_sourcing_dual_run_1000_events(tmp_path):
    events_total, kill_at = 1000, 437

    straight = StudyService(make_config())
    Driver(20260401).attach(straight).run_until(events_total)
    expected = straight.state_snapshot_text()
    straight.close()

    config = make_config(tmp_path)
    first = StudyService(config)
    driver = Driver(20260401).attach(first)
    driver.run_until(kill_at)
    first.log.close()  # hard kill: no clean shutdown, no final snapshot
    if first._users_fh:
        first._users_fh.close()

    recovered = StudyService(make_config(tmp_path))
    driver.attach(recovered).run_until(events_total)
    actual = recovered.state_snapshot_text()
    recovered.close()

    assert len(recovered.log) == len(straight.log) >= events_total
    assert actual == expected, "recovered state diverged from the straight run"
    return f"{len(recovered.log)} events, kill at {kill_at}, snapshots bit-identical"


# ---------------------------------------------------------------------------
# 9. analytics fixture

@criterion("analytics-fixture")
def test_analytics_fixture_hand_replayed():
    events = build_fixture_events()
    metrics = compute_metrics(events)
    assert metrics.quizzes_answered == EXPECTED["quizzes_answered"]
    assert metrics.study_sessions == EXPECTED["study_sessions"]
    assert metrics.distinct_study_days == EXPECTED["distinct_study_days"]
    assert metrics.days_visited == EXPECTED["days_visited"]
    triggers = [s.trigger for s in sessionize(events)]
    assert triggers == EXPECTED_TRIGGERS, "session triggers must match construction"
    return (
        f"answered={metrics.quizzes_answered} sessions={metrics.study_sessions} "
        f"study_days={metrics.distinct_study_days} visit_days={metrics.days_visited}"
    )


# ---------------------------------------------------------------------------
# 10. simulator condition direction

@criterion("simulator-direction", budget_s=60.0)
def test_simulator_direction_thirty_matched_seeds():
    deck = bundled_deck()
    seeds = range(30)
    infeed = [run_sim(SimConfig(condition=Condition.IN_FEED_QUIZ, seed=s), deck) for s in seeds]
    link = [run_sim(SimConfig(condition=Condition.LINK, seed=s), deck) for s in seeds]

    def mean(reports, get):
        return sum(get(r) for r in reports) / len(reports)

    learned_in = mean(infeed, lambda r: r.metrics.words_learned)
    learned_link = mean(link, lambda r: r.metrics.words_learned)
    sessions_in = mean(infeed, lambda r: r.metrics.study_sessions)
    sessions_link = mean(link, lambda r: r.metrics.study_sessions)
    answers_in = mean(infeed, lambda r: r.metrics.quizzes_answered)
    answers_link = mean(link, lambda r: r.metrics.quizzes_answered)

    assert learned_in >= 2.0 * learned_link, (learned_in, learned_link)
    assert sessions_in > sessions_link, (sessions_in, sessions_link)
    assert answers_in > answers_link, (answers_in, answers_link)
    return (
        f"learned {learned_in:.1f} vs {learned_link:.1f} (>=2x), "
        f"sessions {sessions_in:.1f} vs {sessions_link:.1f}, "
        f"answers {answers_in:.1f} vs {answers_link:.1f}"
    )
