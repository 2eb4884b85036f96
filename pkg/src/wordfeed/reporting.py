"""Report rendering: aligned text tables, tab-delimited rows, and figures.

The simulate and report commands write a .tsv next to PNG charts so the
same run can feed both scripts and slides.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .analytics import Event, EventKind, Metrics  # noqa: E402

_CONDITION_COLORS = {"in_feed_quiz": "#3a7ca5", "link": "#d08c2e"}


def format_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def line(cells):
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()
    out = [line(headers), line(["-" * w for w in widths])]
    out.extend(line(row) for row in rows)
    return "\n".join(out)


def write_tsv(path: Path, headers: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(headers) + "\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")


SIM_HEADERS = [
    "condition", "seeds", "quizzes_answered", "study_sessions",
    "distinct_study_days", "days_visited", "words_learned",
    "posttest_expected_words", "attempts", "words_introduced",
]


def sim_summary_row(condition: str, reports) -> list[str]:
    n = len(reports)
    def mean(get):
        return sum(get(r) for r in reports) / n
    return [
        condition,
        str(n),
        f"{mean(lambda r: r.metrics.quizzes_answered):.1f}",
        f"{mean(lambda r: r.metrics.study_sessions):.1f}",
        f"{mean(lambda r: r.metrics.distinct_study_days):.1f}",
        f"{mean(lambda r: r.metrics.days_visited):.1f}",
        f"{mean(lambda r: r.metrics.words_learned):.1f}",
        f"{mean(lambda r: r.posttest_expected_words):.1f}",
        f"{mean(lambda r: r.attempts):.1f}",
        f"{mean(lambda r: r.words_introduced):.1f}",
    ]


def render_sim_figures(rows: list[list[str]], out_dir: Path) -> list[Path]:
    """Bar charts comparing conditions: learning outcome and engagement."""
    out_dir.mkdir(parents=True, exist_ok=True)
    by = {row[0]: row for row in rows}
    conditions = list(by)
    colors = [_CONDITION_COLORS.get(c, "#777777") for c in conditions]
    written = []

    fig, ax = plt.subplots(figsize=(5, 3.4))
    values = [float(by[c][SIM_HEADERS.index("words_learned")]) for c in conditions]
    expected = [float(by[c][SIM_HEADERS.index("posttest_expected_words")]) for c in conditions]
    x = range(len(conditions))
    ax.bar([i - 0.2 for i in x], values, width=0.38, color=colors, label="words learned (box)")
    ax.bar([i + 0.2 for i in x], expected, width=0.38, color=colors, alpha=0.45,
           label="expected post-test words")
    ax.set_xticks(list(x))
    ax.set_xticklabels(conditions)
    ax.set_ylabel("words")
    ax.set_title("Learning outcome by condition")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = out_dir / "learning.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(5.8, 3.4))
    metrics = ["quizzes_answered", "study_sessions", "distinct_study_days"]
    width = 0.8 / len(conditions)
    for ci, cond in enumerate(conditions):
        vals = [float(by[cond][SIM_HEADERS.index(m)]) for m in metrics]
        offs = [i + (ci - (len(conditions) - 1) / 2) * width for i in range(len(metrics))]
        ax.bar(offs, vals, width=width, color=colors[ci], label=cond)
    ax.set_xticks(range(len(metrics)))
    ax.set_xticklabels([m.replace("_", " ") for m in metrics], fontsize=8)
    ax.set_yscale("log")
    ax.set_ylabel("mean per user (log scale)")
    ax.set_title("Engagement by condition")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = out_dir / "engagement.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written


METRICS_HEADERS = ["metric", "value"]


def metrics_rows(metrics: Metrics) -> list[list[str]]:
    return [
        ["quizzes_answered", str(metrics.quizzes_answered)],
        ["study_sessions", str(metrics.study_sessions)],
        ["distinct_study_days", str(metrics.distinct_study_days)],
        ["days_visited", str(metrics.days_visited)],
        ["words_learned", str(metrics.words_learned)],
    ]


def render_activity_figure(events: list[Event], out_dir: Path) -> Path:
    """Solved answers per local calendar day."""
    out_dir.mkdir(parents=True, exist_ok=True)
    per_day = Counter(
        e.ts.date() for e in events if e.kind is EventKind.ANSWER and e.correct
    )
    days = sorted(per_day)
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.bar([d.isoformat() for d in days], [per_day[d] for d in days], color="#3a7ca5")
    ax.set_ylabel("quizzes solved")
    ax.set_title("Daily study activity")
    ax.tick_params(axis="x", labelrotation=45, labelsize=7)
    fig.tight_layout()
    path = out_dir / "activity.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
