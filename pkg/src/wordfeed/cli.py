"""Operator command line.

    wordfeed serve --config service.conf
    wordfeed match FILTERS URL [--page HOST] [--third-party|--first-party]
    wordfeed fit WIDTH HEIGHT [--units regular:300x250,small:200x90]
    wordfeed simulate [--condition both] [--seeds 30] [--report-dir DIR]
    wordfeed report EVENTS.LOG [--user U] [--report-dir DIR]
    wordfeed deck-validate DECK

match exit codes: 0 = block, 1 = no match, 2 = allow (errors exit 3).
--porcelain switches stdout to stable tab-separated rows for scripting.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from . import __version__
from .analytics import EventLog, compute_metrics
from .config import CONFIG_ENV, ConfigError, load_config, parse_ad_units, parse_duration
from .filters import Verdict, load_filter_file, matches, registrable_domain, split_url
from .placement import Condition, DEFAULT_UNITS, fit_slot
from .scheduler import restore as restore_scheduler
from .simulate import SimConfig, SimulationError, bundled_deck, run_sim
from .vocab import DeckError, apply_exclusions, load_deck_file


def _err(message: str) -> None:
    print(f"wordfeed: {message}", file=sys.stderr)


def cmd_serve(args) -> int:
    from .httpapi import make_server
    from .service import RecoveryError, StudyService

    config_path = args.config or os.environ.get(CONFIG_ENV)
    if not config_path:
        _err("no config file (use --config or WORDFEED_CONFIG)")
        return 1
    try:
        config = load_config(config_path)
        service = StudyService(config)
        server = make_server(service)
    except (ConfigError, DeckError, RecoveryError, OSError) as exc:
        _err(str(exc))
        return 1
    server.verbose = True
    host, port = server.server_address[:2]
    print(f"wordfeed service on http://{host}:{port}/ "
          f"({len(service.study_set)} study words, {len(service.users)} users recovered)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        service.close()
    return 0


def cmd_match(args) -> int:
    try:
        filter_set = load_filter_file(args.filters)
    except OSError as exc:
        _err(str(exc))
        return 3
    try:
        url_host = split_url(args.url).hostname
        page_host = args.page or url_host
        if args.third_party is None:
            third_party = registrable_domain(url_host) != registrable_domain(page_host)
        else:
            third_party = args.third_party
        decision = matches(filter_set, args.url, page_host, third_party)
    except ValueError as exc:
        _err(str(exc))
        return 3
    rule = decision.rule.raw if decision.rule else ""
    if args.porcelain:
        print(f"{decision.verdict.value}\t{rule}")
    elif decision.verdict is Verdict.BLOCK:
        print(f"block: {rule}")
    elif decision.verdict is Verdict.ALLOW:
        print(f"allow: {rule}")
    else:
        print("no match")
    return {Verdict.BLOCK: 0, Verdict.NO_MATCH: 1, Verdict.ALLOW: 2}[decision.verdict]


def cmd_fit(args) -> int:
    try:
        units = parse_ad_units(args.units) if args.units else DEFAULT_UNITS
        fill = fit_slot(args.width, args.height, units)
    except ValueError as exc:
        _err(str(exc))
        return 3
    if fill is None:
        print("no fit")
        return 0
    if args.porcelain:
        print(f"{fill.unit.width}x{fill.unit.height}\t{fill.columns}\t{fill.rows}\t{fill.scale:.2f}")
    else:
        print(f"{fill.unit.width}x{fill.unit.height} ×{fill.columns}×{fill.rows} scale {fill.scale:.2f}")
    return 0


_SIM_FLAGS = [
    ("days", int), ("feed_items_per_day", int), ("visits_per_day", int),
    ("p_visit", float), ("p_engage", float), ("p_continue", float),
    ("max_chain", int), ("p_link_click", float), ("link_quizzes_mean", float),
    ("rate", int), ("option_count", int), ("study_words", int),
]


def cmd_simulate(args) -> int:
    from .reporting import SIM_HEADERS, format_table, render_sim_figures, sim_summary_row, write_tsv

    overrides = {
        name: getattr(args, name)
        for name, _ in _SIM_FLAGS
        if getattr(args, name) is not None
    }
    conditions = (
        [Condition.IN_FEED_QUIZ, Condition.LINK]
        if args.condition == "both"
        else [Condition(args.condition)]
    )
    try:
        deck = bundled_deck() if args.deck is None else None
        if deck is None:
            deck = load_deck_file(args.deck)
        rows = []
        for condition in conditions:
            reports = []
            for i in range(args.seeds):
                config = SimConfig(condition=condition, seed=args.seed + i, **overrides)
                reports.append(run_sim(config, deck))
            rows.append(sim_summary_row(condition.value, reports))
    except (SimulationError, DeckError, ValueError) as exc:
        _err(str(exc))
        return 1
    if args.porcelain:
        print("\t".join(SIM_HEADERS))
        for row in rows:
            print("\t".join(row))
    else:
        print(format_table(SIM_HEADERS, rows))
    if args.report_dir:
        out = Path(args.report_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_tsv(out / "simulation.tsv", SIM_HEADERS, rows)
        figures = render_sim_figures(rows, out)
        print(f"wrote {out / 'simulation.tsv'} and {len(figures)} figure(s)", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    from .reporting import METRICS_HEADERS, format_table, metrics_rows, render_activity_figure, write_tsv

    try:
        log = EventLog.load(args.log)
        log.close()
        events = log.for_user(args.user) if args.user else list(log.events)
        scheduler = None
        if args.snapshot:
            scheduler = restore_scheduler(Path(args.snapshot).read_text("utf-8"))
        timeout = parse_duration(args.timeout) if args.timeout else 30 * 60.0
        metrics = compute_metrics(events, scheduler, timeout=timeout)
    except (ValueError, OSError) as exc:
        _err(str(exc))
        return 1
    rows = metrics_rows(metrics)
    if args.porcelain:
        for row in rows:
            print("\t".join(row))
    else:
        print(format_table(METRICS_HEADERS, rows))
    if args.report_dir:
        out = Path(args.report_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_tsv(out / "metrics.tsv", METRICS_HEADERS, rows)
        render_activity_figure(events, out)
        print(f"wrote {out / 'metrics.tsv'} and activity figure", file=sys.stderr)
    return 0


def cmd_deck_validate(args) -> int:
    try:
        deck = load_deck_file(args.deck)
        studyable = apply_exclusions(deck)
    except OSError as exc:
        _err(str(exc))
        return 1
    except DeckError as exc:
        print(f"invalid: {exc}")
        return 1
    print(f"ok: {len(deck)} entries, {len(studyable)} after exclusions")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wordfeed", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"wordfeed {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP study service")
    p.add_argument("--config", help=f"config file (or ${CONFIG_ENV})")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("match", help="match a URL against a filter list")
    p.add_argument("filters", help="filter list file")
    p.add_argument("url")
    p.add_argument("--page", help="page hostname (defaults to the URL's host)")
    tp = p.add_mutually_exclusive_group()
    tp.add_argument("--third-party", dest="third_party", action="store_true", default=None)
    tp.add_argument("--first-party", dest="third_party", action="store_false", default=None)
    p.add_argument("--porcelain", action="store_true")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("fit", help="fit study widgets into an ad slot")
    p.add_argument("width", type=float)
    p.add_argument("height", type=float)
    p.add_argument("--units", help="unit table, e.g. regular:300x250,small:200x90")
    p.add_argument("--porcelain", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="run the study simulator")
    p.add_argument("--condition", choices=["both", "in_feed_quiz", "link"], default="both")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=30, help="number of matched seeds per condition")
    p.add_argument("--deck", help="deck file (defaults to the bundled deck)")
    for name, kind in _SIM_FLAGS:
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=kind, default=None)
    p.add_argument("--report-dir", help="write simulation.tsv and figures here")
    p.add_argument("--porcelain", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="metrics from an event log")
    p.add_argument("log", help="events file")
    p.add_argument("--user", help="restrict to one user id")
    p.add_argument("--snapshot", help="scheduler snapshot for words-learned")
    p.add_argument("--timeout", help="session timeout, e.g. 30m")
    p.add_argument("--report-dir", help="write metrics.tsv and activity figure here")
    p.add_argument("--porcelain", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("deck-validate", help="check a deck file")
    p.add_argument("deck")
    p.set_defaults(func=cmd_deck_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
