"""Service configuration: key = value text files plus small parsers.

Example config:

    deck = src/wordfeed/data/deck_ja.txt
    filters = src/wordfeed/data/filters.txt
    data_dir = ./data
    listen = 127.0.0.1:8799
    link_url = https://quiz.example/study
    ladder = 30s 5m 30m 2h 12h 2d 7d
    rate = 10
    options = 4
    session_timeout = 30m
    ad_units = regular:300x250 small:200x90
    study_words = 50
    seed = 7
    snapshot_every = 200
    tz_offset = +00:00
    static_dir = frontend/dist

`#` starts a comment. The listen address may be overridden with the
WORDFEED_LISTEN environment variable. Referenced files must exist and
parse at startup.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from .placement import AdUnit, DEFAULT_UNITS
from .scheduler import DEFAULT_LADDER

LISTEN_ENV = "WORDFEED_LISTEN"
CONFIG_ENV = "WORDFEED_CONFIG"

_DURATION_RE = re.compile(r"^(\d+(?:\.\d+)?)(s|m|h|d)?$")
_UNIT_SECONDS = {"s": 1.0, "m": 60.0, "h": 3600.0, "d": 86400.0, None: 1.0}


class ConfigError(ValueError):
    """Unreadable or invalid configuration."""


def parse_duration(text: str) -> float:
    """'30s', '5m', '2h', '7d', or bare seconds -> seconds."""
    m = _DURATION_RE.match(text.strip())
    if not m:
        raise ConfigError(f"bad duration {text!r}")
    value, unit = m.groups()
    return float(value) * _UNIT_SECONDS[unit]


def parse_ladder(text: str) -> tuple[float, ...]:
    parts = text.replace(",", " ").split()
    if not parts:
        raise ConfigError("empty ladder")
    return tuple(parse_duration(p) for p in parts)


def parse_ad_units(text: str) -> tuple[AdUnit, ...]:
    """'regular:300x250 small:200x90' -> AdUnit table."""
    units = []
    for part in text.replace(",", " ").split():
        m = re.match(r"^([\w-]+):(\d+)x(\d+)$", part)
        if not m:
            raise ConfigError(f"bad ad unit {part!r} (want name:WxH)")
        units.append(AdUnit(m.group(1), int(m.group(2)), int(m.group(3))))
    if not units:
        raise ConfigError("empty ad unit table")
    return tuple(units)


def parse_tz_offset(text: str) -> int:
    """'+09:00' / '-07:00' / 'Z' -> offset minutes."""
    text = text.strip()
    if text in ("Z", "z", "+00:00", "-00:00", "00:00"):
        return 0
    m = re.match(r"^([+-])(\d{2}):(\d{2})$", text)
    if not m:
        raise ConfigError(f"bad tz offset {text!r}")
    sign = 1 if m.group(1) == "+" else -1
    return sign * (int(m.group(2)) * 60 + int(m.group(3)))


@dataclass
class ServiceConfig:
    deck_path: Path | None = None
    filter_path: Path | None = None
    data_dir: Path | None = None
    listen: str = "127.0.0.1:8799"
    link_url: str = "https://quiz.example/study"
    ladder: tuple[float, ...] = DEFAULT_LADDER
    rate: int = 10
    option_count: int = 4
    session_timeout: float = 30 * 60.0
    ad_units: tuple[AdUnit, ...] = DEFAULT_UNITS
    study_words: int | None = None
    seed: int = 0
    snapshot_every: int = 200
    tz_offset_minutes: int = 0
    static_dir: Path | None = None


def load_config(path: str | Path) -> ServiceConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cfg = ServiceConfig()
    base = path.parent
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path} line {lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            try:
                _apply_key(cfg, key, value, base)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"{path} line {lineno}: {exc}") from None
    listen_override = os.environ.get(LISTEN_ENV)
    if listen_override:
        cfg.listen = listen_override
    return cfg


def _apply_key(cfg: ServiceConfig, key: str, value: str, base: Path) -> None:
    def rel(p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else base / q

    if key == "deck":
        cfg.deck_path = rel(value)
    elif key == "filters":
        cfg.filter_path = rel(value)
    elif key == "data_dir":
        cfg.data_dir = rel(value)
    elif key == "listen":
        cfg.listen = value
    elif key == "link_url":
        cfg.link_url = value
    elif key == "ladder":
        cfg.ladder = parse_ladder(value)
    elif key == "rate":
        cfg.rate = int(value)
    elif key == "options":
        cfg.option_count = int(value)
    elif key == "session_timeout":
        cfg.session_timeout = parse_duration(value)
    elif key == "ad_units":
        cfg.ad_units = parse_ad_units(value)
    elif key == "study_words":
        cfg.study_words = int(value)
    elif key == "seed":
        cfg.seed = int(value)
    elif key == "snapshot_every":
        cfg.snapshot_every = int(value)
    elif key == "tz_offset":
        cfg.tz_offset_minutes = parse_tz_offset(value)
    elif key == "static_dir":
        cfg.static_dir = rel(value)
    else:
        raise ConfigError(f"unknown config key {key!r}")
