"""Independent reference implementations used to cross-check the engine.

These deliberately take a different route from the production code:

- The filter oracle translates each parsed rule into one anchored regular
  expression and asks re.search, instead of walking tokens over candidate
  positions. Caveat: the hostname-boundary translation assumes URLs
  without userinfo (no '@' in the authority) and without a trailing dot
  on the host, which the test corpus guarantees.

- The layout oracle enumerates every (unit, columns <= 10, rows <= 12)
  candidate into a flat list and takes the max of the shared objective.
"""

from __future__ import annotations

import re

from wordfeed.filters import Anchor, FilterRule, FilterSet, Verdict

_SEP_RE = r"(?:[^A-Za-z0-9_\-.%]|$)"
_HOST_BOUNDARY = r"[a-z][a-z0-9+.\-]*://(?:[^/?#]*\.)?"


def rule_to_regex(rule: FilterRule) -> re.Pattern:
    parts = []
    for tok in rule.tokens:
        if tok == "*":
            parts.append(".*")
        elif tok == "^":
            parts.append(_SEP_RE)
        else:
            parts.append(re.escape(tok))
    pattern = "".join(parts)
    if Anchor.DOMAIN in rule.anchors:
        pattern = "^" + _HOST_BOUNDARY + pattern
    elif Anchor.START in rule.anchors:
        pattern = "^" + pattern
    if Anchor.END in rule.anchors:
        pattern = pattern + "$"
    return re.compile(pattern)


def _oracle_domain_ok(rule: FilterRule, page_domain: str) -> bool:
    page = page_domain.lower()
    labels = page.split(".")
    suffixes = {".".join(labels[i:]) for i in range(len(labels))}
    if any(d in suffixes for d in rule.exclude_domains):
        return False
    if rule.include_domains:
        return any(d in suffixes for d in rule.include_domains)
    return True


def oracle_rule_matches(rule: FilterRule, url: str, page_domain: str, third_party: bool) -> bool:
    if rule.third_party is not None and rule.third_party != third_party:
        return False
    if not _oracle_domain_ok(rule, page_domain):
        return False
    return rule_to_regex(rule).search(url) is not None


def oracle_matches(filter_set: FilterSet, url: str, page_domain: str, third_party: bool):
    """(verdict, deciding rule raw text or None) by naive regex scan."""
    for rule in filter_set.exceptions:
        if oracle_rule_matches(rule, url, page_domain, third_party):
            return Verdict.ALLOW, rule.raw
    for rule in filter_set.blocking:
        if oracle_rule_matches(rule, url, page_domain, third_party):
            return Verdict.BLOCK, rule.raw
    return Verdict.NO_MATCH, None


def oracle_fit(slot_w: float, slot_h: float, units):
    """Exhaustive enumeration of tilings, same objective as the engine:
    counts bounded by what fits at native size (at least one per axis),
    uniform scale in [0.5, 1.0], maximize covered area; ties prefer larger
    unit area, fewer tiles, more columns."""
    candidates = []
    for unit in units:
        for columns in range(1, 11):
            for rows in range(1, 13):
                if columns > max(1, slot_w // unit.width):
                    continue
                if rows > max(1, slot_h // unit.height):
                    continue
                scale = min(1.0, slot_w / (columns * unit.width), slot_h / (rows * unit.height))
                if scale < 0.5:
                    continue
                covered = columns * rows * unit.width * unit.height * scale * scale
                candidates.append(
                    (
                        (covered, unit.width * unit.height, -(columns * rows), columns),
                        (unit, columns, rows, scale),
                    )
                )
    if not candidates:
        return None
    return max(candidates, key=lambda c: c[0])[1]
