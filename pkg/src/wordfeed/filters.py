"""EasyList-subset filter parsing and URL match decisions.

Supported rule grammar: URL patterns made of literals, ``*`` wildcards and
``^`` separators, with ``||`` / ``|`` anchors, ``@@`` exceptions, and the
option set {``domain=``, ``third-party``, ``~third-party``}. Comment lines
(``!``), section headers (``[...]``), element-hiding lines (``##`` /
``#@#``) and rules carrying any other option are skipped and counted,
never fatal.

Matching is case-sensitive over the raw URL string (hostnames are
lowercased for domain options). ``^`` matches any character that is not
alphanumeric or one of ``_ - . %``, or the end of the URL. Matching walks
the token sequence directly; it deliberately does not go through the
regex engine so tests can cross-check it against a naive
regex-translation oracle.

FilterSet is immutable after parse; matches() is read-only and callable
concurrently.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from enum import Enum
from urllib.parse import urlsplit

# Characters a '^' separator does NOT match.
_SEPARATOR_EXEMPT = frozenset(string.ascii_letters + string.digits + "_-.%")

# Last-two-label suffixes that take a third label as the registrable domain.
# Desk-scale stand-in for a full public-suffix dataset.
_MULTI_LABEL_SUFFIXES = frozenset(
    {
        "co.uk", "org.uk", "ac.uk", "gov.uk", "net.uk",
        "co.jp", "ne.jp", "or.jp", "ac.jp", "go.jp",
        "com.au", "net.au", "org.au", "edu.au", "gov.au",
        "co.nz", "net.nz", "org.nz",
        "com.br", "net.br", "org.br",
        "com.cn", "net.cn", "org.cn",
        "com.mx", "com.ar", "com.tr", "co.kr", "co.in", "co.za",
    }
)

_SUPPORTED_PLAIN_OPTIONS = {"third-party", "~third-party"}


class InvalidUrlError(ValueError):
    """URL missing a scheme or hostname."""


class Verdict(Enum):
    BLOCK = "block"
    ALLOW = "allow"
    NO_MATCH = "no_match"


class Anchor(Enum):
    START = "start"    # leading '|'
    DOMAIN = "domain"  # leading '||'
    END = "end"        # trailing '|'


@dataclass(frozen=True)
class FilterRule:
    """One parsed filter: anchored token pattern plus supported options."""

    raw: str
    exception: bool
    anchors: frozenset[Anchor]
    # Token sequence: "*" and "^" entries are wildcard/separator markers,
    # every other entry is a literal run.
    tokens: tuple[str, ...]
    include_domains: frozenset[str] = frozenset()
    exclude_domains: frozenset[str] = frozenset()
    third_party: bool | None = None  # None = applies either way


@dataclass(frozen=True)
class FilterSet:
    blocking: tuple[FilterRule, ...]
    exceptions: tuple[FilterRule, ...]
    skipped: int

    def __len__(self) -> int:
        return len(self.blocking) + len(self.exceptions)


@dataclass(frozen=True)
class MatchDecision:
    verdict: Verdict
    rule: FilterRule | None = None


@dataclass(frozen=True)
class PageElement:
    """A page element candidate for replacement. Dimensions feed layout,
    not the ad verdict."""

    src_url: str
    page_url: str
    width: int = 0
    height: int = 0


def _tokenize(pattern: str) -> tuple[str, ...]:
    tokens: list[str] = []
    literal: list[str] = []
    for ch in pattern:
        if ch in "*^":
            if literal:
                tokens.append("".join(literal))
                literal.clear()
            # collapse runs of '*'
            if ch == "*" and tokens and tokens[-1] == "*":
                continue
            tokens.append(ch)
        else:
            literal.append(ch)
    if literal:
        tokens.append("".join(literal))
    return tuple(tokens)


def _parse_options(text: str) -> tuple[frozenset[str], frozenset[str], bool | None] | None:
    """Parse a '$'-option list; None when any option is unsupported."""
    include: set[str] = set()
    exclude: set[str] = set()
    third_party: bool | None = None
    for opt in text.split(","):
        opt = opt.strip()
        if opt in _SUPPORTED_PLAIN_OPTIONS:
            third_party = not opt.startswith("~")
        elif opt.startswith("domain="):
            domains = opt[len("domain="):]
            if not domains:
                return None
            for dom in domains.split("|"):
                dom = dom.strip().lower()
                if not dom.lstrip("~"):
                    return None
                if dom.startswith("~"):
                    exclude.add(dom[1:])
                else:
                    include.add(dom)
        else:
            return None
    if include & exclude:
        # Contradictory list; refuse rather than guess.
        return None
    return frozenset(include), frozenset(exclude), third_party


def parse_rule(line: str) -> FilterRule | None:
    """Parse one filter line. None means the line is skipped (unsupported)."""
    raw = line
    if line.startswith("!") or line.startswith("["):
        return None
    if "##" in line or "#@#" in line:
        return None
    exception = line.startswith("@@")
    if exception:
        line = line[2:]

    include: frozenset[str] = frozenset()
    exclude: frozenset[str] = frozenset()
    third_party: bool | None = None
    if "$" in line:
        line, opts_text = line.rsplit("$", 1)
        parsed = _parse_options(opts_text)
        if parsed is None:
            return None
        include, exclude, third_party = parsed

    anchors: set[Anchor] = set()
    if line.endswith("|"):
        anchors.add(Anchor.END)
        line = line[:-1]
    if line.startswith("||"):
        anchors.add(Anchor.DOMAIN)
        line = line[2:]
    elif line.startswith("|"):
        anchors.add(Anchor.START)
        line = line[1:]

    tokens = _tokenize(line)
    if not tokens:
        return None
    return FilterRule(
        raw=raw,
        exception=exception,
        anchors=frozenset(anchors),
        tokens=tokens,
        include_domains=include,
        exclude_domains=exclude,
        third_party=third_party,
    )


def parse_filter_list(text: str) -> FilterSet:
    """Parse filter-list text. Total: every non-blank line becomes either a
    rule or a unit of `skipped`; parsing never fails."""
    blocking: list[FilterRule] = []
    exceptions: list[FilterRule] = []
    skipped = 0
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        rule = parse_rule(line)
        if rule is None:
            skipped += 1
        elif rule.exception:
            exceptions.append(rule)
        else:
            blocking.append(rule)
    return FilterSet(blocking=tuple(blocking), exceptions=tuple(exceptions), skipped=skipped)


def load_filter_file(path) -> FilterSet:
    with open(path, encoding="utf-8") as fh:
        return parse_filter_list(fh.read())


def split_url(url: str):
    """urlsplit that insists on an absolute URL with a hostname."""
    parts = urlsplit(url)
    if not parts.scheme or not parts.hostname:
        raise InvalidUrlError(f"not an absolute URL: {url!r}")
    return parts


def _hostname_start_positions(url: str) -> list[int]:
    """Indices in `url` where a hostname label begins (for '||' anchoring)."""
    parts = split_url(url)
    sep = url.find("://")
    if sep < 0:
        raise InvalidUrlError(f"not an absolute URL: {url!r}")
    netloc_start = sep + 3
    netloc = parts.netloc
    at = netloc.rfind("@")
    host_start = netloc_start + at + 1  # at == -1 leaves netloc_start
    host = parts.hostname or ""
    positions = [host_start]
    for i, ch in enumerate(url[host_start : host_start + len(host)]):
        if ch == ".":
            positions.append(host_start + i + 1)
    return positions


def _match_from(url: str, i: int, tokens: tuple[str, ...], k: int, must_end: bool) -> bool:
    if k == len(tokens):
        return i == len(url) if must_end else True
    tok = tokens[k]
    if tok == "*":
        for j in range(i, len(url) + 1):
            if _match_from(url, j, tokens, k + 1, must_end):
                return True
        return False
    if tok == "^":
        if i == len(url):
            # Separator also matches the end of the URL, consuming nothing.
            return _match_from(url, i, tokens, k + 1, must_end)
        if url[i] not in _SEPARATOR_EXEMPT:
            return _match_from(url, i + 1, tokens, k + 1, must_end)
        return False
    if url.startswith(tok, i):
        return _match_from(url, i + len(tok), tokens, k + 1, must_end)
    return False


def _pattern_hits(rule: FilterRule, url: str) -> bool:
    must_end = Anchor.END in rule.anchors
    if Anchor.DOMAIN in rule.anchors:
        starts = _hostname_start_positions(url)
    elif Anchor.START in rule.anchors:
        starts = [0]
    else:
        starts = range(len(url) + 1)
    return any(_match_from(url, s, rule.tokens, 0, must_end) for s in starts)


def _domain_applies(rule: FilterRule, page_domain: str) -> bool:
    page = page_domain.lower()

    def under(dom: str) -> bool:
        return page == dom or page.endswith("." + dom)

    if any(under(d) for d in rule.exclude_domains):
        return False
    if rule.include_domains:
        return any(under(d) for d in rule.include_domains)
    return True


def rule_matches(rule: FilterRule, url: str, page_domain: str, third_party: bool) -> bool:
    if rule.third_party is not None and rule.third_party != third_party:
        return False
    if not _domain_applies(rule, page_domain):
        return False
    return _pattern_hits(rule, url)


def matches(filter_set: FilterSet, url: str, page_domain: str, third_party: bool) -> MatchDecision:
    """Decide whether `url` is blocked. Exceptions are scanned first; the
    first matching rule in list order decides. Deterministic."""
    split_url(url)  # validate eagerly, even against an empty set
    for rule in filter_set.exceptions:
        if rule_matches(rule, url, page_domain, third_party):
            return MatchDecision(Verdict.ALLOW, rule)
    for rule in filter_set.blocking:
        if rule_matches(rule, url, page_domain, third_party):
            return MatchDecision(Verdict.BLOCK, rule)
    return MatchDecision(Verdict.NO_MATCH, None)


def registrable_domain(host: str) -> str:
    """Approximate registrable domain: last two labels, or three when the
    final two form a listed multi-label suffix (co.uk and friends)."""
    labels = host.lower().strip(".").split(".")
    if len(labels) <= 2:
        return ".".join(labels)
    take = 3 if ".".join(labels[-2:]) in _MULTI_LABEL_SUFFIXES else 2
    return ".".join(labels[-take:])


def classify_element(filter_set: FilterSet, element: PageElement) -> bool:
    """True iff the element's source URL should be replaced.

    third_party is computed from the registrable domains of the source and
    page URLs; element dimensions play no part in the verdict.
    """
    src = split_url(element.src_url)
    page = split_url(element.page_url)
    third_party = registrable_domain(src.hostname) != registrable_domain(page.hostname)
    decision = matches(filter_set, element.src_url, page.hostname, third_party)
    return decision.verdict is Verdict.BLOCK
