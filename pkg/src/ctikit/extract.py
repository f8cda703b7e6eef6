"""IoC extraction: refang, classify, filter, and deduplicate indicators.

Works on whole posts (``extract_iocs``) and on bare strings (``ioc_spans``,
``classify``), so the text-normalization pipeline can reuse the exact same
patterns. Emitted values are always refanged/canonical.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Iterable, Optional
from urllib.parse import urlsplit

from .model import HASH_LENGTHS, IocRecord, IocType, PostRecord, hash_type_for

# Defang rewrites, applied repeatedly until the text stops changing so the
# result is a fixed point (refang(refang(s)) == refang(s) for any s).
_REFANG_RULES: list[tuple[re.Pattern, str]] = [
    (re.compile(re.escape("[://]")), "://"),
    (re.compile(re.escape("[.]")), "."),
    (re.compile(re.escape("(.)")), "."),
    (re.compile(re.escape("[dot]"), re.IGNORECASE), "."),
    (re.compile(re.escape("[:]")), ":"),
    (re.compile(re.escape("[at]"), re.IGNORECASE), "@"),
    (re.compile(re.escape("[@]")), "@"),
    (re.compile("hxxp", re.IGNORECASE), "http"),
]

URL_RE = re.compile(r"(?:https?|ftp)://[^\s<>\"']+", re.IGNORECASE)
IPV4_RE = re.compile(r"(?<![\d.])(?:\d{1,3}\.){3}\d{1,3}(?![\d.])")
CVE_RE = re.compile(r"(?<![\w-])CVE-\d{4}-\d{4,}(?![\w-])", re.IGNORECASE)
HEX_RE = re.compile(r"(?<![0-9a-fA-F])[0-9a-fA-F]{32,128}(?![0-9a-fA-F])")
DOMAIN_RE = re.compile(
    r"(?<![\w.-])"
    r"((?:[a-z0-9](?:[a-z0-9-]{0,61}[a-z0-9])?\.)+([a-z]{2,24}))"
    r"(?!\w|-|\.\w)",
    re.IGNORECASE,
)

# Trailing sentence punctuation is never part of a URL.
_TRAIL_PUNCT = ".,;:!?'\")]}>"

DEFAULT_EXCLUDED_HOSTS = frozenset(
    {
        "twitter.com",
        "facebook.com",
        "fb.me",
        "m.facebook.com",
        "mbasic.facebook.com",
        "youtube.com",
        "youtu.be",
        "reddit.com",
    }
)


def _load_tlds() -> frozenset[str]:
    text = resources.files("ctikit.data").joinpath("tlds.txt").read_text("utf-8")
    return frozenset(
        line.strip().lower() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


DEFAULT_TLDS = _load_tlds()


def load_tld_file(path: str) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(
            line.strip().lower() for line in fh if line.strip() and not line.startswith("#")
        )


def refang(text: str) -> str:
    """Rewrite defanged IoC notation back to its canonical form.

    hxxp -> http, "[.]"/"(.)"/"[dot]" -> ".", "[:]" -> ":", "[at]"/"[@]" -> "@",
    "[://]" -> "://". Everything else is left untouched.
    """
    current = text
    # Every pass that changes the text shrinks it (except a single
    # equal-length hxxp pass), so len + 2 passes always reach the fixpoint,
    # even for nested forms like "[[dot]]".
    for _ in range(len(text) + 2):
        previous = current
        for pattern, repl in _REFANG_RULES:
            current = pattern.sub(repl, current)
        if current == previous:
            break
    return current


@dataclass(frozen=True)
class ExclusionList:
    """Host suffixes whose URLs are never useful indicators."""

    blocked_suffixes: frozenset[str] = DEFAULT_EXCLUDED_HOSTS

    @classmethod
    def from_file(cls, path: str) -> "ExclusionList":
        with open(path, encoding="utf-8") as fh:
            suffixes = frozenset(
                line.strip().lower() for line in fh if line.strip() and not line.startswith("#")
            )
        return cls(blocked_suffixes=suffixes)

    def blocks_url(self, url: str) -> bool:
        try:
            host = urlsplit(url).hostname
        except ValueError:
            return False
        if not host:
            return False
        host = host.lower()
        # Match on registrable-host boundaries: "www.twitter.com" is blocked
        # by "twitter.com", "nottwitter.com" is not.
        for suffix in self.blocked_suffixes:
            if host == suffix or host.endswith("." + suffix):
                return True
        return False


@dataclass(frozen=True)
class IocSpan:
    start: int
    end: int
    value: str
    ioc_type: IocType


def ioc_spans(text: str, tlds: frozenset[str] = DEFAULT_TLDS) -> list[IocSpan]:
    """Locate all indicators in already-refanged text, ordered by position.

    URLs claim their span first, so hosts embedded in a URL are never
    re-reported as Domain or Ip indicators.
    """
    taken = [False] * len(text)
    spans: list[IocSpan] = []

    def free(start: int, end: int) -> bool:
        return not any(taken[start:end])

    def claim(start: int, end: int, value: str, ioc_type: IocType) -> None:
        for i in range(start, end):
            taken[i] = True
        spans.append(IocSpan(start, end, value, ioc_type))

    for m in URL_RE.finditer(text):
        value = m.group(0).rstrip(_TRAIL_PUNCT)
        if len(value) <= len("http://"):
            continue
        claim(m.start(), m.start() + len(value), value, IocType.URL)

    for m in IPV4_RE.finditer(text):
        if free(m.start(), m.end()) and _valid_ipv4(m.group(0)):
            claim(m.start(), m.end(), m.group(0), IocType.IP)

    for m in CVE_RE.finditer(text):
        if free(m.start(), m.end()):
            claim(m.start(), m.end(), m.group(0).upper(), IocType.CVE)

    for m in HEX_RE.finditer(text):
        if free(m.start(), m.end()) and len(m.group(0)) in HASH_LENGTHS:
            claim(m.start(), m.end(), m.group(0).lower(), hash_type_for(m.group(0)))

    for m in DOMAIN_RE.finditer(text):
        if free(m.start(1), m.end(1)) and m.group(2).lower() in tlds:
            claim(m.start(1), m.end(1), m.group(1).lower(), IocType.DOMAIN)

    spans.sort(key=lambda s: s.start)
    return spans


def _valid_ipv4(candidate: str) -> bool:
    parts = candidate.split(".")
    return len(parts) == 4 and all(int(p) <= 255 for p in parts)


def classify(value: str, tlds: frozenset[str] = DEFAULT_TLDS) -> Optional[IocType]:
    """IocType a bare string parses as, or None."""
    if URL_RE.fullmatch(value):
        return IocType.URL
    if IPV4_RE.fullmatch(value) and _valid_ipv4(value):
        return IocType.IP
    if CVE_RE.fullmatch(value):
        return IocType.CVE
    if HEX_RE.fullmatch(value) and len(value) in HASH_LENGTHS:
        return hash_type_for(value)
    m = DOMAIN_RE.fullmatch(value)
    if m and m.group(2).lower() in tlds:
        return IocType.DOMAIN
    return None


def contains_url(text: str) -> bool:
    return bool(URL_RE.search(refang(text)))


def extract_iocs(
    post: PostRecord,
    exclusions: ExclusionList = ExclusionList(),
    tlds: frozenset[str] = DEFAULT_TLDS,
    url_resolver: Optional[Callable[[str], str]] = None,
) -> list[IocRecord]:
    """All indicators in one post: refanged text matches plus URL entities.

    A value is flagged defanged when its canonical form does not occur in
    the raw text (case-insensitively, so case canonicalization alone never
    counts as defanging). Within a post, repeated (value, type) pairs
    collapse to the first occurrence. ``url_resolver`` optionally expands
    shortened URLs before exclusion filtering; it is off by default since
    archives usually carry pre-expanded URLs.
    """
    refanged = refang(post.text)
    raw_lower = post.text.lower()
    seen: set[tuple[str, str]] = set()
    records: list[IocRecord] = []

    def add(value: str, ioc_type: IocType, was_defanged: bool) -> None:
        if ioc_type is IocType.URL and url_resolver is not None:
            value = url_resolver(value)
        if ioc_type is IocType.URL and exclusions.blocks_url(value):
            return
        key = (value, ioc_type.value)
        if key in seen:
            return
        seen.add(key)
        records.append(
            IocRecord(
                user_name=post.author_id,
                published_date=post.created_at,
                ioc_value=value,
                ioc_type=ioc_type,
                hashtags=post.hashtags,
                tweet_url=_status_url(post),
                was_defanged=was_defanged,
            )
        )

    for span in ioc_spans(refanged, tlds=tlds):
        add(span.value, span.ioc_type, was_defanged=span.value.lower() not in raw_lower)

    for url in post.urls:
        canonical = refang(url).rstrip(_TRAIL_PUNCT)
        if URL_RE.fullmatch(canonical):
            add(canonical, IocType.URL, was_defanged=False)

    return records


def _status_url(post: PostRecord) -> str:
    return f"https://twitter.com/{post.author_id}/status/{post.post_id}"


def dedup_iocs(records: Iterable[IocRecord]) -> list[IocRecord]:
    """Chronological order, earliest record kept per (value, type)."""
    ordered = sorted(
        records,
        key=lambda r: (r.published_date, r.ioc_value, r.ioc_type.value, r.user_name, r.tweet_url),
    )
    seen: set[tuple[str, str]] = set()
    unique: list[IocRecord] = []
    for record in ordered:
        if record.key in seen:
            continue
        seen.add(record.key)
        unique.append(record)
    return unique
