"""Eight-step text normalization turning a raw post into classifier tokens.

Steps, in order: lowercase, mention removal, IoC normalization to marker
tokens (defanged indicators additionally emit "[defanged]"), non-alphabetic
character removal, single-character token removal, suffix stemming, stopword
removal.
"""

from __future__ import annotations

import re
from importlib import resources

from .extract import ioc_spans, refang

URL_MARKER = "[url]"
IP_MARKER = "[ip]"
DOMAIN_MARKER = "[domain]"
CVE_MARKER = "[cve]"
HASH_MARKER = "[hash]"
DEFANGED_MARKER = "[defanged]"

MARKERS = frozenset({URL_MARKER, IP_MARKER, DOMAIN_MARKER, CVE_MARKER, HASH_MARKER, DEFANGED_MARKER})

_FAMILY_MARKERS = {
    "url": URL_MARKER,
    "ip": IP_MARKER,
    "domain": DOMAIN_MARKER,
    "cve": CVE_MARKER,
    "hash": HASH_MARKER,
}

_NON_ALPHA = re.compile(r"[^a-z]+")
_VOWELS = set("aeiou")


def is_marker(token: str) -> bool:
    return token in MARKERS


def _has_vowel(word: str) -> bool:
    return any(c in _VOWELS for c in word)


def _strip_one_suffix(word: str) -> str:
    """Apply the first matching suffix rule, or return the word unchanged."""
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies") and len(word) >= 5:
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s") and len(word) >= 4:
        return word[:-1]
    if word.endswith("eed") and len(word) >= 5:
        return word[:-1]
    if word.endswith("ed") and len(word) >= 5 and _has_vowel(word[:-2]):
        return _undouble(word[:-2])
    if word.endswith("ing") and len(word) >= 6 and _has_vowel(word[:-3]):
        return _undouble(word[:-3])
    if word.endswith("ational") and len(word) >= 9:
        return word[:-5] + "e"
    if word.endswith("tional") and len(word) >= 8:
        return word[:-2]
    if word.endswith("ization") and len(word) >= 9:
        return word[:-5] + "e"
    if word.endswith("fulness") or word.endswith("ousness") or word.endswith("iveness"):
        return word[:-4]
    if word.endswith("ment") and len(word) >= 7:
        return word[:-4]
    if word.endswith("ness") and len(word) >= 7:
        return word[:-4]
    if word.endswith("ly") and len(word) >= 5:
        return word[:-2]
    return word


def _undouble(word: str) -> str:
    if len(word) >= 3 and word[-1] == word[-2] and word[-1] not in "lsz" and word[-1] not in _VOWELS:
        return word[:-1]
    return word


def stem(word: str) -> str:
    """Suffix-stripping stemmer, iterated to a fixed point.

    The fixed point makes the whole pipeline idempotent; linguistic fidelity
    is secondary to producing the same token for related word forms. Every
    applied rule shortens the word, so len(word) iterations always suffice.
    """
    current = word
    for _ in range(len(word) + 1):
        stripped = _strip_one_suffix(current)
        if stripped == current or len(stripped) < 2:
            break
        current = stripped
    return current


def _load_stopwords() -> frozenset[str]:
    text = resources.files("ctikit.data").joinpath("stopwords_en.txt").read_text("utf-8")
    words = {line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")}
    # Removal happens after stemming, so the set must be closed under stem().
    return frozenset(words) | frozenset(stem(w) for w in words)


STOPWORDS = _load_stopwords()


def preprocess(text: str) -> list[str]:
    """Normalize one post's text to a classifier token sequence."""
    lowered = text.lower()

    pieces: list[tuple[bool, str]] = []  # (is_marker, token)
    for raw_token in lowered.split():
        if raw_token.startswith("@"):
            continue
        refanged = refang(raw_token)
        spans = ioc_spans(refanged)
        if not spans:
            pieces.append((False, raw_token))
            continue
        was_defanged = refanged != raw_token
        cursor = 0
        for span in spans:
            if span.start > cursor:
                pieces.append((False, refanged[cursor : span.start]))
            if was_defanged:
                pieces.append((True, DEFANGED_MARKER))
            pieces.append((True, _FAMILY_MARKERS[span.ioc_type.family.value]))
            cursor = span.end
        if cursor < len(refanged):
            pieces.append((False, refanged[cursor:]))

    tokens: list[str] = []
    for marker, token in pieces:
        if marker:
            tokens.append(token)
            continue
        cleaned = _NON_ALPHA.sub("", token)
        if len(cleaned) <= 1:
            continue
        stemmed = stem(cleaned)
        if stemmed in STOPWORDS:
            continue
        tokens.append(stemmed)
    return tokens
