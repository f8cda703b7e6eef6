"""Independent reference for the text-normalization steps.

Covers the oracle corpus only: simple refang by literal replacement, token
classification by obvious shape (scheme prefix, dotted quad, CVE prefix, hex
length, name.tld), and no stemming — corpus words are chosen stem-stable and
the test asserts that. Stopwords come from the shipped data file, which is
the contract, not the implementation.
"""

from __future__ import annotations

import re
from importlib import resources

_REPLACES = [("[://]", "://"), ("[.]", "."), ("(.)", "."), ("[dot]", "."), ("[:]", ":"), ("hxxp", "http")]

_IP = re.compile(r"^(\d{1,3})\.(\d{1,3})\.(\d{1,3})\.(\d{1,3})$")
_HEX = re.compile(r"^[0-9a-f]+$")
_CVE = re.compile(r"^cve-\d{4}-\d{4,}$")
_DOMAIN = re.compile(r"^[a-z0-9-]+(\.[a-z0-9-]+)*\.(com|net|org|io|ru|info)$")

_WORDS = {
    line.strip()
    for line in resources.files("ctikit.data")
    .joinpath("stopwords_en.txt")
    .read_text("utf-8")
    .splitlines()
    if line.strip() and not line.startswith("#")
}


def _simple_refang(token: str) -> str:
    for old, new in _REPLACES:
        token = token.replace(old, new)
    return token


def _marker(token: str) -> str | None:
    if token.startswith(("http://", "https://", "ftp://")):
        return "[url]"
    m = _IP.match(token)
    if m and all(int(g) <= 255 for g in m.groups()):
        return "[ip]"
    if _CVE.match(token):
        return "[cve]"
    if _HEX.match(token) and len(token) in (32, 40, 64, 96, 128):
        return "[hash]"
    if _DOMAIN.match(token):
        return "[domain]"
    return None


def oracle_preprocess(text: str) -> list[str]:
    tokens = text.lower().split()
    tokens = [t for t in tokens if not t.startswith("@")]

    normalized: list[str] = []
    for token in tokens:
        refanged = _simple_refang(token)
        marker = _marker(refanged)
        if marker is not None:
            if refanged != token:
                normalized.append("[defanged]")
            normalized.append(marker)
        else:
            normalized.append(token)

    out: list[str] = []
    for token in normalized:
        if token.startswith("["):
            out.append(token)
            continue
        cleaned = "".join(c for c in token if "a" <= c <= "z")
        if len(cleaned) <= 1:
            continue
        if cleaned in _WORDS:
            continue
        out.append(cleaned)
    return out
