"""Archive loading and corpus hygiene: language filter, retweet removal,
chronological deduplication."""

from __future__ import annotations

import gzip
import json
import logging
from dataclasses import dataclass
from typing import Iterable

from .model import PostRecord

log = logging.getLogger(__name__)


class ArchiveError(Exception):
    """A line of the archive could not be parsed."""

    def __init__(self, path: str, line_number: int, fragment: str, reason: str) -> None:
        self.path = path
        self.line_number = line_number
        self.fragment = fragment
        super().__init__(f"{path}:{line_number}: {reason} (line starts {fragment!r})")


@dataclass(frozen=True)
class ArchiveStats:
    """Funnel counters for one filtering pass."""

    total_read: int
    non_matching_lang_dropped: int
    retweets_dropped: int
    duplicates_dropped: int
    retained: int

    def __post_init__(self) -> None:
        expected = (
            self.total_read
            - self.non_matching_lang_dropped
            - self.retweets_dropped
            - self.duplicates_dropped
        )
        if self.retained != expected:
            raise ValueError(f"stats do not balance: retained {self.retained} != {expected}")

    def to_dict(self) -> dict[str, int]:
        return {
            "total_read": self.total_read,
            "non_matching_lang_dropped": self.non_matching_lang_dropped,
            "retweets_dropped": self.retweets_dropped,
            "duplicates_dropped": self.duplicates_dropped,
            "retained": self.retained,
        }


def _open_text(path: str):
    if path.endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def load_archive(path: str, strict: bool = True) -> list[PostRecord]:
    """Read a JSONL (optionally gzipped) post archive in file order.

    In strict mode a malformed line raises ArchiveError naming the line;
    otherwise the line is logged with its number and skipped.
    """
    records: list[PostRecord] = []
    with _open_text(path) as fh:
        for line_number, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                data = json.loads(stripped)
                if not isinstance(data, dict):
                    raise ValueError("line is not a JSON object")
                if str(data.get("schema", "")).startswith("ctikit."):
                    continue  # self-description header line
                records.append(PostRecord.from_dict(data))
            except (ValueError, KeyError, TypeError, AttributeError) as exc:
                if strict:
                    raise ArchiveError(path, line_number, stripped[:80], str(exc)) from exc
                log.warning("%s:%d: skipping malformed line (%s)", path, line_number, exc)
    return records


def is_retweet_post(post: PostRecord) -> bool:
    """Archive flag or the conventional "RT @" text prefix; either counts."""
    return post.is_retweet or post.text.startswith("RT @")


def filter_corpus(
    posts: Iterable[PostRecord], lang: str = "en"
) -> tuple[list[PostRecord], ArchiveStats]:
    """Keep original posts in one language, chronologically deduplicated.

    Output is sorted ascending by (created_at, post_id); of posts sharing
    identical raw text only the chronologically first survives.
    """
    posts = list(posts)
    total = len(posts)

    by_lang = [p for p in posts if p.lang == lang]
    lang_dropped = total - len(by_lang)

    originals = [p for p in by_lang if not is_retweet_post(p)]
    retweets_dropped = len(by_lang) - len(originals)

    originals.sort(key=lambda p: (p.created_at, p.post_id))
    seen_texts: set[str] = set()
    retained: list[PostRecord] = []
    for post in originals:
        if post.text in seen_texts:
            continue
        seen_texts.add(post.text)
        retained.append(post)
    duplicates_dropped = len(originals) - len(retained)

    stats = ArchiveStats(
        total_read=total,
        non_matching_lang_dropped=lang_dropped,
        retweets_dropped=retweets_dropped,
        duplicates_dropped=duplicates_dropped,
        retained=len(retained),
    )
    return retained, stats
