"""Shared domain types and canonical JSON serialization.

All types are immutable value objects, safe to share across threads.
JSON Lines (one record per line) is the interchange format for datasets;
``canonical_serialize`` guarantees byte-identical output for equal values.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from enum import Enum
from typing import Any

TIMESTAMP_FMT = "%Y-%m-%dT%H:%M:%SZ"

# Hex-digest length determines the hash flavour; nothing else does.
HASH_LENGTHS = {32: "md5", 40: "sha1", 64: "sha256", 96: "sha3_384", 128: "sha512"}


class IocType(Enum):
    """Kinds of indicators the pipeline extracts and enriches."""

    URL = "url"
    IP = "ip"
    DOMAIN = "domain"
    MD5 = "md5"
    SHA1 = "sha1"
    SHA256 = "sha256"
    SHA3_384 = "sha3_384"
    SHA512 = "sha512"
    CVE = "cve"

    @property
    def is_hash(self) -> bool:
        return self.value in HASH_LENGTHS.values()

    @property
    def family(self) -> "IocFamily":
        if self.is_hash:
            return IocFamily.HASH
        return IocFamily(self.value)


class IocFamily(Enum):
    """Five-way grouping used by service acceptance and reporting."""

    URL = "url"
    IP = "ip"
    DOMAIN = "domain"
    HASH = "hash"
    CVE = "cve"


def hash_type_for(hex_digest: str) -> IocType:
    """Classify a hex digest by length (32/40/64/96/128)."""
    try:
        return IocType(HASH_LENGTHS[len(hex_digest)])
    except KeyError:
        raise ValueError(f"no hash type for digest of length {len(hex_digest)}") from None


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp to tz-aware UTC, truncated to seconds."""
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0).strftime(TIMESTAMP_FMT)


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


@dataclass(frozen=True)
class PostRecord:
    """One social-media post with author, entities, and engagement counts."""

    post_id: str
    author_id: str
    text: str
    created_at: datetime
    lang: str = "en"
    is_retweet: bool = False
    source_label: str = ""
    hashtags: tuple[str, ...] = ()
    mentions: tuple[str, ...] = ()
    urls: tuple[str, ...] = ()
    like_count: int = 0
    quote_count: int = 0
    reply_count: int = 0
    retweet_count: int = 0

    def __post_init__(self) -> None:
        _require(bool(self.post_id), "post_id must be non-empty")
        for name in ("like_count", "quote_count", "reply_count", "retweet_count"):
            _require(getattr(self, name) >= 0, f"{name} must be >= 0")
        object.__setattr__(self, "text", nfc(self.text))
        object.__setattr__(self, "source_label", nfc(self.source_label))
        object.__setattr__(self, "created_at", _as_utc_seconds(self.created_at))
        # Hashtags are set-valued: canonical order, no duplicates. Mentions
        # keep order and multiplicity (mention counts are features downstream).
        object.__setattr__(self, "hashtags", tuple(sorted({nfc(h) for h in self.hashtags})))
        object.__setattr__(self, "mentions", tuple(nfc(m) for m in self.mentions))
        object.__setattr__(self, "urls", tuple(self.urls))

    def to_dict(self) -> dict[str, Any]:
        return {
            "post_id": self.post_id,
            "author_id": self.author_id,
            "text": self.text,
            "created_at": format_timestamp(self.created_at),
            "lang": self.lang,
            "is_retweet": self.is_retweet,
            "source_label": self.source_label,
            "hashtags": list(self.hashtags),
            "mentions": list(self.mentions),
            "urls": list(self.urls),
            "like_count": self.like_count,
            "quote_count": self.quote_count,
            "reply_count": self.reply_count,
            "retweet_count": self.retweet_count,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PostRecord":
        return cls(
            post_id=data["post_id"],
            author_id=data["author_id"],
            text=data["text"],
            created_at=parse_timestamp(data["created_at"]),
            lang=data.get("lang", "en"),
            is_retweet=bool(data.get("is_retweet", False)),
            source_label=data.get("source_label", ""),
            hashtags=tuple(data.get("hashtags", ())),
            mentions=tuple(data.get("mentions", ())),
            urls=tuple(data.get("urls", ())),
            like_count=int(data.get("like_count", 0)),
            quote_count=int(data.get("quote_count", 0)),
            reply_count=int(data.get("reply_count", 0)),
            retweet_count=int(data.get("retweet_count", 0)),
        )


@dataclass(frozen=True)
class AccountProfile:
    """Point-in-time snapshot of a posting account's profile."""

    author_id: str
    followers_count: int
    following_count: int
    listed_count: int
    description: str
    has_profile_image: bool
    protected: bool
    verified: bool
    created_at: datetime
    snapshot_at: datetime

    def __post_init__(self) -> None:
        _require(bool(self.author_id), "author_id must be non-empty")
        for name in ("followers_count", "following_count", "listed_count"):
            _require(getattr(self, name) >= 0, f"{name} must be >= 0")
        object.__setattr__(self, "description", nfc(self.description))
        object.__setattr__(self, "created_at", _as_utc_seconds(self.created_at))
        object.__setattr__(self, "snapshot_at", _as_utc_seconds(self.snapshot_at))
        _require(self.snapshot_at >= self.created_at, "snapshot_at must be >= created_at")

    def to_dict(self) -> dict[str, Any]:
        return {
            "author_id": self.author_id,
            "followers_count": self.followers_count,
            "following_count": self.following_count,
            "listed_count": self.listed_count,
            "description": self.description,
            "has_profile_image": self.has_profile_image,
            "protected": self.protected,
            "verified": self.verified,
            "created_at": format_timestamp(self.created_at),
            "snapshot_at": format_timestamp(self.snapshot_at),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "AccountProfile":
        return cls(
            author_id=data["author_id"],
            followers_count=int(data["followers_count"]),
            following_count=int(data["following_count"]),
            listed_count=int(data["listed_count"]),
            description=data.get("description", ""),
            has_profile_image=bool(data.get("has_profile_image", True)),
            protected=bool(data.get("protected", False)),
            verified=bool(data.get("verified", False)),
            created_at=parse_timestamp(data["created_at"]),
            snapshot_at=parse_timestamp(data["snapshot_at"]),
        )


@dataclass(frozen=True)
class IocRecord:
    """One extracted indicator with its provenance."""

    user_name: str
    published_date: datetime
    ioc_value: str
    ioc_type: IocType
    hashtags: tuple[str, ...] = ()
    tweet_url: str = ""
    was_defanged: bool = False

    def __post_init__(self) -> None:
        _require(bool(self.ioc_value), "ioc_value must be non-empty")
        for marker in ("[.]", "hxxp"):
            _require(marker not in self.ioc_value, f"ioc_value not canonical: contains {marker!r}")
        object.__setattr__(self, "published_date", _as_utc_seconds(self.published_date))
        object.__setattr__(self, "hashtags", tuple(sorted({nfc(h) for h in self.hashtags})))

    @property
    def key(self) -> tuple[str, str]:
        """Dataset-uniqueness key."""
        return (self.ioc_value, self.ioc_type.value)

    def to_dict(self) -> dict[str, Any]:
        return {
            "user_name": self.user_name,
            "published_date": format_timestamp(self.published_date),
            "ioc_value": self.ioc_value,
            "ioc_type": self.ioc_type.value,
            "hashtags": list(self.hashtags),
            "tweet_url": self.tweet_url,
            "was_defanged": self.was_defanged,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "IocRecord":
        return cls(
            user_name=data["user_name"],
            published_date=parse_timestamp(data["published_date"]),
            ioc_value=data["ioc_value"],
            ioc_type=IocType(data["ioc_type"]),
            hashtags=tuple(data.get("hashtags", ())),
            tweet_url=data.get("tweet_url", ""),
            was_defanged=bool(data.get("was_defanged", False)),
        )


def _as_utc_seconds(dt: datetime) -> datetime:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def canonical_serialize(record: Any) -> bytes:
    """Deterministic byte form of any domain record (sorted keys, UTC-second timestamps)."""
    return canonical_json(record.to_dict())


def canonical_json(data: Any) -> bytes:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def dataclass_field_names(cls: type) -> list[str]:
    return [f.name for f in fields(cls)]
