"""Shared builders for domain records."""

from __future__ import annotations

from datetime import datetime, timezone

import pytest

from ctikit.model import AccountProfile, IocRecord, IocType, PostRecord


def ts(text: str) -> datetime:
    """'2021-01-05' or '2021-01-05 12:30:00' to tz-aware UTC."""
    if len(text) == 10:
        text += " 00:00:00"
    return datetime.strptime(text, "%Y-%m-%d %H:%M:%S").replace(tzinfo=timezone.utc)


def make_post(post_id="p1", author_id="alice", text="hello world", created="2021-01-05 12:00:00", **kw) -> PostRecord:
    return PostRecord(post_id=post_id, author_id=author_id, text=text, created_at=ts(created), **kw)


def make_account(author_id="alice", followers=100, following=50, **kw) -> AccountProfile:
    defaults = dict(
        listed_count=5,
        description="infosec things",
        has_profile_image=True,
        protected=False,
        verified=False,
        created_at=ts("2020-01-01"),
        snapshot_at=ts("2021-06-30"),
    )
    defaults.update(kw)
    return AccountProfile(
        author_id=author_id, followers_count=followers, following_count=following, **defaults
    )


def make_ioc(value="http://evil.example/x", ioc_type=IocType.URL, user="alice", created="2021-01-05", **kw) -> IocRecord:
    return IocRecord(
        user_name=user, published_date=ts(created), ioc_value=value, ioc_type=ioc_type, **kw
    )


@pytest.fixture
def post_factory():
    return make_post


@pytest.fixture
def account_factory():
    return make_account
