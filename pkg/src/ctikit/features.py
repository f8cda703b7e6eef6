"""Account feature engineering: 11 profile, 20 content, and 16 temporal
features computed from a profile snapshot plus the account's post timeline.

Conventions for degenerate inputs (documented here once, mirrored by tests):
zero following makes the follower ratio equal the follower count; account age
is at least one day; tweet-denominated ratios are zero when the account never
tweeted; interval families with fewer than two events contribute zeros; a
zero interval spread makes burstiness equal the offset constant.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, fields
from statistics import fmean, pstdev
from typing import Iterable, Sequence

from .extract import contains_url
from .ingest import is_retweet_post
from .model import AccountProfile, PostRecord

BURSTINESS_OFFSET = 1.0  # keeps burstiness in [0, 2]
DEFAULT_ENTROPY_BINS = 10
DEFAULT_SIMILARITY_CAP = 200  # cosine similarity is O(n^2) in posts


@dataclass(frozen=True)
class Timeline:
    """One account's profile snapshot plus its chronologically sorted posts."""

    account: AccountProfile
    posts: tuple[PostRecord, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "posts", tuple(self.posts))
        for post in self.posts:
            if post.author_id != self.account.author_id:
                raise ValueError(f"post {post.post_id} belongs to another author")
        stamps = [p.created_at for p in self.posts]
        if stamps != sorted(stamps):
            raise ValueError("timeline posts must be sorted ascending by created_at")


@dataclass(frozen=True)
class FeatureVector:
    """The 47 named account features, in canonical column order."""

    # profile
    nFoS: float
    nF: float
    rFF: float
    nList: float
    lDesc: float
    proImage: float
    age: float
    rListAge: float
    Rep: float
    Pro: float
    Ver: float
    # content
    nTweet: float
    nRT: float
    mean_len: float
    sd_len: float
    mean_url_posts: float
    nWord: float
    nDigitTweet: float
    rMn: float
    rUMn: float
    rHashPost: float
    rURLPost: float
    rRTPost: float
    rUPost: float
    mean_like: float
    mean_quote: float
    mean_reply: float
    mean_retweet: float
    nSoc: float
    rSoc: float
    similarity: float
    # temporal
    nPostperDay: float
    max_time_tweets: float
    max_time_retweets: float
    max_time_posts: float
    min_time_tweets: float
    min_time_retweets: float
    min_time_posts: float
    mean_time_tweets: float
    mean_time_retweets: float
    mean_time_posts: float
    sd_time_tweets: float
    sd_time_retweets: float
    sd_time_posts: float
    IH: float
    timePattern: float
    burstiness: float

    def values(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in FEATURE_NAMES)

    def to_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in FEATURE_NAMES}


FEATURE_NAMES: tuple[str, ...] = tuple(f.name for f in fields(FeatureVector))
FEATURE_COUNT = len(FEATURE_NAMES)


def tweet_similarity(texts: Sequence[str]) -> float:
    """Mean pairwise cosine similarity over term-frequency vectors.

    Distinct unordered pairs only; fewer than two texts scores 0 by
    convention. Terms are raw whitespace tokens.
    """
    if len(texts) < 2:
        return 0.0
    vectors = [Counter(text.split()) for text in texts]
    norms = [math.sqrt(sum(c * c for c in vec.values())) for vec in vectors]
    total = 0.0
    pairs = 0
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            pairs += 1
            if norms[i] == 0.0 or norms[j] == 0.0:
                continue
            shared = set(vectors[i]) & set(vectors[j])
            dot = sum(vectors[i][t] * vectors[j][t] for t in shared)
            total += dot / (norms[i] * norms[j])
    return total / pairs


def time_pattern_entropy(intervals: Sequence[float], bins: int = DEFAULT_ENTROPY_BINS) -> float:
    """Shannon entropy (bits) of the interval histogram.

    ``bins`` equal-width bins span [min, max]; identical intervals collapse
    to a single bin and score 0.
    """
    if not intervals:
        raise ValueError("at least one interval required")
    if bins <= 0:
        raise ValueError("bins must be positive")
    lo, hi = min(intervals), max(intervals)
    if lo == hi:
        return 0.0
    width = (hi - lo) / bins
    counts = [0] * bins
    for value in intervals:
        index = min(int((value - lo) / width), bins - 1)
        counts[index] += 1
    n = len(intervals)
    entropy = 0.0
    for count in counts:
        if count:
            p = count / n
            entropy -= p * math.log2(p)
    return entropy


def time_pattern_literal(intervals: Sequence[float]) -> float:
    """Alternate pattern score: -sum p(v) * ln(v) over distinct interval
    values, zero-length intervals skipped. Kept for comparison only."""
    if not intervals:
        raise ValueError("at least one interval required")
    n = len(intervals)
    score = 0.0
    for value, count in Counter(intervals).items():
        if value > 0:
            score -= (count / n) * math.log(value)
    return score


def _intervals_hours(posts: Sequence[PostRecord]) -> list[float]:
    stamps = [p.created_at for p in posts]
    return [
        (later - earlier).total_seconds() / 3600.0 for earlier, later in zip(stamps, stamps[1:])
    ]


def _interval_stats(posts: Sequence[PostRecord]) -> tuple[float, float, float, float]:
    """(max, min, mean, sd) of consecutive gaps, zeros when under 2 events."""
    if len(posts) < 2:
        return 0.0, 0.0, 0.0, 0.0
    gaps = _intervals_hours(posts)
    return max(gaps), min(gaps), fmean(gaps), pstdev(gaps)


def _post_has_url(post: PostRecord) -> bool:
    return bool(post.urls) or contains_url(post.text)


def compute_features(
    timeline: Timeline,
    corpus_sources: Iterable[str],
    similarity_cap: int = DEFAULT_SIMILARITY_CAP,
    entropy_bins: int = DEFAULT_ENTROPY_BINS,
    literal_time_pattern: bool = False,
) -> FeatureVector:
    """All 47 features for one account."""
    posts = timeline.posts
    if not posts:
        raise ValueError(f"timeline for {timeline.account.author_id} has no posts")
    account = timeline.account
    corpus_sources = set(corpus_sources)

    tweets = [p for p in posts if not is_retweet_post(p)]
    retweets = [p for p in posts if is_retweet_post(p)]
    n_tweet, n_rt, n_posts = len(tweets), len(retweets), len(posts)

    n_fos = float(account.followers_count)
    n_f = float(account.following_count)
    r_ff = n_fos / n_f if n_f > 0 else n_fos
    age_days = float(max(1, (account.snapshot_at - account.created_at).days))
    rep = n_fos / (n_fos + n_f) if (n_fos + n_f) > 0 else 0.0

    mean_len = fmean(len(p.text) for p in posts)
    sd_len = pstdev([float(len(p.text)) for p in posts])
    n_purl = sum(1 for p in posts if _post_has_url(p))
    n_word = fmean(len(p.text.split()) for p in posts)
    n_digit = sum(sum(1 for c in p.text if c.isdigit()) for p in tweets)
    n_mentions = sum(len(p.mentions) for p in posts)
    n_unique_mentions = len({m for p in posts for m in p.mentions})
    sources = {p.source_label for p in posts}

    similarity = tweet_similarity([p.text for p in posts[-similarity_cap:]])

    max_t, min_t, mean_t, sd_t = _interval_stats(tweets)
    max_r, min_r, mean_r, sd_r = _interval_stats(retweets)
    max_p, min_p, mean_p, sd_p = _interval_stats(posts)

    post_gaps = _intervals_hours(posts)
    if post_gaps:
        time_pattern = (
            time_pattern_literal(post_gaps)
            if literal_time_pattern
            else time_pattern_entropy(post_gaps, bins=entropy_bins)
        )
    else:
        time_pattern = 0.0
    burstiness = (
        BURSTINESS_OFFSET
        if sd_p + mean_p == 0
        else (sd_p - mean_p) / (sd_p + mean_p) + BURSTINESS_OFFSET
    )

    return FeatureVector(
        nFoS=n_fos,
        nF=n_f,
        rFF=r_ff,
        nList=float(account.listed_count),
        lDesc=float(len(account.description)),
        proImage=float(account.has_profile_image),
        age=age_days,
        rListAge=account.listed_count / age_days,
        Rep=rep,
        Pro=float(account.protected),
        Ver=float(account.verified),
        nTweet=float(n_tweet),
        nRT=float(n_rt),
        mean_len=mean_len,
        sd_len=sd_len,
        mean_url_posts=n_purl / n_posts,
        nWord=n_word,
        nDigitTweet=n_digit / n_tweet if n_tweet else 0.0,
        rMn=n_mentions / n_tweet if n_tweet else 0.0,
        rUMn=n_unique_mentions / n_tweet if n_tweet else 0.0,
        rHashPost=sum(len(p.hashtags) for p in posts) / n_posts,
        rURLPost=sum(len(p.urls) for p in posts) / n_posts,
        rRTPost=n_rt / n_posts,
        rUPost=len({p.text for p in posts}) / n_posts,
        mean_like=sum(p.like_count for p in posts) / n_posts,
        mean_quote=sum(p.quote_count for p in posts) / n_posts,
        mean_reply=sum(p.reply_count for p in posts) / n_posts,
        mean_retweet=sum(p.retweet_count for p in posts) / n_posts,
        nSoc=float(len(sources)),
        rSoc=len(sources) / len(corpus_sources) if corpus_sources else 0.0,
        similarity=similarity,
        nPostperDay=n_posts / age_days,
        max_time_tweets=max_t,
        max_time_retweets=max_r,
        max_time_posts=max_p,
        min_time_tweets=min_t,
        min_time_retweets=min_r,
        min_time_posts=min_p,
        mean_time_tweets=mean_t,
        mean_time_retweets=mean_r,
        mean_time_posts=mean_p,
        sd_time_tweets=sd_t,
        sd_time_retweets=sd_r,
        sd_time_posts=sd_p,
        IH=max_p / n_posts,
        timePattern=time_pattern,
        burstiness=burstiness,
    )


def corpus_source_labels(timelines: Iterable[Timeline]) -> set[str]:
    """Union of source labels across all accounts (the rSoc denominator)."""
    labels: set[str] = set()
    for timeline in timelines:
        labels.update(p.source_label for p in timeline.posts)
    return labels
