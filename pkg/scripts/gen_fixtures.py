#!/usr/bin/env python3
"""Regenerate the committed offline fixtures under fixtures/.

Everything is seeded, so reruns are byte-identical. The extraction golden
set is authored literally here (expected indicators are written down, never
derived by running the extractor).
"""

from __future__ import annotations

import random
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

from ctikit.enrich import ServiceId, Verdict, VerdictStatus, accepts, fixture_relpath
from ctikit.enrich.cache import verdict_digest
from ctikit.extract import dedup_iocs, extract_iocs
from ctikit.ingest import filter_corpus
from ctikit.model import AccountProfile, PostRecord, canonical_json

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

BASE = datetime(2021, 1, 4, 9, 0, 0, tzinfo=timezone.utc)


def ts(day_offset: float, hour: float = 0.0) -> datetime:
    return (BASE + timedelta(days=day_offset, hours=hour)).replace(microsecond=0)


# ---------------------------------------------------------------- corpora

HUMANS = [
    "analyst01", "analyst02", "analyst03", "analyst04", "analyst05",
    "blue_team", "research_lab", "vendor_x", "night_hunter", "dfir_sam",
    "reversing_kat", "soc_dispatch",
]
BOTS = ["feedbot", "iocbot", "pastebot", "scanbot"]

URL_POOL = [
    ("http://badshop.ru/login", False),
    ("http://panel.evil-east.com/gate.php", False),
    ("hxxp://drop-zone[.]icu/x/payload.bin", True),
    ("http://cdn.fresh-mal.net/lib.js", False),
    ("hxxp://stage2[.]bad-cdn[.]com/a", True),
    ("http://update-flash.top/setup.exe", False),
    ("http://invoice-view.site/doc/22", False),
    ("hxxps://creds-portal[.]net/login", True),
]
IP_POOL = [
    ("45.227.255.190", False),
    ("203.0.113.77", False),
    ("198.51.100.3", False),
    ("185.220.101.4", False),
    ("91.92.240.11", False),
    ("1[.]1[.]1[.]1", True),
    ("102.54.200.9", False),
]
DOMAIN_POOL = [
    ("files-update.com", False),
    ("secure-bank-login.net", False),
    ("mail-verify.org", False),
    ("telemetry-sync.io", False),
    ("wallet-restore[.]com", True),
]
HASH_POOL = [
    ("9e107d9d372bb6826bd81d3542a419d6", False),
    ("5d41402abc4b2a76b9719d911017c592", False),
    ("2fd4e1c67a2d28fced849ee1bb76e7391b93eb12", False),
    ("da39a3ee5e6b4b0d3255bfef95601890afd80709", False),
    ("e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855", False),
    ("9f86d081884c7d659a2feaa0c55ad015a3bf4f1b2b0b822cd15d6c15b0f00a08", False),
    ("0c63a75b845e4f7d01107d852e4c2485c51a50aaaa94fc61995e71bbee983a2ac3713831264adb47fb6bd1e058d5f004", False),
    (
        "cf83e1357eefb8bdf1542850d66d8007d620e4050b5715dc83f4a921d36ce9ce"
        "47d0d13c5d85f2b0ff8318d2877eec2f63b931bd47417a81a538327af927da3e",
        False,
    ),
]
CVE_POOL = [
    ("CVE-2021-20180", False),
    ("CVE-2021-23980", False),
    ("CVE-2021-21548", False),
    ("CVE-2021-44228", False),
    ("cve-2020-0601", False),
]

# indicators only the automated accounts post, so chronological dedup
# attributes them to bots and the bot-proportion metric has signal
BOT_POOL = [
    ("http://feed-mirror-one.icu/blob", False, "url"),
    ("hxxp://feed-mirror-two[.]top/blob", True, "url"),
    ("23.94.100.7", False, "ip"),
    ("23.94.100.8", False, "ip"),
    ("179.43.175.101", False, "ip"),
    ("auto-collect.org", False, "domain"),
    ("f5b8f9d2a1c3e4d5b6a7c8d9e0f1a2b3", False, "hash"),
    ("ffeeddccbbaa99887766554433221100", False, "hash"),
    ("CVE-2021-34527", False, "cve"),
    ("CVE-2021-26855", False, "cve"),
]

CHATTER = [
    "great talk on threat hunting today",
    "conference badge pickup was painless",
    "reading a long report over coffee",
    "weekly patch review went smoothly",
    "welcome to the new team members",
    "slides from the workshop are coming soon",
    "nothing beats a quiet friday shift",
    "lab rebuild finished ahead of schedule",
    "retro scheduled for monday morning",
    "new blog post drops tomorrow",
]
EXCLUDED_URL_TEXTS = [
    "thread context https://twitter.com/some_analyst/status/1344012",
    "recording at https://youtube.com/watch?v=dQw4w9WgXcQ",
    "community page https://www.facebook.com/secgroup",
    "mirror https://reddit.com/r/netsec/comments/abc",
]

RELEVANT_TEMPLATES = [
    "fresh campaign observed {ioc} #malware",
    "blocklist update: {ioc}",
    "sandbox flagged {ioc} as dropper",
    "active c2 at {ioc} rotate your rules",
    "phishing lure points to {ioc} #phishing",
    "ioc dump: {ioc}",
]


def _ioc_stream(rng: random.Random):
    pool = (
        [(v, d, "url") for v, d in URL_POOL]
        + [(v, d, "ip") for v, d in IP_POOL]
        + [(v, d, "domain") for v, d in DOMAIN_POOL]
        + [(v, d, "hash") for v, d in HASH_POOL]
        + [(v, d, "cve") for v, d in CVE_POOL]
    )
    while True:
        rng.shuffle(pool)
        yield from pool


def build_corpus() -> tuple[list[PostRecord], list[dict], list[AccountProfile], dict[str, float]]:
    rng = random.Random(20210104)
    iocs = _ioc_stream(rng)
    posts: list[PostRecord] = []
    labels: list[dict] = []

    def add_post(author, index, text, when, relevant, lang="en", is_retweet=False, source="web", uniq=True):
        post_id = f"{author}-{index:03d}"
        if uniq:
            # keep accidental text collisions out of the dedup pass
            text = f"{text} ref {''.join(rng.choices('abcdefghij', k=4))}"
        mentions = tuple(rng.sample(["mitre", "vx_share", "team_lead"], rng.randint(0, 2)))
        hashtags = tuple(
            sorted(rng.sample(["malware", "phishing", "cti", "ioc"], rng.randint(0, 2)))
        )
        posts.append(
            PostRecord(
                post_id=post_id,
                author_id=author,
                text=text,
                created_at=when,
                lang=lang,
                is_retweet=is_retweet,
                source_label=source,
                hashtags=hashtags,
                mentions=mentions,
                urls=(),
                like_count=rng.randint(0, 40),
                quote_count=rng.randint(0, 5),
                reply_count=rng.randint(0, 12),
                retweet_count=rng.randint(0, 25),
            )
        )
        if lang == "en" and not is_retweet:
            labels.append({"post_id": post_id, "label": int(relevant)})

    day = 0.0
    for author in HUMANS:
        n = rng.randint(9, 13)
        when = ts(day, rng.uniform(0, 5))
        for i in range(n):
            when = when + timedelta(hours=rng.uniform(3, 40))
            if rng.random() < 0.55:
                value, _, _ = next(iocs)
                text = rng.choice(RELEVANT_TEMPLATES).format(ioc=value)
                add_post(author, i, text, when, relevant=True, source=rng.choice(["web", "android"]))
            else:
                body = rng.choice(CHATTER)
                if rng.random() < 0.25:
                    body = rng.choice(EXCLUDED_URL_TEXTS)
                add_post(author, i, body, when, relevant=False, source=rng.choice(["web", "android"]))
        day += 1.3

    bot_iocs = _ioc_stream(rng)
    for author in BOTS:
        n = rng.randint(12, 16)
        when = ts(day, 0)
        for i in range(n):
            when = when + timedelta(hours=6)  # metronomic posting
            if rng.random() < 0.5:
                value, _, _ = rng.choice(BOT_POOL)
            else:
                value, _, _ = next(bot_iocs)
            text = f"automated feed update {value}"
            add_post(author, i, text, when, relevant=True, source="api")
        day += 0.7

    # hygiene exercise: non-English, retweets, duplicates
    for i, author in enumerate(HUMANS[:4]):
        add_post(author, 900 + i, "informe nuevo disponible", ts(30 + i, 1), relevant=False, lang="es")
    for i, author in enumerate(HUMANS[4:8]):
        add_post(author, 910 + i, "RT @other se habla de malware", ts(31 + i, 2), relevant=False, is_retweet=True)
    originals = [p for p in posts if p.lang == "en" and not p.is_retweet][:6]
    for i, original in enumerate(originals):
        add_post(
            original.author_id,
            920 + i,
            original.text,
            original.created_at + timedelta(days=40),
            relevant=False,
            uniq=False,
        )

    accounts = []
    scores: dict[str, float] = {}
    snapshot = ts(200)
    for author in HUMANS:
        accounts.append(
            AccountProfile(
                author_id=author,
                followers_count=rng.randint(200, 9000),
                following_count=rng.randint(100, 2000),
                listed_count=rng.randint(2, 80),
                description=rng.choice(
                    ["incident response and coffee", "malware archaeology", "defending networks since 2012", ""]
                ),
                has_profile_image=True,
                protected=False,
                verified=rng.random() < 0.25,
                created_at=ts(-rng.randint(700, 2500)),
                snapshot_at=snapshot,
            )
        )
        scores[author] = round(rng.uniform(0.02, 0.62), 4)
    for author in BOTS:
        accounts.append(
            AccountProfile(
                author_id=author,
                followers_count=rng.randint(5, 300),
                following_count=rng.randint(800, 4000),
                listed_count=rng.randint(0, 3),
                description="",
                has_profile_image=False,
                protected=False,
                verified=False,
                created_at=ts(-rng.randint(30, 200)),
                snapshot_at=snapshot,
            )
        )
        scores[author] = round(rng.uniform(0.952, 0.995), 4)
    return posts, labels, accounts, scores


# ------------------------------------------------- extraction golden set

GOLDEN_AUTHOR = "golden"


def build_extract_golden() -> tuple[list[PostRecord], list[dict]]:
    """50 posts with literally annotated expected indicators."""
    cases: list[tuple[str, list[tuple[str, str, bool]]]] = [
        ("Phishing kit at hxxp://badshop[.]ru/login", [("http://badshop.ru/login", "url", True)]),
        ("C2 live: http://panel.evil-east.com/gate.php", [("http://panel.evil-east.com/gate.php", "url", False)]),
        ("see http://mal-host.net/p1.", [("http://mal-host.net/p1", "url", False)]),
        ("Blocked 45[.]227[.]255[.]190 on the proxy", [("45.227.255.190", "ip", True)]),
        ("Scanner hitting 203.0.113.77 all night", [("203.0.113.77", "ip", False)]),
        ("New dropper domain: files-update[.]com", [("files-update.com", "domain", True)]),
        ("Lookalike domain secure-bank-login.net registered", [("secure-bank-login.net", "domain", False)]),
        ("Sample md5 9e107d9d372bb6826bd81d3542a419d6", [("9e107d9d372bb6826bd81d3542a419d6", "md5", False)]),
        (
            "sha1 2fd4e1c67a2d28fced849ee1bb76e7391b93eb12 seen in memory",
            [("2fd4e1c67a2d28fced849ee1bb76e7391b93eb12", "sha1", False)],
        ),
        (
            "payload e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855",
            [("e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855", "sha256", False)],
        ),
        (
            "sha3 0c63a75b845e4f7d01107d852e4c2485c51a50aaaa94fc61995e71bbee983a2ac3713831264adb47fb6bd1e058d5f004",
            [(
                "0c63a75b845e4f7d01107d852e4c2485c51a50aaaa94fc61995e71bbee983a2ac3713831264adb47fb6bd1e058d5f004",
                "sha3_384",
                False,
            )],
        ),
        (
            "full dump cf83e1357eefb8bdf1542850d66d8007d620e4050b5715dc83f4a921d36ce9ce"
            "47d0d13c5d85f2b0ff8318d2877eec2f63b931bd47417a81a538327af927da3e",
            [(
                "cf83e1357eefb8bdf1542850d66d8007d620e4050b5715dc83f4a921d36ce9ce"
                "47d0d13c5d85f2b0ff8318d2877eec2f63b931bd47417a81a538327af927da3e",
                "sha512",
                False,
            )],
        ),
        ("Patch now: CVE-2021-20180", [("CVE-2021-20180", "cve", False)]),
        ("cve-2021-23980 affects bleach users", [("CVE-2021-23980", "cve", False)]),
        ("thread: https://twitter.com/some/status/123", []),
        ("video https://youtube.com/watch?v=abc123", []),
        ("https://www.facebook.com/somepage promo", []),
        ("short https://fb.me/xyz", []),
        ("see https://reddit.com/r/blueteam post", []),
        (
            "hxxp://a-bad[.]com/x and 8[.]8[.]4[.]4 share infra",
            [("http://a-bad.com/x", "url", True), ("8.8.4.4", "ip", True)],
        ),
        ("Great talk about threat hunting today", []),
        ("version 1.2.3 released, no indicators here", []),
        ("999.1.2.3 is not routable and not an indicator", []),
        (
            "ref https://twitter.com/x/status/9 IOC 198.51.100.3",
            [("198.51.100.3", "ip", False)],
        ),
        (
            "double report 10.9.8.7 appears with cve-2021-44228",
            [("10.9.8.7", "ip", False), ("CVE-2021-44228", "cve", False)],
        ),
    ]

    filler_ips = [
        "192.0.2.1", "192.0.2.55", "198.51.100.200", "203.0.113.5", "100.64.12.9",
        "172.129.3.44", "41.77.120.6", "77.91.68.29",
    ]
    for ip in filler_ips:
        cases.append((f"observed beaconing to {ip}", [(ip, "ip", False)]))
    filler_domains = ["dropfiles.org", "fake-pay.net", "login-check.com", "cdn-pull.io"]
    for domain in filler_domains:
        cases.append((f"takedown requested for {domain}", [(domain, "domain", False)]))
    filler_defanged = [
        ("hxxp://silo-one[.]com/a", "http://silo-one.com/a"),
        ("hxxp://silo-two[.]net/b", "http://silo-two.net/b"),
        ("hxxps://silo-three[.]org/c", "https://silo-three.org/c"),
    ]
    for fanged, plain in filler_defanged:
        cases.append((f"hosting panel {fanged}", [(plain, "url", True)]))
    filler_md5 = ["d41d8cd98f00b204e9800998ecf8427e", "098f6bcd4621d373cade4e832627b4f6"]
    for digest in filler_md5:
        cases.append((f"stage two md5 {digest}", [(digest, "md5", False)]))
    filler_chatter = [
        "weekend reading list is out",
        "lab power maintenance tonight",
        "thanks for the great workshop everyone",
        "new hires start on monday",
        "quarterly review complete",
        "updated the internal wiki",
        "coffee machine fixed at last",
        "ticket queue finally empty",
    ]
    for line in filler_chatter:
        cases.append((line, []))

    cases = cases[:50]
    assert len(cases) == 50

    posts, expected = [], []
    for i, (text, iocs) in enumerate(cases):
        post_id = f"golden-{i:03d}"
        posts.append(
            PostRecord(
                post_id=post_id,
                author_id=GOLDEN_AUTHOR,
                text=text,
                created_at=ts(i % 14, (i * 3) % 24),
                lang="en",
            )
        )
        expected.append(
            {
                "post_id": post_id,
                "iocs": [
                    {"ioc_value": value, "ioc_type": type_, "was_defanged": defanged}
                    for value, type_, defanged in iocs
                ],
            }
        )
    return posts, expected


# ------------------------------------------------------------- verdicts


def synth_verdict(service: ServiceId, record, rng: random.Random) -> Verdict:
    post_date = record.published_date
    offset_days = rng.randint(-25, 25)
    first_seen = post_date + timedelta(days=offset_days)
    has_date = rng.random() > 0.18

    if service in (ServiceId.VIRUSTOTAL, ServiceId.ALIENVAULT):
        p_mal = 0.62 if service is ServiceId.VIRUSTOTAL else 0.3
        malicious = rng.random() < p_mal
        detail = (
            f"{rng.randint(1, 30)}/75 engines flagged" if malicious else "0/75 engines flagged"
        )
        return Verdict(
            ioc_value=record.ioc_value,
            ioc_type=record.ioc_type,
            service=service,
            status=VerdictStatus.MALICIOUS if malicious else VerdictStatus.CLEAN,
            first_seen=first_seen if (malicious and has_date) else None,
            detail=detail,
        )

    if service is ServiceId.NVD:
        found = rng.random() < 0.92
    elif service is ServiceId.MALWAREBAZAAR:
        found = rng.random() < 0.5
    else:  # urlhaus, misp
        found = rng.random() < 0.3
    return Verdict(
        ioc_value=record.ioc_value,
        ioc_type=record.ioc_type,
        service=service,
        status=VerdictStatus.FOUND if found else VerdictStatus.NOT_FOUND,
        first_seen=first_seen if (found and has_date) else None,
        detail="db entry" if found else "",
    )


def write_verdicts(iocs) -> int:
    count = 0
    for record in iocs:
        for service in ServiceId:
            if not accepts(service, record.ioc_type):
                continue
            rng = random.Random(verdict_digest(service, record.ioc_value))
            verdict = synth_verdict(service, record, rng)
            path = FIXTURES / "verdicts" / fixture_relpath(service, record.ioc_value)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(canonical_json(verdict.to_dict()) + b"\n")
            count += 1
    return count


PIPELINE_TOML = """\
# Offline demo pipeline over the shipped 200-post corpus.
posts = "posts.jsonl"
accounts = "accounts.jsonl"
botness_scores = "botness.csv"
relevance_labels = "relevance_labels.jsonl"
provider = "fixture"
fixture_dir = "verdicts"
services = ["vt", "otx", "urlhaus", "mb", "misp", "nvd"]
seed = 7
bot_model_kind = "random_forest"
bot_n_trees = 30
bot_max_depth = 12
output_dir = "out"
"""


def main() -> int:
    FIXTURES.mkdir(exist_ok=True)
    posts, labels, accounts, scores = build_corpus()

    with open(FIXTURES / "posts.jsonl", "wb") as fh:
        for post in posts:
            fh.write(canonical_json(post.to_dict()) + b"\n")
    with open(FIXTURES / "relevance_labels.jsonl", "wb") as fh:
        for row in labels:
            fh.write(canonical_json(row) + b"\n")
    with open(FIXTURES / "accounts.jsonl", "wb") as fh:
        for account in accounts:
            fh.write(canonical_json(account.to_dict()) + b"\n")
    with open(FIXTURES / "botness.csv", "w", encoding="utf-8") as fh:
        fh.write("author_id,botness\n")
        for author in sorted(scores):
            fh.write(f"{author},{scores[author]}\n")

    retained, stats = filter_corpus(posts)
    relevant_texts = {row["post_id"] for row in labels if row["label"] == 1}
    records = []
    for post in retained:
        if post.post_id in relevant_texts:
            records.extend(extract_iocs(post))
    unique = dedup_iocs(records)
    n_files = write_verdicts(unique)

    golden_posts, golden_expected = build_extract_golden()
    extract_dir = FIXTURES / "extract"
    extract_dir.mkdir(exist_ok=True)
    with open(extract_dir / "posts.jsonl", "wb") as fh:
        for post in golden_posts:
            fh.write(canonical_json(post.to_dict()) + b"\n")
    with open(extract_dir / "expected.jsonl", "wb") as fh:
        for row in golden_expected:
            fh.write(canonical_json(row) + b"\n")

    (FIXTURES / "pipeline.toml").write_text(PIPELINE_TOML, "utf-8")

    print(f"posts: {len(posts)} (retained {stats.retained}), labels: {len(labels)}")
    print(f"accounts: {len(accounts)}, unique iocs: {len(unique)}, verdict files: {n_files}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
