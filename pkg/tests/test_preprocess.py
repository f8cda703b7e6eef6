"""The eight-step normalization pipeline."""

import re

from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ctikit.extract import ioc_spans
from ctikit.preprocess import MARKERS, STOPWORDS, is_marker, preprocess, stem
from oracle_preprocess import oracle_preprocess


def test_defanged_url_example():
    assert preprocess("Check hxxp://evil[.]com NOW @bob") == ["check", "[defanged]", "[url]"]


def test_empty_text():
    assert preprocess("") == []


def test_defanged_ip_example():
    assert preprocess("1[.]1[.]1[.]1") == ["[defanged]", "[ip]"]


def test_fanged_iocs_get_plain_markers():
    assert preprocess("see http://evil.com/x") == ["see", "[url]"]
    assert preprocess("host 1.2.3.4 compromised") == ["host", "[ip]", "compromi"]
    assert preprocess("CVE-2021-20180 patched") == ["[cve]", "patch"]
    assert preprocess("md5 " + "a" * 32) == ["md", "[hash]"]
    assert preprocess("domain evil.com seen") == ["domain", "[domain]", "seen"]


# Step-order pins: each input distinguishes one ordering of the steps.
def test_mention_removal_precedes_ioc_normalization():
    assert preprocess("@1.2.3.4") == []


def test_ioc_normalization_precedes_non_alpha_removal():
    assert preprocess("1.2.3.4") == ["[ip]"]


def test_single_char_tokens_removed_but_markers_kept():
    assert preprocess("x y analysis 1.2.3.4") == ["analysi", "[ip]"]


def test_stemming_precedes_stopword_removal():
    # "nows" stems to the stopword "now" and must then be removed
    assert stem("nows") == "now"
    assert preprocess("nows") == []


def test_lowercasing_first():
    assert preprocess("CHECK THE Feeds") == ["check", "feed"]


def test_stemmer_examples():
    assert stem("check") == "check"
    assert stem("checking") == "check"
    assert stem("checked") == "check"
    assert stem("ponies") == "poni"
    assert stem("running") == "run"
    assert stem("attacks") == "attack"
    assert stem("relational") == "relate"
    assert stem("ss") == "ss"


@settings(max_examples=300, deadline=None)
@given(word=st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=0, max_size=16))
def test_stemmer_idempotent(word):
    assert stem(stem(word)) == stem(word)


def test_stemmer_idempotent_on_pathological_suffix_stacks():
    for word in ("a" + "ly" * 40, "attack" + "s" * 30, "x" + "ment" * 20):
        assert stem(stem(word)) == stem(word)


_sentences = st.lists(
    st.one_of(
        st.text(alphabet="abcdefghijklmnopqrstuvwxyzABC@#.,!123", min_size=1, max_size=10),
        st.sampled_from(
            [
                "hxxp://bad[.]example[.]com/x",
                "http://ok.example.net/y",
                "10.0.0.1",
                "300.1.2.3",
                "CVE-2021-44228",
                "deadbeef" * 4,
                "@victim",
                "#malware",
            ]
        ),
    ),
    min_size=0,
    max_size=8,
).map(" ".join)


@settings(max_examples=200, deadline=None)
@given(text=_sentences)
def test_output_invariants(text):
    tokens = preprocess(text)
    for token in tokens:
        assert not token.startswith("@")
        if is_marker(token):
            continue
        assert re.fullmatch(r"[a-z]{2,}", token), token
        assert token not in STOPWORDS


@settings(max_examples=200, deadline=None)
@given(
    text=st.text(alphabet="abcdefghijklmnopqrstuvwxyz .,!", min_size=0, max_size=60)
)
def test_idempotence_on_marker_free_text(text):
    first = preprocess(text)
    assume(all(not is_marker(t) for t in first))
    second = preprocess(" ".join(first))
    assert second == first


def test_every_extract_match_maps_to_one_marker_group():
    samples = [
        ("http://evil.example/x", "[url]"),
        ("10.1.2.3", "[ip]"),
        ("evil.com", "[domain]"),
        ("CVE-2020-0601", "[cve]"),
        ("c" * 40, "[hash]"),
        ("d" * 64, "[hash]"),
        ("e" * 96, "[hash]"),
        ("f" * 128, "[hash]"),
    ]
    for value, marker in samples:
        spans = ioc_spans(value.lower())
        assert len(spans) == 1
        tokens = preprocess(f"padding {value} padding")
        found = [t for t in tokens if t in MARKERS]
        assert found == [marker], (value, tokens)


# Oracle corpus: stem-stable vocabulary so the independent reference (which
# does not stem) must agree token for token.
_ORACLE_VOCAB = ["check", "new", "malware", "warn", "phish", "alert", "dump", "leak", "now", "the"]
_ORACLE_IOCS = [
    "hxxp://evil[.]com/a",
    "http://plain.example.io/b",
    "1[.]1[.]1[.]1",
    "8.8.8.8",
    "CVE-2021-20180",
    "ab" * 16,
    "bad.org",
]


def test_oracle_vocab_is_stem_stable():
    for word in _ORACLE_VOCAB:
        assert stem(word) == word, word


@settings(max_examples=200, deadline=None)
@given(
    parts=st.lists(
        st.one_of(
            st.sampled_from(_ORACLE_VOCAB),
            st.sampled_from(_ORACLE_IOCS),
            st.sampled_from(["@someone", "@CVE-2021-1111", "x", "Y!"]),
        ),
        min_size=0,
        max_size=10,
    )
)
def test_pipeline_matches_independent_oracle(parts):
    text = " ".join(parts)
    assert preprocess(text) == oracle_preprocess(text)
