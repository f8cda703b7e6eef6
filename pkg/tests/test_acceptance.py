"""Acceptance suite: eleven checked criteria, one printed line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines. Every
tolerance is asserted here; nothing is deferred to later calibration.
"""

import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from conftest import make_ioc
from ctikit.artifacts import read_jsonl
from ctikit.botml import (
    ModelKind,
    TrainConfig,
    evaluate,
    minmax_fit_transform,
    select_k_best,
    stratified_split,
    train_classifier,
)
from ctikit.enrich import CountingTransport, LiveProvider, ServiceId, TransportResponse
from ctikit.explain import lime_explain, linear_contributions, permutation_importance
from ctikit.extract import extract_iocs, refang
from ctikit.features import FEATURE_NAMES, Timeline, compute_features
from ctikit.model import PostRecord
from ctikit.pipeline import PipelineConfig, run_pipeline
from ctikit.relevance import ConfusionCounts, detection_rate, f1_score
from ctikit.reliability import ReliabilityCounts, correctness, prop_bot
from oracle_features import oracle_features
from timeline_cases import SOURCES, twenty_cases

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def _report(number: int, name: str, passed: bool = True) -> None:
    print(f"[acceptance] criterion {number:02d} {'PASS' if passed else 'FAIL'}: {name}")


def test_criterion_01_correctness_reproduction():
    started = time.perf_counter()
    cases = [
        ("url", 29743, 63313, 46.98),
        ("ip", 4015, 13964, 28.75),
        ("domain", 4196, 7276, 57.67),
        ("hashes", 4458, 4545, 98.08),
        ("cve", 1869, 1893, 98.73),
        ("total", 44281, 90991, 48.67),
    ]
    for name, n_mal, n_ioc, expected in cases:
        value = correctness(ReliabilityCounts(n_ioc=n_ioc, n_mal=n_mal))
        assert abs(value - expected) <= 0.01, f"{name}: {value} vs {expected}"
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    _report(1, f"correctness matches reference per-type counts within 0.01 ({elapsed:.3f}s)")


def test_criterion_02_prop_bot_reproduction():
    started = time.perf_counter()
    value = prop_bot(8067, 44281)
    assert abs(value - 18.22) <= 0.01
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    _report(2, f"prop_bot(8067, 44281) = {value:.4f} within 0.01 of 18.22 ({elapsed:.3f}s)")


def test_criterion_03_f1_and_detection_formulas():
    # 20 hand-built confusion matrices; the oracle is spreadsheet-style
    # arithmetic with exact rationals.
    matrices = [
        (8, 2, 2), (5, 0, 0), (0, 3, 3), (3, 1, 0), (2, 0, 5),
        (10, 10, 10), (1, 0, 0), (0, 0, 7), (7, 7, 0), (9, 1, 3),
        (4, 4, 4), (6, 0, 2), (12, 3, 5), (20, 1, 1), (15, 5, 10),
        (2, 2, 2), (50, 25, 25), (33, 3, 9), (40, 0, 1), (1, 1, 1),
    ]
    for tp, fp, fn in matrices:
        counts = ConfusionCounts(tp=tp, fp=fp, fn=fn)
        if tp + fp + fn > 0:
            expected_f1 = float(Fraction(2 * tp, 2 * tp + fp + fn))
            assert f1_score(counts) == pytest.approx(expected_f1, abs=0.0, rel=1e-15)
        if tp + fn > 0:
            expected_dr = float(Fraction(tp, tp + fn))
            assert detection_rate(counts) == pytest.approx(expected_dr, abs=0.0, rel=1e-15)
    # corpus-scale scores are not reproducible offline; formula-level
    # verification substitutes for them by design.
    _report(3, "F1 and detection rate match exact rational arithmetic on 20 matrices")


def test_criterion_04_extraction_fidelity_on_golden_fixture():
    started = time.perf_counter()
    posts = {d["post_id"]: PostRecord.from_dict(d) for d in read_jsonl(FIXTURES / "extract" / "posts.jsonl")}
    expected_rows = list(read_jsonl(FIXTURES / "extract" / "expected.jsonl"))
    assert len(posts) == 50 and len(expected_rows) == 50

    tp = fp = fn = 0
    for row in expected_rows:
        post = posts[row["post_id"]]
        got = {
            (r.ioc_value, r.ioc_type.value, r.was_defanged) for r in extract_iocs(post)
        }
        want = {
            (e["ioc_value"], e["ioc_type"], e["was_defanged"]) for e in row["iocs"]
        }
        tp += len(got & want)
        fp += len(got - want)
        fn += len(want - got)
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    assert precision == 1.0 and recall == 1.0, f"precision={precision}, recall={recall}"
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    _report(4, f"golden 50-post extraction: precision=recall=1.0 over {tp} indicators ({elapsed:.3f}s)")


def _random_canonical_ioc(rng: random.Random) -> str:
    kind = rng.randrange(5)
    if kind == 0:
        host = "".join(rng.choices("abcdefgh", k=6))
        return f"http://{host}.{rng.choice(['com', 'net', 'io'])}/{''.join(rng.choices('abcdef12', k=5))}"
    if kind == 1:
        return ".".join(str(rng.randrange(256)) for _ in range(4))
    if kind == 2:
        return "{}.{}".format("".join(rng.choices("abcdefgh", k=7)), rng.choice(["com", "org", "ru"]))
    if kind == 3:
        return "".join(rng.choices("0123456789abcdef", k=rng.choice([32, 40, 64, 96, 128])))
    return f"CVE-{rng.randrange(1999, 2024)}-{rng.randrange(1000, 999999)}"


def _defang(value: str, rng: random.Random) -> str:
    out = []
    for ch in value:
        if ch == "." and rng.random() < 0.7:
            out.append(rng.choice(["[.]", "(.)", "[dot]"]))
        else:
            out.append(ch)
    text = "".join(out)
    if text.startswith("http") and rng.random() < 0.8:
        text = "hxxp" + text[4:]
    if "://" in text and rng.random() < 0.3:
        text = text.replace("://", "[://]", 1)
    return text


def test_criterion_05_refang_properties_500_cases():
    rng = random.Random(77)
    for index in range(500):
        value = _random_canonical_ioc(rng)
        defanged = _defang(value, rng)
        refanged = refang(defanged)
        assert refanged == value, f"case {index}: {defanged!r} -> {refanged!r} != {value!r}"
        assert refang(refanged) == refanged
    assert refang("hxxp://a[.]b/c") == "http://a.b/c"
    assert refang("1[.]1[.]1[.]1") == "1.1.1.1"
    _report(5, "refang round-trips 500 generated defangings and is idempotent")


def test_criterion_06_feature_oracle_equivalence():
    cases = twenty_cases()
    corpus_sources = set(SOURCES) | {""}
    worst = 0.0
    for index, (account, posts) in enumerate(cases):
        vector = compute_features(Timeline(account=account, posts=posts), corpus_sources)
        expected = oracle_features(account, list(posts), corpus_sources)
        for name in FEATURE_NAMES:
            got = getattr(vector, name)
            want = expected[name]
            err = abs(got - want) / max(1.0, abs(got), abs(want))
            worst = max(worst, err)
            assert err <= 1e-9, f"case {index} {name}: {got} vs {want}"
    _report(6, f"47 features match the independent oracle on 20 timelines (worst rel err {worst:.2e})")


def test_criterion_07_feature_selection_sanity():
    informative = [5, 20, 40]
    for seed in range(5):
        rng = np.random.default_rng(seed)
        n = 400
        y = np.repeat([0, 1], n // 2)
        X = rng.normal(0.0, 1.0, size=(n, 47))
        for j in informative:
            X[:, j] += y * 2.5
        ranked, scores = select_k_best(X, y, k=47)
        top5 = set(ranked[:5])
        assert set(informative) <= top5, f"seed {seed}: top5={sorted(top5)}"

        _, scaled = minmax_fit_transform(X)
        scaled_ranked, _ = select_k_best(scaled, y, k=47)
        assert scaled_ranked == ranked, f"seed {seed}: ranking changed under scaling"
    _report(7, "3 informative features rank in the top 5 for 5/5 seeds; ranking scale-invariant")


def _blobs(n_per_class, separation, seed, ratio=1.0, d=4):
    rng = np.random.default_rng(seed)
    n_neg = int(n_per_class * ratio)
    X_pos = rng.normal(0.0, 1.0, size=(n_per_class, d))
    X_pos[:, :2] += separation
    X = np.vstack([X_pos, rng.normal(0.0, 1.0, size=(n_neg, d))])
    y = np.concatenate([np.ones(n_per_class), np.zeros(n_neg)])
    order = rng.permutation(len(y))
    return X[order], y[order]


def test_criterion_08_classifier_floors():
    scores = {}
    X, y = _blobs(500, 4.0, seed=7)
    train_idx, test_idx = stratified_split(y, 0.2, seed=7)
    for kind in ModelKind:
        model = train_classifier(kind, X[train_idx], y[train_idx], config=TrainConfig(n_trees=30), seed=7)
        _, f1 = evaluate(model, X[test_idx], y[test_idx])
        assert f1 >= 0.95, f"{kind.value}: separable floor missed ({f1:.3f})"
        scores[f"{kind.value}/sep"] = f1

    X, y = _blobs(150, 2.5, seed=21, ratio=5.0)
    train_idx, test_idx = stratified_split(y, 0.2, seed=21)
    config = TrainConfig(n_trees=30, learning_rate=1.0, epochs=2000)
    for kind in ModelKind:
        model = train_classifier(kind, X[train_idx], y[train_idx], config=config, seed=21)
        _, f1 = evaluate(model, X[test_idx], y[test_idx])
        assert f1 >= 0.80, f"{kind.value}: imbalanced floor missed ({f1:.3f})"
        scores[f"{kind.value}/imb"] = f1
    # benchmark scores from heavier models are not a target here; these
    # floors are the property substitute.
    summary = ", ".join(f"{k}={v:.3f}" for k, v in scores.items())
    _report(8, f"classifier floors met ({summary})")


def test_criterion_09_explainability():
    from ctikit.botml import ScalerState, TrainedModel
    from ctikit.botml.models import LogisticModel

    rng = np.random.default_rng(4)
    weights = rng.normal(size=6)
    linear = TrainedModel(
        kind=ModelKind.LOGISTIC_REGRESSION,
        scaler=ScalerState(mins=np.zeros(6), maxs=np.ones(6)),
        selected=list(range(6)),
        estimator=LogisticModel(weights=weights, bias=0.1),
        seed=0,
        feature_names=tuple(f"f{i}" for i in range(6)),
    )
    background = rng.uniform(size=(40, 6))
    worst_gap = 0.0
    for _ in range(50):
        x = rng.uniform(size=6)
        explanation = linear_contributions(linear, x, background)
        worst_gap = max(worst_gap, abs(explanation.total() - explanation.prediction))
    assert worst_gap < 1e-9

    class LinearProbability:
        def __init__(self, coef, intercept):
            self.coef = np.asarray(coef)
            self.intercept = intercept

        def predict_proba(self, X):
            return np.asarray(X) @ self.coef + self.intercept

    coef = [0.06, -0.04, 0.02, 0.05]
    surrogate_target = TrainedModel(
        kind=ModelKind.RANDOM_FOREST,
        scaler=ScalerState(mins=np.zeros(4), maxs=np.ones(4)),
        selected=list(range(4)),
        estimator=LinearProbability(coef, 0.5),
        seed=0,
        feature_names=tuple(f"f{i}" for i in range(4)),
    )
    explanation = lime_explain(surrogate_target, np.full(4, 0.5), n_samples=5000, seed=3)
    recovered = dict(explanation.contributions)
    for i, true_value in enumerate(coef):
        assert abs(recovered[f"f{i}"] - true_value) <= 0.10 * abs(true_value)

    X = np.random.default_rng(0).uniform(size=(300, 4))
    y = (X[:, 1] > 0.5).astype(float)
    X[:, 3] = 0.5
    model = train_classifier(ModelKind.DECISION_TREE, X, y, config=TrainConfig(max_depth=4))
    for seed in range(5):
        ranked = permutation_importance(model, X, y, repeats=10, seed=seed)
        assert ranked[0][0] == "f1", f"seed {seed}: top feature {ranked[0]}"
    _report(
        9,
        f"linear additivity gap {worst_gap:.1e} < 1e-9; LIME within 10%; top importance stable 5/5 seeds",
    )


def test_criterion_10_determinism_and_offline_operation(tmp_path):
    started = time.perf_counter()
    trees = {}
    transports = []
    for name in ("a", "b"):
        transport = CountingTransport()  # raises on any outbound request
        config = PipelineConfig.from_file(
            str(FIXTURES / "pipeline.toml"), overrides={"output_dir": str(tmp_path / name)}
        )
        outdir = run_pipeline(config, transport=transport)
        transports.append(transport)
        trees[name] = {
            str(p.relative_to(outdir)): p.read_bytes()
            for p in sorted(outdir.rglob("*"))
            if p.is_file()
        }
    elapsed = time.perf_counter() - started
    assert trees["a"] == trees["b"], "artifact trees differ between runs"
    assert all(t.requests_made == 0 for t in transports)
    assert elapsed < 60.0
    _report(
        10,
        f"two pipeline runs byte-identical ({len(trees['a'])} files), 0 network requests, {elapsed:.1f}s",
    )


def test_criterion_11_rate_limit_contract():
    timeline = []

    class RecordingTransport:
        def __init__(self, clock):
            self.clock = clock

        def request(self, method, url, **kwargs):
            timeline.append(self.clock())
            return TransportResponse(
                200,
                b'{"data": {"attributes": {"last_analysis_stats": {"malicious": 0}}}}',
            )

    class FakeClock:
        def __init__(self):
            self.now = 0.0

        def clock(self):
            return self.now

        def sleep(self, seconds):
            self.now += seconds

    fake = FakeClock()
    provider = LiveProvider(
        transport=RecordingTransport(fake.clock),
        services=[ServiceId.VIRUSTOTAL],
        env={"CTIKIT_VT_KEY": "test"},
        rate_limits={"vt": 4.0},
        clock=fake.clock,
        sleep=fake.sleep,
    )
    for i in range(200):
        provider.fetch(ServiceId.VIRUSTOTAL, make_ioc(value=f"http://h{i}.example/"))

    assert len(timeline) == 200
    worst = 0
    for start in timeline:
        in_window = sum(1 for t in timeline if start <= t < start + 61.0)
        worst = max(worst, in_window)
    assert worst <= 4, f"a 61s window saw {worst} requests"
    _report(11, f"200-request run: max {worst} VirusTotal requests in any 61s window")
