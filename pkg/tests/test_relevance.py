"""Relevance classifier and the F1 / detection-rate metrics."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctikit.relevance import (
    ConfusionCounts,
    LabeledTokenSeq,
    TextConfig,
    TextModel,
    detection_rate,
    f1_score,
    load_model,
    predict_label,
    predict_text,
    save_model,
    train_text,
    train_val_test_split,
)


def _spreadsheet_f1(tp, fp, fn):
    return tp / (tp + 0.5 * (fp + fn))


def test_f1_examples():
    assert f1_score(ConfusionCounts(tp=8, fp=2, fn=2)) == pytest.approx(0.8)
    assert f1_score(ConfusionCounts(tp=5, fp=0, fn=0)) == 1.0
    assert f1_score(ConfusionCounts(tp=0, fp=3, fn=3)) == 0.0


def test_f1_undefined():
    with pytest.raises(ValueError):
        f1_score(ConfusionCounts(tp=0, fp=0, fn=0, tn=9))


def test_detection_rate_examples():
    assert detection_rate(ConfusionCounts(tp=3, fn=1)) == 0.75
    assert detection_rate(ConfusionCounts(tp=2, fn=0)) == 1.0
    assert detection_rate(ConfusionCounts(tp=0, fn=5)) == 0.0
    with pytest.raises(ValueError):
        detection_rate(ConfusionCounts(tp=0, fn=0, fp=3))


@settings(max_examples=200, deadline=None)
@given(tp=st.integers(0, 50), fp=st.integers(0, 50), fn=st.integers(0, 50))
def test_f1_symmetry_and_bounds(tp, fp, fn):
    if tp + fp + fn == 0:
        return
    value = f1_score(ConfusionCounts(tp=tp, fp=fp, fn=fn))
    mirrored = f1_score(ConfusionCounts(tp=tp, fp=fn, fn=fp))
    assert value == mirrored
    assert 0.0 <= value <= 1.0
    assert (value == 1.0) == (fp == 0 and fn == 0 and tp > 0)


def test_confusion_counts_reject_negative():
    with pytest.raises(ValueError):
        ConfusionCounts(tp=-1)


def _separable_corpus(n=200, seed=5):
    rng = random.Random(seed)
    docs = []
    for i in range(n):
        label = i % 2
        core = ["aaa"] if label else ["bbb"]
        filler = [rng.choice(["xx", "yy", "zz"]) for _ in range(rng.randrange(3))]
        docs.append(LabeledTokenSeq(post_id=f"d{i}", tokens=tuple(core + filler), label=label))
    rng.shuffle(docs)
    return docs


def test_separable_corpus_reaches_high_f1():
    docs = _separable_corpus()
    train, val, _ = train_val_test_split(docs, seed=1)
    model = train_text(train, TextConfig(seed=0))
    tp = fp = fn = tn = 0
    for doc in val:
        predicted = predict_label(model, doc.tokens)
        if doc.label == 1 and predicted == 1:
            tp += 1
        elif doc.label == 0 and predicted == 1:
            fp += 1
        elif doc.label == 1 and predicted == 0:
            fn += 1
        else:
            tn += 1
    assert f1_score(ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)) >= 0.99


def test_training_docs_score_on_correct_side():
    docs = _separable_corpus()
    model = train_text(docs, TextConfig(seed=0))
    for doc in docs:
        assert predict_label(model, doc.tokens) == doc.label


def test_empty_training_set_rejected():
    with pytest.raises(ValueError):
        train_text([])


def test_single_class_rejected():
    docs = [LabeledTokenSeq(post_id="a", tokens=("x",), label=1)]
    with pytest.raises(ValueError):
        train_text(docs)


def test_same_seed_same_weights():
    docs = _separable_corpus()
    a = train_text(docs, TextConfig(seed=3))
    b = train_text(docs, TextConfig(seed=3))
    assert a.weights == b.weights and a.bias == b.bias


def test_empty_tokens_score_is_sigmoid_bias():
    model = TextModel(hash_dim=16, weights={1: 2.0}, bias=-0.4)
    assert predict_text(model, []) == pytest.approx(1.0 / (1.0 + math.exp(0.4)))


def test_repeated_token_contributes_double():
    model = train_text(_separable_corpus(), TextConfig(seed=0))
    single = math.log(model.score(["aaa"]) / (1 - model.score(["aaa"])))
    double = math.log(model.score(["aaa", "aaa"]) / (1 - model.score(["aaa", "aaa"])))
    margin_of_token = single - model.bias
    assert double - model.bias == pytest.approx(2 * margin_of_token, rel=1e-9)


def test_threshold_monotonicity():
    docs = _separable_corpus()
    model = train_text(docs, TextConfig(seed=0))
    scores = [model.score(d.tokens) for d in docs]
    labels = [d.label for d in docs]
    previous_fp = None
    for threshold in (0.1, 0.3, 0.5, 0.7, 0.9):
        fp = sum(1 for s, y in zip(scores, labels) if s >= threshold and y == 0)
        if previous_fp is not None:
            assert fp <= previous_fp
        previous_fp = fp


def test_model_round_trip(tmp_path):
    model = train_text(_separable_corpus(), TextConfig(seed=0))
    path = tmp_path / "model.json"
    save_model(model, str(path))
    again = load_model(str(path))
    assert again.weights == model.weights
    assert again.bias == model.bias
    assert again.score(["aaa", "xx"]) == model.score(["aaa", "xx"])


def test_model_file_version_checked(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format": "other", "version": 9}')
    with pytest.raises(ValueError):
        load_model(str(path))


def test_split_ratios():
    items = list(range(100))
    train, val, test = train_val_test_split(items, seed=0)
    assert len(train) == 80 and len(val) == 10 and len(test) == 10
    assert sorted(train + val + test) == items
