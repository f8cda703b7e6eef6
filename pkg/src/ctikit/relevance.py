"""Relevance classification of preprocessed posts.

The classifier is a hashed bag-of-words logistic model behind a small
interface (train/score/save/load) so a heavier text model can be slotted in
without changing callers. Also home to the F1 and detection-rate metrics.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from random import Random
from typing import Iterable, Sequence

DECISION_THRESHOLD = 0.5


@dataclass(frozen=True)
class LabeledTokenSeq:
    post_id: str
    tokens: tuple[str, ...]
    label: int  # 1 = carries indicators, 0 = not

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        object.__setattr__(self, "tokens", tuple(self.tokens))


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def from_pairs(cls, truth: Sequence[int], predicted: Sequence[int]) -> "ConfusionCounts":
        if len(truth) != len(predicted):
            raise ValueError("length mismatch")
        tp = fp = fn = tn = 0
        for y, p in zip(truth, predicted):
            if y == 1 and p == 1:
                tp += 1
            elif y == 0 and p == 1:
                fp += 1
            elif y == 1 and p == 0:
                fn += 1
            else:
                tn += 1
        return cls(tp=tp, fp=fp, fn=fn, tn=tn)


def f1_score(c: ConfusionCounts) -> float:
    denominator = c.tp + 0.5 * (c.fp + c.fn)
    if denominator == 0:
        raise ValueError("F1 undefined: tp, fp and fn are all zero")
    return c.tp / denominator


def detection_rate(c: ConfusionCounts) -> float:
    if c.tp + c.fn == 0:
        raise ValueError("detection rate undefined: no positive samples")
    return c.tp / (c.tp + c.fn)


@dataclass
class TextConfig:
    hash_dim: int = 2**18
    learning_rate: float = 0.5
    epochs: int = 300
    seed: int = 0


@dataclass
class TextModel:
    """Logistic model over hashed unigram counts (sparse weights)."""

    hash_dim: int
    weights: dict[int, float]
    bias: float
    config: TextConfig = field(default_factory=TextConfig)

    def score(self, tokens: Iterable[str]) -> float:
        margin = self.bias
        for index, count in _hash_counts(tokens, self.hash_dim).items():
            margin += self.weights.get(index, 0.0) * count
        return _sigmoid(margin)

    def to_dict(self) -> dict:
        return {
            "format": "ctikit.text-model",
            "version": 1,
            "hash_dim": self.hash_dim,
            "bias": self.bias,
            "weights": {str(i): w for i, w in sorted(self.weights.items())},
            "config": {
                "hash_dim": self.config.hash_dim,
                "learning_rate": self.config.learning_rate,
                "epochs": self.config.epochs,
                "seed": self.config.seed,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TextModel":
        if data.get("format") != "ctikit.text-model" or data.get("version") != 1:
            raise ValueError("not a version-1 text model file")
        cfg = data["config"]
        hash_dim = int(data["hash_dim"])
        weights = {int(i): float(w) for i, w in data["weights"].items()}
        if weights and not all(0 <= i < hash_dim for i in weights):
            raise ValueError("weight index outside the hashing dimension")
        return cls(
            hash_dim=hash_dim,
            weights=weights,
            bias=float(data["bias"]),
            config=TextConfig(
                hash_dim=int(cfg["hash_dim"]),
                learning_rate=float(cfg["learning_rate"]),
                epochs=int(cfg["epochs"]),
                seed=int(cfg["seed"]),
            ),
        )


def token_index(token: str, hash_dim: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % hash_dim


def _hash_counts(tokens: Iterable[str], hash_dim: int) -> dict[int, int]:
    counts = Counter(token_index(t, hash_dim) for t in tokens)
    return dict(counts)


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def train_text(train: Sequence[LabeledTokenSeq], config: TextConfig | None = None) -> TextModel:
    """Fit the logistic model by full-batch gradient descent on log-loss.

    Deterministic for a given config; raises on an empty or single-class
    training set.
    """
    config = config or TextConfig()
    if not train:
        raise ValueError("training set is empty")
    labels = {doc.label for doc in train}
    if labels != {0, 1}:
        raise ValueError("training set must contain both classes")

    docs = [(_hash_counts(doc.tokens, config.hash_dim), doc.label) for doc in train]
    n = len(docs)
    weights: dict[int, float] = {}
    bias = 0.0

    for _ in range(config.epochs):
        grad_bias = 0.0
        grad_w: dict[int, float] = {}
        for counts, label in docs:
            margin = bias + sum(weights.get(i, 0.0) * c for i, c in counts.items())
            error = _sigmoid(margin) - label
            grad_bias += error
            for i, c in counts.items():
                grad_w[i] = grad_w.get(i, 0.0) + error * c
        step = config.learning_rate / n
        bias -= step * grad_bias
        for i, g in grad_w.items():
            weights[i] = weights.get(i, 0.0) - step * g

    return TextModel(hash_dim=config.hash_dim, weights=weights, bias=bias, config=config)


def predict_text(model: TextModel, tokens: Iterable[str]) -> float:
    return model.score(tokens)


def predict_label(model: TextModel, tokens: Iterable[str], threshold: float = DECISION_THRESHOLD) -> int:
    return 1 if model.score(tokens) >= threshold else 0


def save_model(model: TextModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path: str) -> TextModel:
    with open(path, encoding="utf-8") as fh:
        return TextModel.from_dict(json.load(fh))


def train_val_test_split(
    items: Sequence, seed: int = 0, ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
) -> tuple[list, list, list]:
    """Shuffled 80/10/10 split (validation and test share the remainder)."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must sum to 1")
    shuffled = list(items)
    Random(seed).shuffle(shuffled)
    n = len(shuffled)
    n_train = int(round(n * ratios[0]))
    n_val = int(round(n * ratios[1]))
    return shuffled[:n_train], shuffled[n_train : n_train + n_val], shuffled[n_train + n_val :]
