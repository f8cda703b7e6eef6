"""Bot-account training pipeline: threshold labeling from botness scores,
min-max scaling, ANOVA-F feature selection, model fitting, and evaluation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from ..features import FEATURE_NAMES, FeatureVector
from ..relevance import ConfusionCounts, f1_score
from .models import DecisionTreeModel, LogisticModel, RandomForestModel

BOTNESS_THRESHOLD = 0.95


@dataclass(frozen=True)
class AccountFeatures:
    author_id: str
    features: FeatureVector


@dataclass(frozen=True)
class LabeledFeatures:
    author_id: str
    features: FeatureVector
    label: int  # 1 = automated

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


def label_accounts(
    rows: Sequence[AccountFeatures],
    scores: Mapping[str, float],
    threshold: float = BOTNESS_THRESHOLD,
) -> list[LabeledFeatures]:
    """Label 1 when the account's botness score is at or above the threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be within [0, 1]")
    missing = [row.author_id for row in rows if row.author_id not in scores]
    if missing:
        raise ValueError("no botness score for: " + ", ".join(sorted(missing)[:10]))
    return [
        LabeledFeatures(
            author_id=row.author_id,
            features=row.features,
            label=1 if scores[row.author_id] >= threshold else 0,
        )
        for row in rows
    ]


@dataclass
class ScalerState:
    """Per-feature training min/max; transform maps into [0, 1] with clamping."""

    mins: np.ndarray
    maxs: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        span = self.maxs - self.mins
        safe_span = np.where(span == 0, 1.0, span)
        scaled = (X - self.mins) / safe_span
        scaled = np.where(span == 0, 0.0, scaled)
        return np.clip(scaled, 0.0, 1.0)

    def to_dict(self) -> dict[str, Any]:
        return {"mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScalerState":
        return cls(mins=np.asarray(data["mins"], dtype=float), maxs=np.asarray(data["maxs"], dtype=float))


def minmax_fit_transform(X: np.ndarray) -> tuple[ScalerState, np.ndarray]:
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        raise ValueError("cannot fit a scaler on an empty matrix")
    state = ScalerState(mins=X.min(axis=0), maxs=X.max(axis=0))
    return state, state.transform(X)


def minmax_apply(state: ScalerState, X: np.ndarray) -> np.ndarray:
    return state.transform(X)


def anova_f_scores(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-feature one-way F statistic between the two classes.

    Zero within-class variance yields inf when the means differ and 0 when
    they do not (a constant feature carries no signal).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("both classes must be present")
    n = len(y)
    grand_mean = X.mean(axis=0)
    ss_between = np.zeros(X.shape[1])
    ss_within = np.zeros(X.shape[1])
    for cls_value in classes:
        group = X[y == cls_value]
        group_mean = group.mean(axis=0)
        ss_between += len(group) * (group_mean - grand_mean) ** 2
        ss_within += ((group - group_mean) ** 2).sum(axis=0)
    df_between = len(classes) - 1
    df_within = n - len(classes)
    ms_between = ss_between / df_between
    ms_within = ss_within / max(df_within, 1)
    scores = np.empty(X.shape[1])
    for j in range(X.shape[1]):
        if ms_within[j] == 0.0:
            scores[j] = 0.0 if ms_between[j] == 0.0 else math.inf
        else:
            scores[j] = ms_between[j] / ms_within[j]
    return scores


def select_k_best(X: np.ndarray, y: np.ndarray, k: int) -> tuple[list[int], np.ndarray]:
    """Indices of the k features with the highest F score, descending,
    ties broken by lower index; also returns all scores."""
    scores = anova_f_scores(X, y)
    if not 1 <= k <= X.shape[1]:
        raise ValueError(f"k must be in 1..{X.shape[1]}")
    ranked = sorted(range(X.shape[1]), key=lambda j: (-scores[j], j))
    return ranked[:k], scores


class ModelKind(Enum):
    LOGISTIC_REGRESSION = "logistic_regression"
    DECISION_TREE = "decision_tree"
    RANDOM_FOREST = "random_forest"


@dataclass
class TrainConfig:
    k_features: Optional[int] = None  # None selects all
    learning_rate: float = 0.1
    epochs: int = 500
    max_depth: int = 20
    min_leaf: int = 1
    n_trees: int = 100
    max_features: Optional[str | int] = "sqrt"  # forest per-split subsampling
    bootstrap: bool = True


@dataclass
class TrainedModel:
    """A fitted classifier with its scaling and feature-selection state."""

    kind: ModelKind
    scaler: ScalerState
    selected: list[int]
    estimator: Any
    seed: int
    config: TrainConfig = field(default_factory=TrainConfig)
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def prepare(self, X: np.ndarray) -> np.ndarray:
        return self.scaler.transform(np.asarray(X, dtype=float))[:, self.selected]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.estimator.predict_proba(self.prepare(X))

    def predict(self, X: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(int)

    def selected_names(self) -> list[str]:
        return [self.feature_names[j] for j in self.selected]

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": "ctikit.bot-model",
            "version": 1,
            "kind": self.kind.value,
            "scaler": self.scaler.to_dict(),
            "selected": list(self.selected),
            "estimator": self.estimator.to_dict(),
            "seed": self.seed,
            "config": {
                "k_features": self.config.k_features,
                "learning_rate": self.config.learning_rate,
                "epochs": self.config.epochs,
                "max_depth": self.config.max_depth,
                "min_leaf": self.config.min_leaf,
                "n_trees": self.config.n_trees,
                "max_features": self.config.max_features,
                "bootstrap": self.config.bootstrap,
            },
            "feature_names": list(self.feature_names),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TrainedModel":
        if data.get("format") != "ctikit.bot-model" or data.get("version") != 1:
            raise ValueError("not a version-1 bot model file")
        kind = ModelKind(data["kind"])
        estimator_cls = {
            ModelKind.LOGISTIC_REGRESSION: LogisticModel,
            ModelKind.DECISION_TREE: DecisionTreeModel,
            ModelKind.RANDOM_FOREST: RandomForestModel,
        }[kind]
        cfg = data["config"]
        return cls(
            kind=kind,
            scaler=ScalerState.from_dict(data["scaler"]),
            selected=[int(j) for j in data["selected"]],
            estimator=estimator_cls.from_dict(data["estimator"]),
            seed=int(data["seed"]),
            config=TrainConfig(
                k_features=cfg["k_features"],
                learning_rate=float(cfg["learning_rate"]),
                epochs=int(cfg["epochs"]),
                max_depth=int(cfg["max_depth"]),
                min_leaf=int(cfg["min_leaf"]),
                n_trees=int(cfg["n_trees"]),
                max_features=cfg["max_features"],
                bootstrap=bool(cfg["bootstrap"]),
            ),
            feature_names=tuple(data.get("feature_names", FEATURE_NAMES)),
        )


def _resolve_max_features(setting: Optional[str | int], n_features: int) -> Optional[int]:
    if setting is None:
        return None
    if setting == "sqrt":
        return max(1, int(math.isqrt(n_features)))
    return min(int(setting), n_features)


def train_classifier(
    kind: ModelKind,
    X: np.ndarray,
    y: np.ndarray,
    config: Optional[TrainConfig] = None,
    seed: int = 0,
    feature_names: Sequence[str] = FEATURE_NAMES,
) -> TrainedModel:
    """Scale, select, and fit; the returned model owns all three stages."""
    config = config or TrainConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(np.unique(y)) < 2:
        raise ValueError("training data must contain both classes")
    if len(feature_names) != X.shape[1]:
        feature_names = tuple(f"f{i}" for i in range(X.shape[1]))

    scaler, X_scaled = minmax_fit_transform(X)
    if config.k_features is None:
        selected = list(range(X.shape[1]))
    else:
        selected, _ = select_k_best(X_scaled, y, config.k_features)
    X_sel = X_scaled[:, selected]

    if kind is ModelKind.LOGISTIC_REGRESSION:
        estimator: Any = LogisticModel.fit(
            X_sel, y, learning_rate=config.learning_rate, epochs=config.epochs
        )
    elif kind is ModelKind.DECISION_TREE:
        estimator = DecisionTreeModel.fit(
            X_sel, y, max_depth=config.max_depth, min_leaf=config.min_leaf
        )
    elif kind is ModelKind.RANDOM_FOREST:
        estimator = RandomForestModel.fit(
            X_sel,
            y,
            n_trees=config.n_trees,
            max_depth=config.max_depth,
            min_leaf=config.min_leaf,
            max_features=_resolve_max_features(config.max_features, X_sel.shape[1]),
            bootstrap=config.bootstrap,
            seed=seed,
        )
    else:
        raise ValueError(f"unknown model kind {kind}")

    return TrainedModel(
        kind=kind,
        scaler=scaler,
        selected=selected,
        estimator=estimator,
        seed=seed,
        config=config,
        feature_names=tuple(feature_names),
    )


def evaluate(model: TrainedModel, X: np.ndarray, y: np.ndarray) -> tuple[ConfusionCounts, float]:
    """Confusion counts and F1 on a labeled set (F1 = 0 when undefined)."""
    if len(y) == 0:
        raise ValueError("evaluation set is empty")
    predicted = model.predict(np.asarray(X, dtype=float))
    counts = ConfusionCounts.from_pairs([int(v) for v in y], [int(v) for v in predicted])
    if counts.tp + counts.fp + counts.fn == 0:
        return counts, 0.0
    return counts, f1_score(counts)


def stratified_split(
    y: Sequence[int], test_fraction: float = 0.2, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Per-class shuffled split; returns (train_indices, test_indices)."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    train_parts: list[np.ndarray] = []
    test_parts: list[np.ndarray] = []
    for cls_value in np.unique(y):
        indices = np.flatnonzero(y == cls_value)
        rng.shuffle(indices)
        n_test = int(round(len(indices) * test_fraction))
        test_parts.append(indices[:n_test])
        train_parts.append(indices[n_test:])
    return np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(test_parts))


def matrix_from(rows: Sequence[LabeledFeatures]) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray([row.features.values() for row in rows], dtype=float)
    y = np.asarray([row.label for row in rows], dtype=float)
    return X, y


def save_model(model: TrainedModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path: str) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return TrainedModel.from_dict(json.load(fh))
