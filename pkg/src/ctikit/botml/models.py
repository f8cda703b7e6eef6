"""Binary classifiers trained from scratch: logistic regression by gradient
descent, CART-style decision trees on Gini impurity, and bagged forests.

Everything is deterministic for a given seed; forest members derive their
own generator from seed + tree index so serial and parallel training agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    positive = z >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-z[positive]))
    exp_z = np.exp(z[~positive])
    out[~positive] = exp_z / (1.0 + exp_z)
    return out


def log_loss_gradient(
    weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray
) -> tuple[np.ndarray, float]:
    """Mean log-loss gradient wrt (weights, bias)."""
    error = sigmoid(X @ weights + bias) - y
    return X.T @ error / len(y), float(np.mean(error))


def log_loss(weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(sigmoid(X @ weights + bias), 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float

    @classmethod
    def fit(cls, X: np.ndarray, y: np.ndarray, learning_rate: float = 0.1, epochs: int = 500) -> "LogisticModel":
        weights = np.zeros(X.shape[1])
        bias = 0.0
        for _ in range(epochs):
            grad_w, grad_b = log_loss_gradient(weights, bias, X, y)
            weights -= learning_rate * grad_w
            bias -= learning_rate * grad_b
        return cls(weights=weights, bias=bias)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(X @ self.weights + self.bias)

    def to_dict(self) -> dict[str, Any]:
        return {"weights": self.weights.tolist(), "bias": self.bias}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LogisticModel":
        return cls(weights=np.asarray(data["weights"], dtype=float), bias=float(data["bias"]))


@dataclass
class TreeNode:
    """Leaf (probability set) or internal split (feature/threshold set)."""

    probability: Optional[float] = None
    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.probability is not None

    def to_dict(self) -> dict[str, Any]:
        if self.is_leaf:
            return {"p": self.probability}
        return {
            "f": self.feature,
            "t": self.threshold,
            "l": self.left.to_dict(),
            "r": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TreeNode":
        if "p" in data:
            return cls(probability=float(data["p"]))
        return cls(
            feature=int(data["f"]),
            threshold=float(data["t"]),
            left=cls.from_dict(data["l"]),
            right=cls.from_dict(data["r"]),
        )


def _gini(positives: float, total: float) -> float:
    if total == 0:
        return 0.0
    p = positives / total
    return 2.0 * p * (1.0 - p)


def _best_split(
    X: np.ndarray, y: np.ndarray, feature_indices: np.ndarray, min_leaf: int
) -> Optional[tuple[float, int, float]]:
    """Lowest weighted-Gini split over the candidate features.

    Ties resolve to the earliest candidate (ascending feature, ascending
    threshold), which keeps training deterministic.
    """
    n = len(y)
    best: Optional[tuple[float, int, float]] = None
    left_sizes = np.arange(1, n)
    for feature in feature_indices:
        order = np.argsort(X[:, feature], kind="stable")
        xs = X[order, feature]
        cumulative_pos = np.cumsum(y[order])
        total_pos = cumulative_pos[-1]

        valid = xs[1:] != xs[:-1]
        if min_leaf > 1:
            valid &= (left_sizes >= min_leaf) & (left_sizes <= n - min_leaf)
        if not valid.any():
            continue
        left_pos = cumulative_pos[:-1]
        right_sizes = n - left_sizes
        p_left = left_pos / left_sizes
        p_right = (total_pos - left_pos) / right_sizes
        score = (
            left_sizes * 2.0 * p_left * (1.0 - p_left)
            + right_sizes * 2.0 * p_right * (1.0 - p_right)
        ) / n
        score = np.where(valid, score, np.inf)
        j = int(np.argmin(score))  # first minimum -> lowest threshold wins ties
        if best is None or score[j] < best[0]:
            best = (float(score[j]), int(feature), float((xs[j] + xs[j + 1]) / 2.0))
    return best


@dataclass
class DecisionTreeModel:
    root: TreeNode
    max_depth: int = 20
    min_leaf: int = 1

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        max_depth: int = 20,
        min_leaf: int = 1,
        max_features: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
    ) -> "DecisionTreeModel":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)

        def grow(rows: np.ndarray, depth: int) -> TreeNode:
            labels = y[rows]
            probability = float(np.mean(labels))
            if depth >= max_depth or probability in (0.0, 1.0) or len(rows) < 2 * min_leaf:
                return TreeNode(probability=probability)
            d = X.shape[1]
            if max_features is not None and max_features < d:
                if rng is None:
                    raise ValueError("feature subsampling requires an rng")
                candidates = np.sort(rng.choice(d, size=max_features, replace=False))
            else:
                candidates = np.arange(d)
            split = _best_split(X[rows], y[rows], candidates, min_leaf)
            if split is None:
                return TreeNode(probability=probability)
            _, feature, threshold = split
            mask = X[rows, feature] <= threshold
            node_gini = _gini(float(labels.sum()), len(rows))
            if split[0] >= node_gini:
                return TreeNode(probability=probability)
            return TreeNode(
                feature=feature,
                threshold=threshold,
                left=grow(rows[mask], depth + 1),
                right=grow(rows[~mask], depth + 1),
            )

        return cls(root=grow(np.arange(len(y)), 0), max_depth=max_depth, min_leaf=min_leaf)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.empty(len(X))
        for i, row in enumerate(X):
            node = self.root
            while not node.is_leaf:
                node = node.left if row[node.feature] <= node.threshold else node.right
            out[i] = node.probability
        return out

    def to_dict(self) -> dict[str, Any]:
        return {"root": self.root.to_dict(), "max_depth": self.max_depth, "min_leaf": self.min_leaf}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DecisionTreeModel":
        return cls(
            root=TreeNode.from_dict(data["root"]),
            max_depth=int(data["max_depth"]),
            min_leaf=int(data["min_leaf"]),
        )


@dataclass
class RandomForestModel:
    trees: list[DecisionTreeModel] = field(default_factory=list)

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        n_trees: int = 100,
        max_depth: int = 20,
        min_leaf: int = 1,
        max_features: Optional[int] = None,
        bootstrap: bool = True,
        seed: int = 0,
    ) -> "RandomForestModel":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if max_features is not None:
            max_features = min(max_features, X.shape[1])
        trees = []
        for index in range(n_trees):
            rng = np.random.default_rng(seed + index)
            if bootstrap:
                rows = rng.integers(0, len(y), size=len(y))
            else:
                rows = np.arange(len(y))
            trees.append(
                DecisionTreeModel.fit(
                    X[rows],
                    y[rows],
                    max_depth=max_depth,
                    min_leaf=min_leaf,
                    max_features=max_features,
                    rng=rng,
                )
            )
        return cls(trees=trees)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        votes = np.stack([tree.predict_proba(X) for tree in self.trees])
        return votes.mean(axis=0)

    def to_dict(self) -> dict[str, Any]:
        return {"trees": [tree.to_dict() for tree in self.trees]}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RandomForestModel":
        return cls(trees=[DecisionTreeModel.from_dict(t) for t in data["trees"]])
