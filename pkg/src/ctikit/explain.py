"""Model explanations: exact additive contributions for the linear model,
local weighted-linear surrogates for any model, and global permutation
importance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .botml import ModelKind, TrainedModel
from .relevance import ConfusionCounts, f1_score

LIME_NOISE_SIGMA = 0.1  # per scaled feature
RIDGE_FALLBACK_LAMBDA = 1e-6


@dataclass(frozen=True)
class Explanation:
    """Per-feature signed contributions for one instance.

    For linear models base_value + sum(contributions) equals the prediction
    exactly on the margin scale; LIME surrogates report on the probability
    scale.
    """

    instance_id: str
    contributions: tuple[tuple[str, float], ...]
    base_value: float
    prediction: float
    scale: str
    note: str = ""

    def ranked(self) -> list[tuple[str, float]]:
        return sorted(self.contributions, key=lambda item: (-abs(item[1]), item[0]))

    def total(self) -> float:
        return self.base_value + sum(value for _, value in self.contributions)


def linear_contributions(
    model: TrainedModel,
    x: np.ndarray,
    background: np.ndarray,
    instance_id: str = "",
) -> Explanation:
    """Exact margin-scale contributions w_j * (x_j - background mean_j)."""
    if model.kind is not ModelKind.LOGISTIC_REGRESSION:
        raise ValueError(f"exact linear contributions need a linear model, got {model.kind.value}")
    background = np.asarray(background, dtype=float)
    if background.ndim != 2 or len(background) == 0:
        raise ValueError("background must be a non-empty 2-D array")
    xs = model.prepare(np.asarray(x, dtype=float).reshape(1, -1))[0]
    bg_mean = model.prepare(background).mean(axis=0)
    weights = model.estimator.weights
    contributions = weights * (xs - bg_mean)
    base_value = float(weights @ bg_mean + model.estimator.bias)
    prediction = float(weights @ xs + model.estimator.bias)
    names = model.selected_names()
    return Explanation(
        instance_id=instance_id,
        contributions=tuple(zip(names, (float(c) for c in contributions))),
        base_value=base_value,
        prediction=prediction,
        scale="margin",
    )


def lime_explain(
    model: TrainedModel,
    x: np.ndarray,
    n_samples: int = 1000,
    kernel_width: float = 1.0,
    seed: int = 0,
    instance_id: str = "",
) -> Explanation:
    """Weighted least-squares linear surrogate around one instance.

    Gaussian perturbations (sigma 0.1 per scaled feature) are scored by the
    model; samples are weighted by exp(-d^2 / kernel_width^2). A
    rank-deficient design falls back to ridge and says so in the note.
    """
    if n_samples < 50:
        raise ValueError("n_samples must be at least 50")
    if kernel_width <= 0:
        raise ValueError("kernel_width must be positive")
    xs = model.prepare(np.asarray(x, dtype=float).reshape(1, -1))[0]
    d = len(xs)
    rng = np.random.default_rng(seed)
    samples = xs + rng.normal(0.0, LIME_NOISE_SIGMA, size=(n_samples, d))
    predictions = np.asarray(model.estimator.predict_proba(samples), dtype=float)

    distances = np.linalg.norm(samples - xs, axis=1)
    sample_weights = np.exp(-(distances**2) / kernel_width**2)

    design = np.hstack([np.ones((n_samples, 1)), samples])
    weighted = design * sample_weights[:, None]
    normal = design.T @ weighted
    target = weighted.T @ predictions

    note = ""
    if np.linalg.matrix_rank(normal) < d + 1:
        normal = normal + RIDGE_FALLBACK_LAMBDA * np.eye(d + 1)
        note = "ridge fallback: rank-deficient perturbation matrix"
    coefficients = np.linalg.solve(normal, target)

    names = model.selected_names()
    prediction = float(model.estimator.predict_proba(xs.reshape(1, -1))[0])
    return Explanation(
        instance_id=instance_id,
        contributions=tuple(zip(names, (float(c) for c in coefficients[1:]))),
        base_value=float(np.mean(predictions)),
        prediction=prediction,
        scale="probability",
        note=note,
    )


def _f1_metric(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    counts = ConfusionCounts.from_pairs([int(v) for v in y_true], [int(v) for v in y_pred])
    if counts.tp + counts.fp + counts.fn == 0:
        return 0.0
    return f1_score(counts)


def permutation_importance(
    model: TrainedModel,
    X: np.ndarray,
    y: np.ndarray,
    metric: Optional[Callable[[np.ndarray, np.ndarray], float]] = None,
    repeats: int = 10,
    seed: int = 0,
) -> list[tuple[str, float]]:
    """Mean metric drop from shuffling each raw feature column, ranked."""
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    metric = metric or _f1_metric
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    baseline = metric(y, model.predict(X))
    rng = np.random.default_rng(seed)
    drops = np.zeros(X.shape[1])
    for j in range(X.shape[1]):
        total = 0.0
        for _ in range(repeats):
            shuffled = X.copy()
            shuffled[:, j] = shuffled[rng.permutation(len(X)), j]
            total += baseline - metric(y, model.predict(shuffled))
        drops[j] = total / repeats
    order = sorted(range(X.shape[1]), key=lambda j: (-drops[j], j))
    names: Sequence[str] = model.feature_names
    return [(names[j], float(drops[j])) for j in order]
