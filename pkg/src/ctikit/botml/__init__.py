"""Bot-account labeling, feature selection, and classifier training."""

from .models import (
    DecisionTreeModel,
    LogisticModel,
    RandomForestModel,
    log_loss,
    log_loss_gradient,
    sigmoid,
)
from .training import (
    BOTNESS_THRESHOLD,
    AccountFeatures,
    LabeledFeatures,
    ModelKind,
    ScalerState,
    TrainConfig,
    TrainedModel,
    anova_f_scores,
    evaluate,
    label_accounts,
    load_model,
    matrix_from,
    minmax_apply,
    minmax_fit_transform,
    save_model,
    select_k_best,
    stratified_split,
    train_classifier,
)

__all__ = [
    "DecisionTreeModel",
    "LogisticModel",
    "RandomForestModel",
    "log_loss",
    "log_loss_gradient",
    "sigmoid",
    "BOTNESS_THRESHOLD",
    "AccountFeatures",
    "LabeledFeatures",
    "ModelKind",
    "ScalerState",
    "TrainConfig",
    "TrainedModel",
    "anova_f_scores",
    "evaluate",
    "label_accounts",
    "load_model",
    "matrix_from",
    "minmax_apply",
    "minmax_fit_transform",
    "save_model",
    "select_k_best",
    "stratified_split",
    "train_classifier",
]
